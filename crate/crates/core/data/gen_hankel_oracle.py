#!/usr/bin/env python3
"""Reference values for H0^(1)(z), H1^(1)(z) on the closed first quadrant.

J0, J1, Y0, Y1 are evaluated from their ascending series in 160-digit
arithmetic and combined into H = J + iY. Every value is cross-checked against
mpmath.hankel1 before it is written.

Usage: python3 gen_hankel_oracle.py > hankel_oracle.csv
"""
import mpmath as mp

mp.mp.dps = 160


def j_y_series(z):
    """J0, J1, Y0, Y1 from the ascending series (DLMF 10.2.2, 10.8.1)."""
    q = z * z / 4
    euler = mp.euler
    log_half = mp.log(z / 2)
    j0 = mp.mpc(0)
    j1 = mp.mpc(0)
    s0 = mp.mpc(0)
    s1 = mp.mpc(0)
    term0 = mp.mpc(1)  # (-q)^k / (k!)^2
    term1 = z / 2  # (z/2) (-q)^k / (k! (k+1)!)
    harmonic = mp.mpf(0)  # H_k
    k = 0
    while True:
        j0 += term0
        j1 += term1
        s0 += harmonic * term0
        harmonic_next = harmonic + mp.mpf(1) / (k + 1)
        s1 += (harmonic + harmonic_next) * term1
        if k > 10 and abs(term0) < mp.mpf(10) ** (-150) and abs(term1) < mp.mpf(10) ** (-150):
            break
        k += 1
        harmonic = harmonic_next
        term0 = -term0 * q / (k * k)
        term1 = -term1 * q / (k * (k + 1))
    y0 = (2 / mp.pi) * ((log_half + euler) * j0 - s0)
    # Y1 = -2/(pi z) + (2/pi) log(z/2) J1 - (1/pi) sum (psi(k+1)+psi(k+2)) (z/2)(-q)^k/(k!(k+1)!)
    # psi(k+1)+psi(k+2) = -2 gamma + H_k + H_{k+1}
    y1 = -2 / (mp.pi * z) + (2 / mp.pi) * log_half * j1 - (1 / mp.pi) * (s1 - 2 * euler * j1)
    return j0, j1, y0, y1


def main():
    moduli = [mp.mpf(10) ** (mp.mpf(-3) + mp.mpf(5) * i / 24) for i in range(25)]
    args = [mp.pi / 2 * i / 19 for i in range(20)]
    print("re_z,im_z,re_h0,im_h0,re_h1,im_h1")
    for r in moduli:
        for a in args:
            # Evaluate at the exact binary64 point that the consumer parses.
            re_z = 0.0 if a == mp.pi / 2 else float(r * mp.cos(a))
            im_z = float(r * mp.sin(a))
            z = mp.mpc(re_z, im_z)
            j0, j1, y0, y1 = j_y_series(z)
            h0 = j0 + 1j * y0
            h1 = j1 + 1j * y1
            ref0 = mp.hankel1(0, z)
            ref1 = mp.hankel1(1, z)
            assert abs(h0 - ref0) <= mp.mpf(10) ** (-40) * abs(ref0), (z, h0, ref0)
            assert abs(h1 - ref1) <= mp.mpf(10) ** (-40) * abs(ref1), (z, h1, ref1)
            vals = [h0.real, h0.imag, h1.real, h1.imag]
            print(",".join([repr(re_z), repr(im_z)] + [mp.nstr(v, 20, min_fixed=0, max_fixed=0) for v in vals]))


if __name__ == "__main__":
    main()
