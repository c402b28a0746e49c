//! Bessel and Hankel functions of integer order for complex arguments in the
//! closed first quadrant.
//!
//! `H0` and `H1` are computed through the modified Bessel functions
//! `K0`, `K1` at `w = -i z`, which lies in the right half plane:
//!
//! ```text
//! H0(z) = 2/(pi i) K0(-i z),    H1(z) = -2/pi K1(-i z)
//! ```
//!
//! Small `|w|` uses the ascending series, larger `|w|` Steed's continued
//! fraction (Temme's CF2). Neither branch suffers the `J`/`Y` cancellation of
//! the textbook formulas, so relative accuracy holds even where `H` decays.

use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::LazyLock;

use num_complex::Complex64;
use thiserror::Error;

type C = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modulus of `w = -i z` at which evaluation switches from the ascending
/// series to the continued fraction.
pub const CROSSOVER: f64 = 2.0;

pub const MIN_MODULUS: f64 = 1e-8;
pub const MAX_MODULUS: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelPair {
    pub h0: C,
    pub h1: C,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SpecfunError {
    #[error("Hankel function is singular at z = 0")]
    Singular,
    #[error("argument {0} is outside the closed first quadrant")]
    Domain(C),
    #[error("|z| = {0:.3e} is outside the supported range [1e-8, 1e4]")]
    Range(f64),
}

/// `H0^(1)(z)` and `H1^(1)(z)` for `Re z >= 0`, `Im z >= 0`, `1e-8 <= |z| <= 1e4`.
pub fn hankel01(z: C) -> Result<HankelPair, SpecfunError> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(SpecfunError::Singular);
    }
    if !(z.re >= 0.0 && z.im >= 0.0) {
        return Err(SpecfunError::Domain(z));
    }
    let r = z.norm();
    if !(MIN_MODULUS..=MAX_MODULUS).contains(&r) {
        return Err(SpecfunError::Range(r));
    }
    Ok(hankel01_unchecked(z))
}

/// [`hankel01`] without argument validation, for hot loops whose arguments
/// are known to be admissible.
#[inline]
pub fn hankel01_unchecked(z: C) -> HankelPair {
    let w = C::new(z.im, -z.re);
    let (k0, k1) = if w.norm_sqr() <= CROSSOVER * CROSSOVER {
        bessel_k01_series(w)
    } else {
        bessel_k01_cf2(w)
    };
    from_k(k0, k1)
}

#[inline]
fn from_k(k0: C, k1: C) -> HankelPair {
    // 2/(pi i) = -i 2/pi
    HankelPair {
        h0: C::new(k0.im * FRAC_2_PI, -k0.re * FRAC_2_PI),
        h1: -k1 * FRAC_2_PI,
    }
}

const SERIES_TERMS: usize = 40;

struct SeriesCoefficients {
    // 1/(k!)^2, 1/(k!(k+1)!), H_k/(k!)^2, (psi(k+1)+psi(k+2))/(k!(k+1)!)
    i0: [f64; SERIES_TERMS],
    i1: [f64; SERIES_TERMS],
    k0: [f64; SERIES_TERMS],
    k1: [f64; SERIES_TERMS],
}

static SERIES: LazyLock<SeriesCoefficients> = LazyLock::new(|| {
    let mut c = SeriesCoefficients {
        i0: [0.0; SERIES_TERMS],
        i1: [0.0; SERIES_TERMS],
        k0: [0.0; SERIES_TERMS],
        k1: [0.0; SERIES_TERMS],
    };
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut harmonic = 0.0;
    for k in 0..SERIES_TERMS {
        if k > 0 {
            let kf = k as f64;
            t0 /= kf * kf;
            t1 /= kf * (kf + 1.0);
            harmonic += 1.0 / kf;
        }
        c.i0[k] = t0;
        c.i1[k] = t1;
        c.k0[k] = t0 * harmonic;
        c.k1[k] = t1 * (2.0 * harmonic + 1.0 / (k as f64 + 1.0) - 2.0 * EULER_GAMMA);
    }
    c
});

/// `(K0(w), K1(w))` by the ascending series; accurate for `|w| <= ~3`.
pub fn bessel_k01_series(w: C) -> (C, C) {
    let y = w * w * 0.25;
    let ay = y.norm();
    // (ay^k / (k!)^2) * H_k must fall below 1e-18
    let mut terms = 2;
    let mut mag = 1.0;
    while terms < SERIES_TERMS {
        mag *= ay / (terms as f64 * terms as f64);
        if mag < 1e-19 {
            break;
        }
        terms += 1;
    }
    let c = &*SERIES;
    let mut i0 = C::new(0.0, 0.0);
    let mut i1s = i0;
    let mut k0s = i0;
    let mut k1s = i0;
    for k in (0..terms).rev() {
        i0 = i0 * y + c.i0[k];
        i1s = i1s * y + c.i1[k];
        k0s = k0s * y + c.k0[k];
        k1s = k1s * y + c.k1[k];
    }
    let lg = (w * 0.5).ln();
    let i1 = w * 0.5 * i1s;
    let k0 = -(lg + EULER_GAMMA) * i0 + k0s;
    let k1 = w.inv() + lg * i1 - w * 0.25 * k1s;
    (k0, k1)
}

/// `(K0(w), K1(w))` by Steed's evaluation of Temme's CF2; `Re w >= 0`, `|w| >= ~1.5`.
pub fn bessel_k01_cf2(x: C) -> (C, C) {
    let one = C::new(1.0, 0.0);
    let mut b = (one + x) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = C::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = C::new(a1, 0.0);
    let mut c = C::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..100_000usize {
        a -= 2.0 * (i - 1) as f64;
        c = -c * a / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm_sqr() < 1e-34 * s.norm_sqr() {
            break;
        }
    }
    h *= a1;
    let k0 = (C::new(PI, 0.0) / (x * 2.0)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `J0(z)` and `J1(z)` for complex `z` with modest imaginary part.
pub fn bessel_j01(z: C) -> (C, C) {
    if z.norm() < 6.0 {
        let y = -z * z * 0.25;
        let mut t0 = C::new(1.0, 0.0);
        let mut t1 = C::new(1.0, 0.0);
        let mut j0 = t0;
        let mut j1 = t1;
        for k in 1..80 {
            let kf = k as f64;
            t0 = t0 * y / (kf * kf);
            t1 = t1 * y / (kf * (kf + 1.0));
            j0 += t0;
            j1 += t1;
            if t0.norm() < 1e-17 && t1.norm() < 1e-17 {
                break;
            }
        }
        (j0, j1 * z * 0.5)
    } else {
        let seq = bessel_j_seq(1, z);
        (seq[0], seq[1])
    }
}

/// `J_0(z), ..., J_nmax(z)` by Miller's backward recurrence normalised with
/// `J_0 + 2 sum J_2k = 1`. Suitable for arguments with modest imaginary part.
pub fn bessel_j_seq(nmax: usize, z: C) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); nmax + 1];
    if z.norm() == 0.0 {
        out[0] = C::new(1.0, 0.0);
        return out;
    }
    let az = z.norm();
    let big = (nmax as f64).max(az);
    let mut start = (big + 20.0 + 3.0 * big.sqrt() + 0.5 * az.cbrt() * 10.0) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let zi = z.inv();
    let mut jp1 = C::new(0.0, 0.0);
    let mut j = C::new(1e-30, 0.0);
    let mut norm = C::new(0.0, 0.0);
    for k in (1..=start).rev() {
        // j holds J_k, jp1 holds J_{k+1}
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += j * 2.0;
        }
        let jm1 = j * (2.0 * k as f64) * zi - jp1;
        jp1 = j;
        j = jm1;
        if j.norm() > 1e100 {
            let f = 1e-100;
            j *= f;
            jp1 *= f;
            norm *= f;
            for v in out.iter_mut().skip(k) {
                *v *= f;
            }
        }
    }
    out[0] = j;
    norm += j;
    let inv = norm.inv();
    for v in &mut out {
        *v *= inv;
    }
    out
}

/// `H^(1)_0(z), ..., H^(1)_nmax(z)` by upward recurrence from [`hankel01`].
///
/// Upward recurrence is stable for `H` (the `Y` component dominates). Orders
/// where the sequence overflows are returned as infinities.
pub fn hankel_seq(nmax: usize, z: C) -> Result<Vec<C>, SpecfunError> {
    let pair = hankel01(z)?;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(pair.h0);
    if nmax >= 1 {
        out.push(pair.h1);
    }
    let zi = z.inv();
    for n in 1..nmax {
        let next = out[n] * (2.0 * n as f64) * zi - out[n - 1];
        out.push(next);
    }
    Ok(out)
}

const TABLE_DEGREE: usize = 24;

/// Tabulated `H0(kappa r)`, `H1(kappa r)` for a fixed wavenumber as functions
/// of the real distance `r`.
///
/// For `|kappa r| >= 2` the slowly varying amplitudes `H(kappa r) e^{-i kappa r} sqrt(r)`
/// are stored as Chebyshev expansions on dyadic intervals in `r`; below that
/// the ascending series is used and beyond `r_max` the direct evaluation.
/// Agreement with [`hankel01`] is ~1e-14 relative.
#[derive(Debug, Clone)]
pub struct HankelTable {
    kappa: C,
    r0: f64,
    r_max: f64,
    // per interval: TABLE_DEGREE coefficients for h0 then h1
    coeffs: Vec<[C; 2 * TABLE_DEGREE]>,
}

impl HankelTable {
    pub fn new(kappa: C, r_max: f64) -> Result<Self, SpecfunError> {
        if !(kappa.re >= 0.0 && kappa.im >= 0.0) || kappa.norm() == 0.0 {
            return Err(SpecfunError::Domain(kappa));
        }
        let r0 = CROSSOVER / kappa.norm();
        let mut coeffs = Vec::new();
        let mut lo = r0;
        let nodes: Vec<f64> = (0..TABLE_DEGREE)
            .map(|j| (PI * (j as f64 + 0.5) / TABLE_DEGREE as f64).cos())
            .collect();
        while lo < r_max {
            let hi = 2.0 * lo;
            let mut vals0 = [C::new(0.0, 0.0); TABLE_DEGREE];
            let mut vals1 = vals0;
            for (j, &x) in nodes.iter().enumerate() {
                let r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                let h = hankel01(kappa * r)?;
                let phase = (C::new(0.0, -1.0) * kappa * r).exp() * r.sqrt();
                vals0[j] = h.h0 * phase;
                vals1[j] = h.h1 * phase;
            }
            let mut c = [C::new(0.0, 0.0); 2 * TABLE_DEGREE];
            for k in 0..TABLE_DEGREE {
                let mut a0 = C::new(0.0, 0.0);
                let mut a1 = a0;
                for j in 0..TABLE_DEGREE {
                    let t = (PI * k as f64 * (j as f64 + 0.5) / TABLE_DEGREE as f64).cos();
                    a0 += vals0[j] * t;
                    a1 += vals1[j] * t;
                }
                let scale = if k == 0 { 1.0 } else { 2.0 } / TABLE_DEGREE as f64;
                c[k] = a0 * scale;
                c[TABLE_DEGREE + k] = a1 * scale;
            }
            coeffs.push(c);
            lo = hi;
        }
        Ok(Self { kappa, r0, r_max, coeffs })
    }

    pub fn kappa(&self) -> C {
        self.kappa
    }

    /// `H0(kappa r)`, `H1(kappa r)` for `r > 0`.
    #[inline]
    pub fn eval(&self, r: f64) -> HankelPair {
        if r < self.r0 {
            let z = self.kappa * r;
            let (k0, k1) = bessel_k01_series(C::new(z.im, -z.re));
            return from_k(k0, k1);
        }
        let q = r / self.r0;
        // floor(log2 q) from the exponent bits
        let idx = ((q.to_bits() >> 52) & 0x7ff) as usize - 1023;
        if idx >= self.coeffs.len() || r > self.r_max {
            return hankel01_unchecked(self.kappa * r);
        }
        let lo = self.r0 * (1u64 << idx) as f64;
        let x = (r - lo) / lo * 2.0 - 1.0;
        let c = &self.coeffs[idx];
        let (a0, a1) = clenshaw2(c, x);
        let phase = C::new(-self.kappa.im * r, self.kappa.re * r).exp() / r.sqrt();
        HankelPair { h0: a0 * phase, h1: a1 * phase }
    }
}

#[inline]
fn clenshaw2(c: &[C; 2 * TABLE_DEGREE], x: f64) -> (C, C) {
    let zero = C::new(0.0, 0.0);
    let (mut b1, mut b2, mut d1, mut d2) = (zero, zero, zero, zero);
    let x2 = 2.0 * x;
    for k in (1..TABLE_DEGREE).rev() {
        let b = b1 * x2 - b2 + c[k];
        b2 = b1;
        b1 = b;
        let d = d1 * x2 - d2 + c[TABLE_DEGREE + k];
        d2 = d1;
        d1 = d;
    }
    (b1 * x - b2 + c[0], d1 * x - d2 + c[TABLE_DEGREE])
}
