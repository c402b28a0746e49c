use num_complex::Complex64;
use tfwave_core::specfun::hankel01;

const ORACLE: &str = include_str!("../data/hankel_oracle.csv");

fn rows() -> Vec<[f64; 6]> {
    ORACLE
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3], v[4], v[5]]
        })
        .collect()
}

#[test]
fn hankel_matches_extended_precision_oracle() {
    let rows = rows();
    assert_eq!(rows.len(), 500);
    let mut worst = 0.0f64;
    for r in &rows {
        let z = Complex64::new(r[0], r[1]);
        let h = hankel01(z).unwrap();
        let e0 = (h.h0 - Complex64::new(r[2], r[3])).norm() / Complex64::new(r[2], r[3]).norm();
        let e1 = (h.h1 - Complex64::new(r[4], r[5])).norm() / Complex64::new(r[4], r[5]).norm();
        worst = worst.max(e0).max(e1);
        assert!(e0 <= 1e-12 && e1 <= 1e-12, "z = {z}: errors {e0:.2e} {e1:.2e}");
    }
    println!("worst relative error {worst:.3e}");
}

#[test]
fn real_axis_imaginary_part_is_y0() {
    for r in rows().iter().filter(|r| r[1] == 0.0) {
        let h = hankel01(Complex64::new(r[0], 0.0)).unwrap();
        assert!((h.h0.im - r[3]).abs() <= 1e-12 * r[3].abs().max(r[2].abs()));
    }
}
