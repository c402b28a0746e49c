use num_complex::Complex64 as C;
use proptest::prelude::*;
use tfwave_core::contour::{contour_assemble, correction_node_count, correction_term, delta_limit, CorrectionRule, Side};
use tfwave_core::quadrature::GaussLegendre;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// `int_{w1}^{w2} f(omega + i delta) e^{-i (omega + i delta) t} d omega` by Gauss-Legendre.
fn line_integral(f: &dyn Fn(C) -> C, w1: f64, w2: f64, delta: f64, t: f64) -> C {
    let (x, w) = GaussLegendre::new(1200).mapped(w1, w2);
    x.iter()
        .zip(&w)
        .map(|(&o, &wt)| {
            let z = C::new(o, delta);
            f(z) * (C::new(0.0, -t) * z).exp() * wt
        })
        .sum()
}

fn assembled(f: &dyn Fn(C) -> C, w1: f64, w2: f64, delta: f64, t: f64, n: usize) -> (C, C, C) {
    let side = |side, edge| {
        let r = CorrectionRule::new(side, edge, delta, n);
        let s: Vec<C> = r.frequencies().into_iter().map(f).collect();
        correction_term(&r, &s, t).unwrap()
    };
    (line_integral(f, w1, w2, delta, t), side(Side::Left, w1), side(Side::Right, w2))
}

proptest! {
    #![proptest_config(config(48))]

    /// `f = e^{i omega a}`, with both line integrals in closed form.
    #[test]
    fn cauchy_identity_exponential(a in -5.0f64..5.0, t in 1.0f64..200.0, w1 in 0.5f64..10.0, p in 1.0f64..12.0, frac in 0.05f64..1.0) {
        let horizon = 200.0;
        let delta = frac * delta_limit(horizon).unwrap();
        let w2 = w1 + p;
        let k = a - t;
        let segment = |d: f64| ((C::new(-k * d, k * w2)).exp() - C::new(-k * d, k * w1).exp()) / C::new(0.0, k);
        let i0 = segment(0.0);
        let i_delta = segment(delta);
        let f = move |z: C| (C::new(0.0, a) * z).exp();
        let n = correction_node_count(delta, horizon).unwrap();
        let (_, left, right) = assembled(&f, w1, w2, delta, t, n);
        let err = (contour_assemble(i_delta, left, right) - i0).norm();
        prop_assert!(err <= 1e-9 * i0.norm().max(1e-3 * p), "err {:.3e}, |I0| {:.3e}", err, i0.norm());
    }

    /// Random polynomials of degree up to 5.
    #[test]
    fn cauchy_identity_polynomial(coeffs in prop::collection::vec(-1.0f64..1.0, 1..7), t in 1.0f64..150.0, frac in 0.05f64..1.0) {
        let horizon = 150.0;
        let delta = frac * delta_limit(horizon).unwrap();
        let (w1, w2) = (2.0, 10.0);
        let c2 = coeffs.clone();
        let f = move |z: C| c2.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * z + c);
        let i0 = line_integral(&f, w1, w2, 0.0, t);
        let n = correction_node_count(delta, horizon).unwrap();
        let (id, l, r) = assembled(&f, w1, w2, delta, t, n);
        let scale = line_integral(&|z: C| f(z).norm().into(), w1, w2, 0.0, 0.0).norm();
        let err = (contour_assemble(id, l, r) - i0).norm();
        prop_assert!(err <= 1e-9 * i0.norm().max(1e-3 * scale), "err {:.3e}, |I0| {:.3e}", err, i0.norm());
    }

    /// `delta T` never exceeds `1024 ln 2 / 150`, so `e^{v t}` stays tiny.
    #[test]
    fn damping_exponent_is_bounded(horizon in 1.0f64..1e4) {
        let d = delta_limit(horizon).unwrap();
        prop_assert!(d * horizon <= 1024.0 * std::f64::consts::LN_2 / 150.0 + 1e-12);
        prop_assert!((d * horizon).exp() < 120.0);
        let n = correction_node_count(d, horizon).unwrap();
        prop_assert!((20..=150).contains(&n));
    }
}

/// Doubling the edge node count changes each correction term by at most 1e-10.
#[test]
fn correction_self_convergence() {
    let pole = C::new(5.0, -0.01);
    let f = |w: C| 1.0 / (w - pole);
    for &(delta, horizon) in &[(0.02, 150.0), (0.0095, 400.0), (0.001, 4000.0)] {
        assert!(delta * horizon <= 4.0);
        let n = correction_node_count(delta, horizon).unwrap();
        for &t in &[1.0, 0.5 * horizon, horizon] {
            for (side, edge) in [(Side::Left, 3.0), (Side::Right, 14.0)] {
                let term = |n| {
                    let r = CorrectionRule::new(side, edge, delta, n);
                    let s: Vec<C> = r.frequencies().into_iter().map(f).collect();
                    correction_term(&r, &s, t).unwrap()
                };
                let (a, b) = (term(n), term(2 * n));
                assert!((a - b).norm() <= 1e-10 * b.norm(), "delta {delta}, t {t}: {a} vs {b}");
            }
        }
    }
}
