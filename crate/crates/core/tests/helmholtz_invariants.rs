use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfwave_core::geometry::{build_scatterer, discretize, disk, DiscretizedBoundary, ScattererParams};
use tfwave_core::helmholtz::{
    assemble_cfie, disk_series_reference, evaluate_field, evaluate_field_with, point_source, BoundaryPlan, ComplexFrequency, DirectSummation,
    TargetPlan, DEFAULT_H_SAFE,
};

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

fn plane_wave(bdy: &DiscretizedBoundary, kappa: C) -> Vec<C> {
    bdy.points.iter().map(|p| -(C::new(0.0, 1.0) * kappa * p.z.re).exp()).collect()
}

#[test]
fn factorization_reproduces_products() {
    let bdy = discretize(&disk(1.0, C::new(0.0, 0.0)).unwrap(), 16, 12, 0).unwrap();
    let plan = BoundaryPlan::new(&bdy);
    let freq = ComplexFrequency::new(1.0, 0.0, 1.0).unwrap();
    let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let x: Vec<C> = (0..bdy.len()).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let ax = a.apply(&x);
        let back = a.solve_density(&ax).unwrap();
        let num: f64 = back.values.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-12, "{:.3e}", num / den);
    }
}

/// Evaluating with half the coupling used in the solve must visibly break the
/// boundary condition, so the consistency requirement is not vacuous.
#[test]
fn coupling_mismatch_is_detected() {
    let bdy = discretize(&disk(1.0, C::new(0.0, 0.0)).unwrap(), 16, 16, 0).unwrap();
    let plan = BoundaryPlan::new(&bdy);
    let freq = ComplexFrequency::new(5.0, 0.0, 1.0).unwrap();
    let eta = freq.default_coupling();
    let a = assemble_cfie(&bdy, &plan, freq, eta).unwrap();
    let phi = a.solve_density(&plane_wave(&bdy, freq.kappa())).unwrap();
    let targets: Vec<C> = (0..12).map(|k| C::from_polar(1.01, 2.0 * PI * k as f64 / 12.0 + 0.2)).collect();
    let tplan = TargetPlan::new(&bdy, &targets, DEFAULT_H_SAFE);
    let exact = disk_series_reference(1.0, freq, C::new(1.0, 0.0), &targets).unwrap();
    let worst = |u: Vec<Option<C>>| u.iter().zip(&exact).map(|(v, e)| rel(v.unwrap(), *e)).fold(0.0, f64::max);
    let matched = worst(evaluate_field(&bdy, &tplan, &phi).unwrap());
    let mismatched = worst(evaluate_field_with(&bdy, &tplan, &phi, 0.5 * eta, &DirectSummation).unwrap());
    assert!(matched < 1e-9, "matched {matched:.3e}");
    assert!(mismatched > 1e-3, "mismatched {mismatched:.3e}");
}

#[test]
fn damped_disk_solves_are_well_posed() {
    let bdy = discretize(&disk(1.0, C::new(0.0, 0.0)).unwrap(), 16, 16, 0).unwrap();
    let plan = BoundaryPlan::new(&bdy);
    let x = [C::new(-3.0, 0.4)];
    let tplan = TargetPlan::new(&bdy, &x, DEFAULT_H_SAFE);
    for omega in [1.0, 4.0, 9.0] {
        let solve = |delta| {
            let freq = ComplexFrequency::new(omega, delta, 1.0).unwrap();
            let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
            let phi = a.solve_density(&plane_wave(&bdy, freq.kappa())).unwrap();
            (evaluate_field(&bdy, &tplan, &phi).unwrap()[0].unwrap(), phi.residual)
        };
        let (_, r0) = solve(0.0);
        for delta in [0.01, 0.05, 0.1] {
            let (u, r) = solve(delta);
            assert!(u.re.is_finite() && u.im.is_finite());
            // both residuals sit at roundoff, so compare against a roundoff-sized floor
            assert!(r <= 10.0 * r0.max(1e-15), "omega {omega}, delta {delta}: {r:.2e} vs {r0:.2e}");
        }
    }
}

/// Keyhole at kappa = 4: the change under doubling the base panels is a
/// faithful estimate of the actual error at far probes.
#[test]
fn keyhole_self_convergence_estimates_error() {
    let curve = build_scatterer("keyhole", &ScattererParams::new()).unwrap();
    let freq = ComplexFrequency::new(4.0, 0.0, 1.0).unwrap();
    let src = C::new(2.5, 0.3);
    let targets: Vec<C> = (0..8).map(|k| C::from_polar(6.0, 2.0 * PI * k as f64 / 8.0)).collect();
    let field = |panels| {
        let bdy = discretize(&curve, 16, panels, 12).unwrap();
        let plan = BoundaryPlan::new(&bdy);
        let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
        let rhs: Vec<C> = bdy.points.iter().map(|p| point_source(freq.kappa(), src, p.z).unwrap()).collect();
        let phi = a.solve_density(&rhs).unwrap();
        evaluate_field(&bdy, &TargetPlan::new(&bdy, &targets, DEFAULT_H_SAFE), &phi).unwrap()
    };
    let (coarse, fine) = (field(10), field(20));
    for (k, x) in targets.iter().enumerate() {
        let exact = point_source(freq.kappa(), src, *x).unwrap();
        let (c, f) = (coarse[k].unwrap(), fine[k].unwrap());
        let estimate = (c - f).norm();
        let actual = (c - exact).norm();
        assert!(actual <= 10.0 * estimate + 1e-13 * exact.norm(), "{x}: actual {actual:.2e}, estimate {estimate:.2e}");
        assert!(rel(f, exact) < 1e-6, "{x}: fine error {:.2e}", rel(f, exact));
    }
}
