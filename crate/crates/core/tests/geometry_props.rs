use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use tfwave_core::geometry::{build_scatterer, discretize, discretize_with_resolution, disk, BoundaryCurve, Membership, MembershipTester, ScattererParams};

fn gallery(name: &str) -> BoundaryCurve {
    build_scatterer(name, &ScattererParams::new()).unwrap()
}

/// Even-odd parity of a point against a closed polyline sampling.
fn polyline_inside(curve: &BoundaryCurve, points: usize, z: C) -> bool {
    let mut inside = false;
    for comp in curve.polyline(points) {
        let n = comp.len();
        for k in 0..n {
            let a = comp[k];
            let b = comp[(k + 1) % n];
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if x > z.re {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

#[test]
fn membership_examples() {
    let unit = gallery("disk");
    assert_eq!(unit.contains(C::new(0.0, 0.0)), Membership::Inside);
    assert_eq!(unit.contains(C::new(2.0, 0.0)), Membership::Outside);
    assert_eq!(unit.contains(C::new(1.0, 0.0)), Membership::Indeterminate);
    // the keyhole cavity belongs to the exterior domain
    assert_eq!(gallery("keyhole").contains(C::new(0.0, 0.0)), Membership::Outside);
}

#[test]
fn c_curve_arclength_converges_spectrally() {
    let curve = gallery("c_curve");
    let exact = curve.arclength();
    // a coarse layout, so that 16 nodes are still above roundoff
    for base in [16, 24] {
        let err = |nodes| (discretize_with_resolution(&curve, nodes, base, 0, 1e-5).unwrap().total_weight() - exact).abs();
        let (e8, e16) = (err(8), err(16));
        println!("{base} panels: 8 nodes {e8:.3e}, 16 nodes {e16:.3e}");
        assert!(e8 / e16.max(1e-300) >= 1e4, "{base} panels: 8 nodes {e8:.3e}, 16 nodes {e16:.3e}");
    }
    for nodes in [8, 16] {
        let e = (discretize(&curve, nodes, 24, 0).unwrap().total_weight() - exact).abs() / exact;
        assert!(e < 1e-11, "default layout, {nodes} nodes: {e:.3e}");
    }
}

#[test]
fn gallery_polylines_approach_arclength() {
    for (name, _) in tfwave_core::geometry::GALLERY {
        let curve = gallery(name);
        let exact = curve.arclength();
        let chord = |n| -> f64 {
            curve
                .polyline(n)
                .iter()
                .map(|c| (0..c.len()).map(|k| (c[(k + 1) % c.len()] - c[k]).norm()).sum::<f64>())
                .sum()
        };
        let (coarse, fine) = (chord(512), chord(4096));
        assert!(coarse <= fine + 1e-12 && fine <= exact + 1e-12, "{name}");
        assert!((exact - fine) / exact < 1e-4, "{name}: {fine} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn disk_arclength_and_membership(r in 0.1f64..10.0, cx in -5.0f64..5.0, cy in -5.0f64..5.0, th in 0.0f64..(2.0 * PI), s in 0.0f64..0.98) {
        let c = C::new(cx, cy);
        let curve = disk(r, c).unwrap();
        prop_assert!((curve.arclength() - 2.0 * PI * r).abs() <= 1e-12 * r);
        let inner = c + C::from_polar(s * r, th);
        let outer = c + C::from_polar((1.02 + s) * r, th);
        prop_assert_eq!(curve.contains(inner), Membership::Inside);
        prop_assert_eq!(curve.contains(outer), Membership::Outside);
    }

    #[test]
    fn disk_normals_point_away_from_centroid(r in 0.1f64..10.0, cx in -5.0f64..5.0, cy in -5.0f64..5.0, panels in 3usize..20, nodes in 4usize..20) {
        let c = C::new(cx, cy);
        let bdy = discretize(&disk(r, c).unwrap(), nodes, panels, 0).unwrap();
        for p in &bdy.points {
            prop_assert!((p.normal.conj() * (p.z - c)).re > 0.0);
            prop_assert!((p.normal.norm() - 1.0).abs() < 1e-14);
        }
        prop_assert!((bdy.total_weight() - 2.0 * PI * r).abs() < 1e-10 * r);
    }

    #[test]
    fn membership_parity_is_stable_under_refinement(which in 0usize..5, u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let (name, _) = tfwave_core::geometry::GALLERY[which];
        let curve = gallery(name);
        let tester = MembershipTester::new(&curve);
        let pts: Vec<C> = curve.polyline(256).into_iter().flatten().collect();
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in &pts {
            lo = C::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = C::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.6 * (hi - lo);
        let z = mid + C::new(u * half.re, v * half.im);
        let d = tester.distance(z);
        // both polylines are within 1e-3 of the curve at these densities
        prop_assume!(d > 0.05);
        let coarse = polyline_inside(&curve, 4096, z);
        let fine = polyline_inside(&curve, 16384, z);
        prop_assert_eq!(coarse, fine);
        let expected = if fine { Membership::Inside } else { Membership::Outside };
        prop_assert_eq!(tester.classify(z), expected);
    }
}
