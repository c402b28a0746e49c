//! Acceptance criteria 1-9. Each criterion prints one PASS/FAIL line; the
//! individual measurements are listed underneath. Bounds are pinned here and
//! re-applied to the measured values, independently of the bounds the
//! validation module reports.

use std::io::Write;

use tfwave_core::validation::{
    contour_identity, damped_beats_undamped, delta_limits, disk_pipeline, disk_scattering, hankel_oracle, interior_source,
    surrogate_synthesis, windowed_rational, Bound, Check,
};

use Bound::{AtLeast, AtMost};

/// (criterion, check name, bound, tolerance)
const PINNED: &[(u8, &str, Bound, f64)] = &[
    (1, "hankel01 vs extended precision", AtMost, 1e-12),
    (2, "disk kappa = 5 vs series", AtMost, 1e-8),
    (2, "disk kappa = 5 + 0.02i vs series", AtMost, 1e-8),
    (3, "keyhole interior source", AtMost, 1e-6),
    (3, "keyhole probe clearance", AtLeast, 0.5),
    (4, "contour identity, delta = 0.02", AtMost, 1e-8),
    (4, "delta independence 0.01 vs 0.02", AtMost, 1e-8),
    (4, "damped sinc vs shifted-line quadrature", AtMost, 1e-10),
    (4, "sinc + corrections vs undamped quadrature", AtMost, 1e-8),
    (5, "|delta_limit(200) - 0.0237|", AtMost, 1e-3),
    (5, "|delta_limit(500) - 0.0095|", AtMost, 1e-3),
    (6, "surrogate sinc synthesis", AtMost, 1e-10),
    (6, "Gauss-Legendre (50 nodes) late-time error", AtLeast, 0.1),
    (6, "sinc late-time error", AtMost, 1e-8),
    (7, "damped error at largest m", AtMost, 1e-5),
    (7, "undamped m / damped m reaching 1e-5", AtLeast, 2.0),
    (7, "undamped error growth between sweep steps", AtMost, 1.0),
    (7, "ordering violations GL >= sinc >= damped", AtMost, 0.0),
    (8, "disk run flags", AtMost, 0.0),
    (8, "disk probes vs series + quadrature", AtMost, 1e-6),
    (8, "pre-arrival magnitude / peak", AtMost, 1e-4),
    (8, "post-peak growth factor at far probe", AtMost, 3.0),
    (8, "far probe level after arrival + 10 sigma", AtMost, 1e-7),
    (8, "damped vs undamped disk run", AtMost, 1e-7),
    (9, "assembly audit, undamped", AtMost, 1e-12),
    (9, "undamped corrections", AtMost, 0.0),
    (9, "assembly audit, damped", AtMost, 1e-12),
    (9, "bytes differing between 1 and 3 workers", AtMost, 0.0),
];

/// Wall-clock limit per criterion in seconds (criterion 5 is instantaneous).
const RUNTIME: &[(u8, f64)] = &[(1, 10.0), (2, 30.0), (3, 300.0), (4, 60.0), (5, 1.0), (6, 30.0), (7, 1800.0), (8, 600.0), (9, 600.0)];

fn judge(bound: Bound, tolerance: f64, measured: f64) -> bool {
    match bound {
        AtMost => measured <= tolerance,
        AtLeast => measured >= tolerance,
    }
}

#[test]
fn acceptance_criteria() {
    let mut checks: Vec<Check> = vec![hankel_oracle()];
    checks.extend(disk_scattering());
    checks.extend(interior_source());
    checks.extend(contour_identity());
    checks.extend(windowed_rational());
    checks.extend(delta_limits());
    checks.extend(surrogate_synthesis());
    checks.extend(damped_beats_undamped());
    checks.extend(disk_pipeline());

    let mut all_pass = true;
    for &(criterion, limit) in RUNTIME {
        let mine: Vec<&Check> = checks.iter().filter(|c| c.criterion == criterion && !c.name.ends_with("[s]")).collect();
        let mut lines = Vec::new();
        let mut pass = !mine.is_empty();
        for &(crit, name, bound, tol) in PINNED.iter().filter(|p| p.0 == criterion) {
            match mine.iter().find(|c| c.name == name) {
                Some(c) => {
                    let ok = judge(bound, tol, c.measured) && c.measured.is_finite() || (bound == AtLeast && c.measured == f64::INFINITY);
                    pass &= ok;
                    let op = if bound == AtMost { "<=" } else { ">=" };
                    lines.push(format!("    {} {name}: {:.3e} {op} {tol:.1e}  {}", if ok { "ok  " } else { "FAIL" }, c.measured, c.detail));
                }
                None => {
                    pass = false;
                    lines.push(format!("    FAIL {name}: not measured (criterion {crit})"));
                }
            }
        }
        let seconds: f64 = mine.iter().map(|c| c.seconds).sum();
        let in_time = seconds <= limit;
        pass &= in_time;
        lines.push(format!("    {} runtime {seconds:.1} s <= {limit} s", if in_time { "ok  " } else { "FAIL" }));
        // written past the test harness capture so the table shows up in normal runs
        let mut out = std::io::stdout().lock();
        writeln!(out, "{} criterion {criterion}", if pass { "PASS" } else { "FAIL" }).unwrap();
        for l in lines {
            writeln!(out, "{l}").unwrap();
        }
        all_pass &= pass;
    }
    assert!(all_pass, "at least one acceptance criterion failed");
}
