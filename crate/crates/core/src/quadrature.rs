//! Quadrature rules shared by the boundary solver, the contour corrections
//! and the reference oracles.
//!
//! * Gauss-Legendre nodes and weights on `[-1, 1]`.
//! * Product-integration weights for `ln|t - s|` against the Lagrange basis of
//!   a Gauss-Legendre panel (used for the self-interaction of log-singular
//!   layer potential kernels).
//! * An adaptive Gauss-Kronrod (7/15) integrator for complex integrands.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.nodes.iter().map(|t| mid + half * t).collect();
        let w = self.weights.iter().map(|w| half * w).collect();
        (x, w)
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// All Legendre polynomials `P_0..=P_n` at `x`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 1..n {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p
}

/// Lagrange basis polynomials of the nodes `xs`, evaluated at `t`.
///
/// Uses the barycentric form; `t` coinciding with a node returns the unit
/// vector for that node.
pub fn lagrange_basis(xs: &[f64], bary: &[f64], t: f64) -> Vec<f64> {
    let mut out = vec![0.0; xs.len()];
    for (j, &x) in xs.iter().enumerate() {
        if t == x {
            out[j] = 1.0;
            return out;
        }
    }
    let mut denom = 0.0;
    for j in 0..xs.len() {
        let v = bary[j] / (t - xs[j]);
        out[j] = v;
        denom += v;
    }
    for v in &mut out {
        *v /= denom;
    }
    out
}

/// Barycentric weights for the nodes `xs`.
pub fn barycentric_weights(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|j| {
            let p: f64 = (0..xs.len())
                .filter(|&k| k != j)
                .map(|k| xs[j] - xs[k])
                .product();
            1.0 / p
        })
        .collect()
}

/// Legendre functions of the second kind `Q_0..=Q_n` on the cut `(-1, 1)`.
fn legendre_q_all(n: usize, s: f64) -> Vec<f64> {
    let mut q = Vec::with_capacity(n + 1);
    q.push(0.5 * ((1.0 + s) / (1.0 - s)).ln());
    if n >= 1 {
        q.push(s * q[0] - 1.0);
    }
    for k in 1..n {
        let kf = k as f64;
        q.push(((2.0 * kf + 1.0) * s * q[k] - kf * q[k - 1]) / (kf + 1.0));
    }
    q
}

/// `∫_{-1}^{1} ln|t - s| P_k(t) dt` for `k = 0..=n`, `s` strictly inside `(-1, 1)`.
pub fn log_legendre_moments(n: usize, s: f64) -> Vec<f64> {
    let q = legendre_q_all(n + 1, s);
    let mut m = Vec::with_capacity(n + 1);
    m.push((1.0 - s) * (1.0 - s).ln() + (1.0 + s) * (1.0 + s).ln() - 2.0);
    for k in 1..=n {
        m.push(2.0 / (2.0 * k as f64 + 1.0) * (q[k + 1] - q[k - 1]));
    }
    m
}

/// Weights `W_j(s)` with `Σ_j W_j(s) f(t_j) = ∫_{-1}^{1} ln|t - s| f(t) dt`
/// exactly whenever `f` is a polynomial of degree below the rule size.
pub fn log_product_weights(rule: &GaussLegendre, s: f64) -> Vec<f64> {
    let n = rule.len();
    let moments = log_legendre_moments(n - 1, s);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let p = legendre_all(n - 1, t);
            (0..n)
                .map(|k| (2.0 * k as f64 + 1.0) * 0.5 * w * p[k] * moments[k])
                .sum()
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("adaptive quadrature did not converge: estimate {estimate}, error bound {error_bound:.3e} after {evaluations} evaluations")]
pub struct QuadratureError {
    pub estimate: Complex64,
    pub error_bound: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod 7/15 quadrature of a complex integrand.
///
/// The interval is first split into `initial_panels` equal pieces; the piece
/// with the largest error estimate is bisected until the summed estimate drops
/// below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_evaluations: usize,
) -> Result<Complex64, QuadratureError> {
    let panels = initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * panels);
    let mut evaluations = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let width = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels { b } else { lo + width };
        let (value, err) = gk15(&mut f, lo, hi);
        evaluations += 15;
        total += value;
        total_err += err;
        heap.push(Segment { a: lo, b: hi, value, err });
    }
    loop {
        if total_err <= abs_tol.max(rel_tol * total.norm()) {
            // the running sums can lose everything to cancellation; confirm
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum();
            if total_err <= abs_tol.max(rel_tol * total.norm()) {
                return Ok(total);
            }
        }
        if evaluations >= max_evaluations {
            return Err(QuadratureError { estimate: total, error_bound: total_err, evaluations });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(QuadratureError { estimate: total, error_bound: total_err, evaluations });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
        // Re-sum occasionally so that cancellation in the running error does
        // not drift below zero.
        if evaluations % 3000 < 30 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
}
