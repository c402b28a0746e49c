//! Deformation of the frequency integral onto `Im omega = delta` and the two
//! short vertical corrections at the band edges.
//!
//! Over the rectangle with corners `W1, W2, W2 + i delta, W1 + i delta`,
//!
//! ```text
//! I0 = I_delta - I_cR - I_cL
//! I_cR =  i e^{-i W2 t} int_0^delta U(W2 + i v) e^{v t} dv
//! I_cL = -i e^{-i W1 t} int_0^delta U(W1 + i v) e^{v t} dv
//! ```
//!
//! where `I0` and `I_delta` are the integrals of `U(omega) e^{-i omega t}`
//! along the real segment and the shifted segment.

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::GaussLegendre;

type C = Complex64;

pub const MIN_CORRECTION_NODES: usize = 20;
pub const MAX_CORRECTION_NODES: usize = 150;
pub const MAX_DEFAULT_DELTA: f64 = 0.025;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("delta = {delta} exceeds the limit {limit} for horizon {horizon}")]
    DeltaTooLarge { delta: f64, limit: f64, horizon: f64 },
    #[error("delta must be non-negative and finite, got {0}")]
    InvalidDelta(f64),
    #[error("expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite sample at correction node {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `1024 ln 2 / (150 T)`: largest `delta` for which `e^{delta t}` stays far from overflow on `[0, T]`.
pub fn delta_limit(horizon: f64) -> Result<f64, ContourError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(ContourError::InvalidHorizon(horizon));
    }
    Ok(1024.0 * std::f64::consts::LN_2 / (150.0 * horizon))
}

/// `min(0.8 L(T), 0.025)`.
pub fn default_delta(horizon: f64) -> Result<f64, ContourError> {
    Ok((0.8 * delta_limit(horizon)?).min(MAX_DEFAULT_DELTA))
}

/// `clamp(20 + ceil(2 delta T), 20, 150)`.
pub fn correction_node_count(delta: f64, horizon: f64) -> Result<usize, ContourError> {
    let limit = delta_limit(horizon)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(ContourError::InvalidDelta(delta));
    }
    if delta > limit * (1.0 + 1e-12) {
        return Err(ContourError::DeltaTooLarge { delta, limit, horizon });
    }
    let n = MIN_CORRECTION_NODES as f64 + (2.0 * delta * horizon).ceil();
    Ok((n as usize).clamp(MIN_CORRECTION_NODES, MAX_CORRECTION_NODES))
}

/// Gauss-Legendre rule on `v in [0, delta]` for one band edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionRule {
    pub side: Side,
    pub edge: f64,
    pub delta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CorrectionRule {
    pub fn new(side: Side, edge: f64, delta: f64, n: usize) -> Self {
        let (nodes, weights) = GaussLegendre::new(n).mapped(0.0, delta);
        Self { side, edge, delta, nodes, weights }
    }

    /// Complex frequencies `edge + i v_q` at which the field must be sampled.
    pub fn frequencies(&self) -> Vec<C> {
        self.nodes.iter().map(|&v| C::new(self.edge, v)).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `+-i e^{-i W t} sum_q mu_q U(W + i v_q) e^{v_q t}` (plus sign on the right edge).
pub fn correction_term(rule: &CorrectionRule, samples: &[C], t: f64) -> Result<C, ContourError> {
    if samples.len() != rule.len() {
        return Err(ContourError::Shape { expected: rule.len(), got: samples.len() });
    }
    let mut acc = C::new(0.0, 0.0);
    for (q, (s, (v, mu))) in samples.iter().zip(rule.nodes.iter().zip(&rule.weights)).enumerate() {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(ContourError::NonFinite(q));
        }
        acc += s * (mu * (v * t).exp());
    }
    let sign = match rule.side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    Ok(C::new(0.0, sign) * C::from_polar(1.0, -rule.edge * t) * acc)
}

/// `I0 = I_delta - I_cR - I_cL`.
pub fn contour_assemble(i_delta: C, i_left: C, i_right: C) -> C {
    i_delta - i_right - i_left
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert!((delta_limit(150.0).unwrap() - 1024.0 * 2f64.ln() / 22500.0).abs() < 1e-16);
        assert!(delta_limit(0.0).is_err());
        assert_eq!(default_delta(10.0).unwrap(), 0.025);
        assert!((default_delta(300.0).unwrap() - 0.8 * delta_limit(300.0).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn node_counts() {
        assert_eq!(correction_node_count(0.0, 100.0).unwrap(), 20);
        let t = 150.0;
        let d = 0.8 * delta_limit(t).unwrap();
        assert_eq!(correction_node_count(d, t).unwrap(), 20 + (2.0 * d * t).ceil() as usize);
        assert!(matches!(correction_node_count(1.0, 150.0), Err(ContourError::DeltaTooLarge { .. })));
        assert!(correction_node_count(-0.1, 150.0).is_err());
        let lim = delta_limit(1e-3).unwrap();
        assert_eq!(correction_node_count(lim, 1e-3).unwrap(), 20 + (2.0 * lim * 1e-3).ceil() as usize);
    }

    #[test]
    fn unit_field_at_time_zero() {
        let d = 0.02;
        for (side, want) in [(Side::Right, C::new(0.0, d)), (Side::Left, C::new(0.0, -d))] {
            let r = CorrectionRule::new(side, 3.0, d, 20);
            let v = correction_term(&r, &vec![C::new(1.0, 0.0); 20], 0.0).unwrap();
            assert!((v - want).norm() < 1e-17);
        }
    }

    #[test]
    fn exponential_moment() {
        let (d, t) = (0.02, 200.0);
        let r = CorrectionRule::new(Side::Right, 5.0, d, correction_node_count(d, t).unwrap());
        let v = correction_term(&r, &vec![C::new(1.0, 0.0); r.len()], t).unwrap();
        let want = C::new(0.0, 1.0) * C::from_polar(1.0, -5.0 * t) * (((d * t).exp() - 1.0) / t);
        assert!((v - want).norm() < 1e-14 * want.norm());
    }

    #[test]
    fn rejects_bad_samples() {
        let r = CorrectionRule::new(Side::Left, 1.0, 0.01, 20);
        assert!(correction_term(&r, &[C::new(1.0, 0.0); 3], 1.0).is_err());
        let mut s = vec![C::new(1.0, 0.0); 20];
        s[7] = C::new(f64::NAN, 0.0);
        assert_eq!(correction_term(&r, &s, 1.0), Err(ContourError::NonFinite(7)));
    }

    #[test]
    fn entire_function_closes() {
        // U = e^{-omega^2/50}: I0 and I_delta by dense Gauss-Legendre, corrections by the rule
        let (w1, w2, d, t) = (3.0, 14.0, 0.02, 50.0);
        let u = |w: C| (-w * w / 50.0).exp();
        let (x, w) = GaussLegendre::new(400).mapped(w1, w2);
        let i0: C = x.iter().zip(&w).map(|(&o, &q)| u(C::new(o, 0.0)) * C::from_polar(q, -o * t)).sum();
        let id: C = x
            .iter()
            .zip(&w)
            .map(|(&o, &q)| {
                let z = C::new(o, d);
                u(z) * (C::new(0.0, -1.0) * z * t).exp() * q
            })
            .sum();
        let n = correction_node_count(d, t).unwrap();
        let rl = CorrectionRule::new(Side::Left, w1, d, n);
        let rr = CorrectionRule::new(Side::Right, w2, d, n);
        let cl = correction_term(&rl, &rl.frequencies().into_iter().map(u).collect::<Vec<_>>(), t).unwrap();
        let cr = correction_term(&rr, &rr.frequencies().into_iter().map(u).collect::<Vec<_>>(), t).unwrap();
        let back = contour_assemble(id, cl, cr);
        assert!((back - i0).norm() < 1e-12 * i0.norm().max(1e-3), "{back} {i0}");
    }
}
