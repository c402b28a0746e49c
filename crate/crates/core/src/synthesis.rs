//! From equispaced frequency samples to time values: Fourier coefficients,
//! the truncated (damped) sinc expansion, the Gauss-Legendre baseline,
//! adaptive truncation and a dense-quadrature reference.
//!
//! For a band `[W1, W1 + P]` and samples `U(W1 + P l/(2m+1) + i delta)`,
//!
//! ```text
//! c_j  = 1/(2m+1) sum_l U_l e^{-2 pi i j l/(2m+1)}
//! u(t) = P/(2 pi) e^{-i t (P/2 + W1)} e^{delta t} sum_{j=1}^{m} (-1)^j c_j sinc(P t/(2 pi) - j)
//! ```
//!
//! with `sinc(x) = sin(pi x)/(pi x)`. At `t = 2 pi j/P` the sum collapses to
//! `u = P/(2 pi) e^{-2 pi i j W1/P} e^{delta t} c_j`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::incident::Band;
use crate::quadrature::{integrate_adaptive, QuadratureError};

type C = Complex64;

/// Largest admissible `delta * t` in the damping factor `e^{delta t}`.
pub const MAX_DAMPING_EXPONENT: f64 = 600.0;

pub const NORMALIZATION: &str = "c_j = DFT/(2m+1); u = P/(2pi) e^{-it(P/2+W1)} e^{delta t} sum (-1)^j c_j sinc(Pt/2pi - j)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("delta * t = {exponent:.1} exceeds {MAX_DAMPING_EXPONENT}; choose delta below the delta limit for this horizon")]
    Overflow { exponent: f64 },
    #[error("sample matrix has {got} columns, expected {expected}")]
    Shape { got: usize, expected: usize },
    #[error("non-finite input at target {target}, column {column}")]
    NonFinite { target: usize, column: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Samples `U(x_k, omega_l + i delta)` on the `2m + 1` point grid, one row per target.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyField {
    pub band: Band,
    pub m: usize,
    pub delta: f64,
    pub rows: Vec<Vec<C>>,
}

impl FrequencyField {
    pub fn new(band: Band, m: usize, delta: f64, rows: Vec<Vec<C>>) -> Result<Self, SynthesisError> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != 2 * m + 1 {
                return Err(SynthesisError::Shape { got: row.len(), expected: 2 * m + 1 });
            }
            if let Some(col) = row.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(SynthesisError::NonFinite { target: k, column: col });
            }
        }
        Ok(Self { band, m, delta, rows })
    }
}

/// Coefficients `c_j`, `j = -m..=m`, per target (`row[j + m]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SincExpansion {
    pub band: Band,
    pub m: usize,
    pub delta: f64,
    pub coeffs: Vec<Vec<C>>,
    pub normalization: &'static str,
}

impl SincExpansion {
    pub fn coefficient(&self, target: usize, j: i64) -> C {
        self.coeffs[target][(j + self.m as i64) as usize]
    }

    /// `max_{j <= 0} |c_j| / max_j |c_j|` per target; small for causal fields.
    pub fn causality_ratio(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|row| {
                let all = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let neg = row[..=self.m].iter().map(|c| c.norm()).fold(0.0, f64::max);
                if all == 0.0 {
                    0.0
                } else {
                    neg / all
                }
            })
            .collect()
    }

    /// `max_{j > 0.9 m} |c_j| / max_j |c_j|` over all targets.
    pub fn tail_ratio(&self) -> f64 {
        let cut = ((0.9 * self.m as f64).floor() as usize) + 1;
        self.coeffs
            .iter()
            .map(|row| {
                let all = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let tail = row[self.m + cut.min(self.m)..].iter().map(|c| c.norm()).fold(0.0, f64::max);
                if all == 0.0 {
                    0.0
                } else {
                    tail / all
                }
            })
            .fold(0.0, f64::max)
    }
}

/// DFT of each row, `O(m log m)` per target.
pub fn coeffs_from_samples(field: &FrequencyField) -> SincExpansion {
    let n = 2 * field.m + 1;
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    let m = field.m;
    let coeffs = field
        .rows
        .iter()
        .map(|row| {
            let mut buf = row.clone();
            fft.process(&mut buf);
            let scale = 1.0 / n as f64;
            (0..n)
                .map(|k| {
                    // position k holds j = k - m, stored at DFT index (j mod n)
                    let j = k as i64 - m as i64;
                    buf[j.rem_euclid(n as i64) as usize] * scale
                })
                .collect()
        })
        .collect();
    SincExpansion { band: field.band, m, delta: field.delta, coeffs, normalization: NORMALIZATION }
}

/// `sum_{j=1}^{m} (-1)^j c_j sinc(a - j)` with `c_j = row[m + j]`.
fn sinc_sum(row: &[C], m: usize, a: f64) -> C {
    // nearest integer keeps |f| <= 1/2, so sin(pi f) stays accurate next to a sample
    let k = a.round();
    let f = a - k;
    let ki = k as i64;
    let sign = if ki.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if f == 0.0 {
        // sample point: only j = k survives
        return if ki >= 1 && ki as usize <= m { row[m + ki as usize] * sign } else { C::new(0.0, 0.0) };
    }
    // (-1)^j sinc(a - j) = (-1)^k sin(pi f) / (pi (a - j))
    let mut acc = C::new(0.0, 0.0);
    for j in 1..=m {
        acc += row[m + j] / (a - j as f64);
    }
    acc * (sign * (PI * f).sin() / PI)
}

/// Truncated damped sinc expansion at the given times, one row per target.
///
/// Direct `O(times x m)` summation per target; a fast sinc transform would
/// replace [`sinc_sum`] without changing this contract.
pub fn sinc_synthesize(exp: &SincExpansion, times: &[f64]) -> Result<Vec<Vec<C>>, SynthesisError> {
    let tmax = times.iter().cloned().fold(0.0, f64::max);
    let exponent = exp.delta * tmax;
    if exponent > MAX_DAMPING_EXPONENT {
        return Err(SynthesisError::Overflow { exponent });
    }
    let p = exp.band.width();
    let prefactors: Vec<(f64, C)> = times
        .iter()
        .map(|&t| {
            let pre = C::new(exp.delta * t, -t * (0.5 * p + exp.band.w1)).exp() * (p / (2.0 * PI));
            (p * t / (2.0 * PI), pre)
        })
        .collect();
    Ok(exp
        .coeffs
        .iter()
        .map(|row| prefactors.iter().map(|&(a, pre)| pre * sinc_sum(row, exp.m, a)).collect())
        .collect())
}

/// Gauss-Legendre quadrature of the inverse transform, the type-III
/// nonuniform sum `1/(2 pi) sum_l eta_l U_l e^{-i omega_l t}` evaluated directly.
pub fn gl_synthesis(values: &[Vec<C>], weights: &[f64], nodes: &[f64], times: &[f64]) -> Vec<Vec<C>> {
    values
        .iter()
        .map(|row| {
            times
                .iter()
                .map(|&t| {
                    row.iter()
                        .zip(weights.iter().zip(nodes))
                        .map(|(u, (w, om))| u * C::from_polar(*w, -om * t))
                        .sum::<C>()
                        / (2.0 * PI)
                })
                .collect()
        })
        .collect()
}

/// Outcome of adaptive truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveExpansion {
    pub expansion: SincExpansion,
    pub resolved: bool,
    /// Every `m` that was sampled, in order.
    pub history: Vec<usize>,
}

/// Doubles `m` from 64 (capped at `m_max`) until the coefficient tail
/// `max_{j > 0.9m} |c_j|` drops below `eps_chop * max |c_j|`.
///
/// The `2m + 1` grids do not nest, so every step re-samples the field.
pub fn adaptive_m<E>(
    mut sampler: impl FnMut(usize) -> Result<FrequencyField, E>,
    eps_chop: f64,
    m_max: usize,
) -> Result<AdaptiveExpansion, E> {
    assert!(m_max >= 16, "m_max must be at least 16");
    let mut m = 64.min(m_max);
    let mut history = Vec::new();
    loop {
        history.push(m);
        let expansion = coeffs_from_samples(&sampler(m)?);
        if expansion.tail_ratio() <= eps_chop {
            return Ok(AdaptiveExpansion { expansion, resolved: true, history });
        }
        if m >= m_max {
            return Ok(AdaptiveExpansion { expansion, resolved: false, history });
        }
        m = (2 * m).min(m_max);
    }
}

/// Reference value of `1/(2 pi) int_{w1}^{w2} U(omega) e^{-i omega t} d omega`
/// by adaptive Gauss-Kronrod quadrature with one initial panel per
/// oscillation period. Cost grows linearly with `t`.
pub fn time_oracle(u: impl Fn(f64) -> C, w1: f64, w2: f64, t: f64, tol: f64) -> Result<C, SynthesisError> {
    let panels = ((w2 - w1) * t.abs() / (2.0 * PI)).ceil() as usize + 1;
    let v = integrate_adaptive(|w| u(w) * C::from_polar(1.0, -w * t), w1, w2, panels, 2.0 * PI * tol, 0.0, 50_000_000)?;
    Ok(v / (2.0 * PI))
}

/// The same integral along the shifted line `Im omega = delta`:
/// `1/(2 pi) int_{w1}^{w2} U(omega + i delta) e^{-i (omega + i delta) t} d omega`.
pub fn time_oracle_shifted(u: impl Fn(C) -> C, w1: f64, w2: f64, delta: f64, t: f64, tol: f64) -> Result<C, SynthesisError> {
    let damp = (delta * t).exp();
    let inner = time_oracle(|w| u(C::new(w, delta)), w1, w2, t, tol / damp)?;
    Ok(inner * damp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band() -> Band {
        Band::new(2.0, 10.0).unwrap()
    }

    fn field_from(f: impl Fn(f64) -> C, m: usize) -> FrequencyField {
        let b = band();
        let row = b.grid(m).into_iter().map(f).collect();
        FrequencyField::new(b, m, 0.0, vec![row]).unwrap()
    }

    #[test]
    fn single_mode_gives_single_coefficient() {
        let m = 10;
        let b = band();
        for k in [-3i64, 0, 4, 10] {
            let f = field_from(|w| C::from_polar(1.0, 2.0 * PI * k as f64 * (w - b.w1) / b.width()), m);
            let e = coeffs_from_samples(&f);
            for j in -(m as i64)..=(m as i64) {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((e.coefficient(0, j) - want).norm() < 1e-14, "k={k} j={j}");
            }
        }
        let e = coeffs_from_samples(&field_from(|_| C::new(1.0, 0.0), m));
        assert!((e.coefficient(0, 0) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn sample_point_identity() {
        let m = 6;
        let b = band();
        let row: Vec<C> = (0..2 * m + 1).map(|k| C::new(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let e = SincExpansion { band: b, m, delta: 0.0, coeffs: vec![row.clone()], normalization: NORMALIZATION };
        let times: Vec<f64> = (1..=m).map(|j| 2.0 * PI * j as f64 / b.width()).collect();
        let u = sinc_synthesize(&e, &times).unwrap();
        for j in 1..=m {
            let want = C::from_polar(b.width() / (2.0 * PI), -2.0 * PI * j as f64 * b.w1 / b.width()) * row[m + j];
            assert!((u[0][j - 1] - want).norm() < 1e-13 * want.norm().max(1.0), "j={j}");
        }
    }

    #[test]
    fn zero_coefficients_give_zero() {
        let e = SincExpansion { band: band(), m: 5, delta: 0.01, coeffs: vec![vec![C::new(0.0, 0.0); 11]], normalization: NORMALIZATION };
        assert!(sinc_synthesize(&e, &[0.0, 1.3, 50.0]).unwrap()[0].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn overflow_guard() {
        let e = SincExpansion { band: band(), m: 5, delta: 1.0, coeffs: vec![vec![C::new(0.0, 0.0); 11]], normalization: NORMALIZATION };
        assert!(matches!(sinc_synthesize(&e, &[700.0]), Err(SynthesisError::Overflow { .. })));
    }

    #[test]
    fn oracle_constant_phase() {
        let b = band();
        let t0 = 7.3;
        let v = time_oracle(|w| C::from_polar(1.0, w * t0), b.w1, b.w2, t0, 1e-13).unwrap();
        assert!((v - b.width() / (2.0 * PI)).norm() < 1e-12);
        assert_eq!(time_oracle(|_| C::new(0.0, 0.0), b.w1, b.w2, 3.0, 1e-12).unwrap(), C::new(0.0, 0.0));
    }

    #[test]
    fn adaptive_stops_on_finite_bandwidth() {
        let b = band();
        let k = 100;
        let sampler = |m: usize| -> Result<FrequencyField, ()> {
            let rows = vec![b
                .grid(m)
                .into_iter()
                .map(|w| {
                    let y = (w - b.w1) / b.width();
                    (1..=k).map(|j| C::from_polar(1.0 / j as f64, 2.0 * PI * j as f64 * y)).sum()
                })
                .collect()];
            Ok(FrequencyField::new(b, m, 0.0, rows).unwrap())
        };
        let r = adaptive_m(sampler, 1e-12, 4096).unwrap();
        assert!(r.resolved);
        assert!(r.expansion.m >= k && r.expansion.m <= 2 * k, "{}", r.expansion.m);
        let r = adaptive_m(sampler, 0.5, 4096).unwrap();
        assert_eq!(r.history, vec![64]);
    }
}
