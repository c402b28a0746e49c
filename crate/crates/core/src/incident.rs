//! Gaussian incident packet, its Fourier transform and the frequency band
//! it occupies.
//!
//! Time convention: `u(t) = 1/(2 pi) int U(omega) e^{-i omega t} d omega`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IncidentError {
    #[error("invalid packet: {0}")]
    InvalidPacket(String),
    #[error("band epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("band collapsed to [{w1}, {w2}] after clipping at omega_min")]
    EmptyBand { w1: f64, w2: f64 },
}

/// `g(x, t) = A/(sqrt(2 pi) sigma) exp(-((t - s)^2/(2 sigma^2) + i omega0 (t - s)))`
/// with `s(x) = x.z0/c + t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    pub sigma: f64,
    pub omega0: f64,
    pub t0: f64,
    /// Unit propagation direction.
    pub z0: C,
    pub c: f64,
    /// Overall amplitude, 1 for the standard packet.
    pub amplitude: f64,
}

impl WavePacket {
    pub fn new(sigma: f64, omega0: f64, t0: f64, z0: C, c: f64) -> Result<Self, IncidentError> {
        let p = Self { sigma, omega0, t0, z0, c, amplitude: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), IncidentError> {
        if !(self.sigma > 0.0) {
            return Err(IncidentError::InvalidPacket(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.omega0 > 0.0) {
            return Err(IncidentError::InvalidPacket(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !(self.c > 0.0) {
            return Err(IncidentError::InvalidPacket(format!("wave speed must be positive, got {}", self.c)));
        }
        if (self.z0.norm() - 1.0).abs() > 1e-14 {
            return Err(IncidentError::InvalidPacket(format!("direction must be a unit vector, |z0| = {}", self.z0.norm())));
        }
        if !self.t0.is_finite() || !self.amplitude.is_finite() {
            return Err(IncidentError::InvalidPacket("t0 and amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Arrival delay `s(x)`.
    pub fn delay(&self, x: C) -> f64 {
        (x.re * self.z0.re + x.im * self.z0.im) / self.c + self.t0
    }

    pub fn value(&self, x: C, t: f64) -> C {
        let tau = t - self.delay(x);
        let env = self.amplitude / ((2.0 * PI).sqrt() * self.sigma);
        C::new(-tau * tau / (2.0 * self.sigma * self.sigma), -self.omega0 * tau).exp() * env
    }

    /// `e^{i omega s(x)} e^{-sigma^2 (omega - omega0)^2 / 2}`, continued analytically in `omega`.
    pub fn transform(&self, x: C, omega: C) -> C {
        let s = self.delay(x);
        let d = omega - self.omega0;
        (C::new(0.0, s) * omega - d * d * (0.5 * self.sigma * self.sigma)).exp() * self.amplitude
    }
}

/// Frequency band `[w1, w2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub w1: f64,
    pub w2: f64,
}

impl Band {
    pub fn new(w1: f64, w2: f64) -> Result<Self, IncidentError> {
        if !(w2 > w1 && w1 > 0.0 && w2.is_finite()) {
            return Err(IncidentError::EmptyBand { w1, w2 });
        }
        Ok(Self { w1, w2 })
    }

    /// Band width `P = w2 - w1`.
    pub fn width(&self) -> f64 {
        self.w2 - self.w1
    }

    /// The `2m + 1` equispaced samples `w1 + P l/(2m + 1)`, `l = 0..2m`.
    pub fn grid(&self, m: usize) -> Vec<f64> {
        let n = 2 * m + 1;
        (0..n).map(|l| self.w1 + self.width() * l as f64 / n as f64).collect()
    }
}

pub const DEFAULT_OMEGA_MIN: f64 = 0.5;

/// Default band threshold `e^{-18}`.
pub fn default_band_epsilon() -> f64 {
    (-18f64).exp()
}

/// `omega0 -/+ sqrt(2 ln(1/eps))/sigma`, with the lower edge clipped at `omega_min`.
pub fn select_band(p: &WavePacket, epsilon: f64, omega_min: f64) -> Result<Band, IncidentError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(IncidentError::InvalidEpsilon(epsilon));
    }
    let half = (2.0 * (1.0 / epsilon).ln()).sqrt() / p.sigma;
    let w1 = (p.omega0 - half).max(omega_min);
    let w2 = p.omega0 + half;
    if w2 <= w1 {
        return Err(IncidentError::EmptyBand { w1, w2 });
    }
    Ok(Band { w1, w2 })
}
