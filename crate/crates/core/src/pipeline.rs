//! End-to-end time-domain scattering: boundary data, frequency-domain solves
//! on the shifted grid and on the two vertical segments, Fourier coefficients,
//! sinc synthesis of the damped term, edge corrections and assembly.
//!
//! All time-domain terms are stored in field units, i.e. already divided by
//! `2 pi`: `u = i_delta - i_right - i_left`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{correction_node_count, correction_term, default_delta, delta_limit, ContourError, CorrectionRule, Side};
use crate::geometry::{build_scatterer, discretize, DiscretizedBoundary, GeometryError};
use crate::helmholtz::{assemble_cfie, evaluate_field, BoundaryPlan, ComplexFrequency, HelmholtzError, MaskReason, TargetPlan};
use crate::incident::{default_band_epsilon, select_band, Band, IncidentError, WavePacket, DEFAULT_OMEGA_MIN};
use crate::synthesis::{adaptive_m, coeffs_from_samples, sinc_synthesize, FrequencyField, SincExpansion, SynthesisError};

type C = Complex64;

/// Solves with a weighted residual above this are flagged.
pub const RESIDUAL_FLAG: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Incident(#[from] IncidentError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("solve at omega = {omega}: {source}")]
    Solve { omega: C, source: HelmholtzError },
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

fn default_nodes() -> usize {
    16
}
fn default_panels() -> usize {
    32
}
fn default_c() -> f64 {
    1.0
}
fn default_amplitude() -> f64 {
    1.0
}
fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_eps_chop() -> f64 {
    1e-8
}
fn default_m_max() -> usize {
    4096
}
fn default_omega_min() -> f64 {
    DEFAULT_OMEGA_MIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_nodes")]
    pub nodes_per_panel: usize,
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default)]
    pub corner_depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub sigma: f64,
    pub omega0: f64,
    /// Omitted: the packet is placed `8 sigma` before its first boundary contact.
    pub t0: Option<f64>,
    /// Propagation direction, normalized on use.
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(default = "default_omega_min")]
    pub omega_min: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self { w1: None, w2: None, epsilon: None, omega_min: DEFAULT_OMEGA_MIN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Fixed `m`; omitted for adaptive doubling.
    pub m: Option<usize>,
    #[serde(default = "default_eps_chop")]
    pub eps_chop: f64,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { m: None, eps_chop: default_eps_chop(), m_max: default_m_max() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub times: Vec<f64>,
    /// Uniform spacing on `[0, T]`, used when `times` is empty.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub times: Vec<f64>,
}

impl SnapshotConfig {
    pub fn points(&self) -> Vec<C> {
        let coord = |a: f64, b: f64, n: usize, k: usize| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
        let mut pts = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                pts.push(C::new(coord(self.x0, self.x1, self.nx, i), coord(self.y0, self.y1, self.ny, j)));
            }
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    #[default]
    Scattered,
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub probe_file: Option<String>,
    pub grid_file: Option<String>,
    /// Field written to the grid file.
    #[serde(default)]
    pub field: FieldKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Time horizon `T`.
    pub horizon: f64,
    /// Damping `delta`; omitted for `min(0.8 L(T), 0.025)`.
    pub delta: Option<f64>,
    pub workers: Option<usize>,
    pub h_safe: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub run: RunConfig,
    pub scatterer: ScattererConfig,
    pub packet: PacketConfig,
    #[serde(default)]
    pub band: BandConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub probes: ProbeConfig,
    pub snapshot: Option<SnapshotConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Probe times, either listed or `k dt` on `[0, T]`.
    pub fn probe_times(&self) -> Vec<f64> {
        if !self.probes.times.is_empty() {
            return self.probes.times.clone();
        }
        match self.probes.dt {
            Some(dt) if dt > 0.0 => {
                let n = (self.run.horizon / dt * (1.0 + 1e-12)).floor() as usize;
                (0..=n).map(|k| k as f64 * dt).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Checks that do not need the geometry.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |s: String| Err(PipelineError::Config(s));
        let t = self.run.horizon;
        if !(t > 0.0 && t.is_finite()) {
            return bad(format!("horizon must be positive, got {t}"));
        }
        if let Some(d) = self.run.delta {
            let limit = delta_limit(t)?;
            if !(d >= 0.0) || d > limit {
                return bad(format!("delta = {d} must lie in [0, delta_limit(T) = {limit:.6}] for T = {t}"));
            }
        }
        if self.run.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let Some(m) = self.sampling.m {
            if m < 1 {
                return bad("m must be at least 1".into());
            }
        } else if self.sampling.m_max < 16 {
            return bad("m_max must be at least 16".into());
        }
        if !(self.sampling.eps_chop > 0.0) {
            return bad("eps_chop must be positive".into());
        }
        if self.scatterer.nodes_per_panel < 4 || self.scatterer.panels < 1 {
            return bad("need nodes_per_panel >= 4 and panels >= 1".into());
        }
        if let Some(dt) = self.probes.dt {
            if !(dt > 0.0) {
                return bad(format!("probe dt must be positive, got {dt}"));
            }
        }
        let mut all_times = self.probe_times();
        if let Some(s) = &self.snapshot {
            if s.nx == 0 || s.ny == 0 {
                return bad("snapshot grid must have nx, ny >= 1".into());
            }
            all_times.extend(&s.times);
        }
        if let Some(&bad_t) = all_times.iter().find(|&&x| !(0.0..=t).contains(&x)) {
            return bad(format!("output time {bad_t} outside [0, {t}]"));
        }
        let d = self.packet.direction;
        if !(d[0].hypot(d[1]) > 0.0) {
            return bad("packet direction must be nonzero".into());
        }
        Ok(())
    }
}

/// Terms at one `(target, time)`, in field units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Terms {
    pub u: C,
    pub i_delta: C,
    pub i_left: C,
    pub i_right: C,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverFlag {
    UnresolvedM { m: usize, tail: f64 },
    Residual { omega: C, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    pub setup: f64,
    pub solves: f64,
    pub synthesis: f64,
}

/// Edge correction rule with the field samples at its nodes, one row per unmasked target.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub rule: CorrectionRule,
    pub rows: Vec<Vec<C>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    /// Probes first, then snapshot grid points.
    pub targets: Vec<C>,
    pub mask: Vec<Option<MaskReason>>,
    /// Row of each target in the expansion and edge samples.
    pub row_of: Vec<Option<usize>>,
    pub probe_count: usize,
    pub probe_times: Vec<f64>,
    pub snapshot: Option<SnapshotConfig>,
    pub packet: WavePacket,
    pub band: Band,
    pub m: usize,
    pub delta: f64,
    pub n_c: usize,
    pub boundary_nodes: usize,
    pub expansion: SincExpansion,
    pub left: Option<EdgeSamples>,
    pub right: Option<EdgeSamples>,
    /// `probe_series[k][l]` at probe `k`, time `probe_times[l]`.
    pub probe_series: Vec<Vec<Option<Terms>>>,
    /// `frames[f][cell]` for snapshot time `f`, cells row-major with x fastest.
    pub frames: Vec<Vec<Option<Terms>>>,
    /// Complex frequency and weighted residual of every solve, in solve order.
    pub residuals: Vec<(C, f64)>,
    pub flags: Vec<SolverFlag>,
    pub timings: Timings,
}

impl SolutionSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn incident(&self, target: usize, t: f64) -> C {
        self.packet.value(self.targets[target], t)
    }

    /// Terms for one target at arbitrary times, recomputed from the stored
    /// expansion and edge samples.
    pub fn terms_at(&self, target: usize, times: &[f64]) -> Result<Option<Vec<Terms>>, PipelineError> {
        let Some(row) = self.row_of[target] else {
            return Ok(None);
        };
        let single = SincExpansion {
            band: self.expansion.band,
            m: self.expansion.m,
            delta: self.expansion.delta,
            coeffs: vec![self.expansion.coeffs[row].clone()],
            normalization: self.expansion.normalization,
        };
        let id = sinc_synthesize(&single, times)?.pop().expect("one row");
        let edge = |e: &Option<EdgeSamples>, t: f64| -> Result<C, PipelineError> {
            match e {
                Some(e) => Ok(correction_term(&e.rule, &e.rows[row], t)? / (2.0 * PI)),
                None => Ok(C::new(0.0, 0.0)),
            }
        };
        times
            .iter()
            .zip(id)
            .map(|(&t, i_delta)| {
                let i_left = edge(&self.left, t)?;
                let i_right = edge(&self.right, t)?;
                Ok(Terms { u: i_delta - i_right - i_left, i_delta, i_left, i_right })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

/// Number of worker threads: explicit, else the rayon default.
pub fn worker_count(cfg: &SimConfig) -> usize {
    cfg.run.workers.unwrap_or_else(rayon::current_num_threads).max(1)
}

struct Setup {
    bdy: DiscretizedBoundary,
    bplan: BoundaryPlan,
    tplan: TargetPlan,
    packet: WavePacket,
    band: Band,
    delta: f64,
    n_c: usize,
}

fn prepare(cfg: &SimConfig) -> Result<Setup, PipelineError> {
    cfg.validate()?;
    let curve = build_scatterer(&cfg.scatterer.name, &cfg.scatterer.params)?;
    let bdy = discretize(&curve, cfg.scatterer.nodes_per_panel, cfg.scatterer.panels, cfg.scatterer.corner_depth)?;
    let bplan = BoundaryPlan::new(&bdy);
    let p = &cfg.packet;
    let dn = p.direction[0].hypot(p.direction[1]);
    let z0 = C::new(p.direction[0] / dn, p.direction[1] / dn);
    let t0 = match p.t0 {
        Some(t0) => t0,
        None => {
            let lead = bdy.points.iter().map(|q| -(q.z.re * z0.re + q.z.im * z0.im)).fold(f64::NEG_INFINITY, f64::max);
            8.0 * p.sigma + lead / p.c
        }
    };
    let mut packet = WavePacket::new(p.sigma, p.omega0, t0, z0, p.c)?;
    packet.amplitude = p.amplitude;
    packet.validate()?;
    let band = match (cfg.band.w1, cfg.band.w2) {
        (Some(w1), Some(w2)) => Band::new(w1, w2)?,
        (None, None) => select_band(&packet, cfg.band.epsilon.unwrap_or_else(default_band_epsilon), cfg.band.omega_min)?,
        _ => return Err(PipelineError::Config("band needs both w1 and w2, or neither".into())),
    };
    let t = cfg.run.horizon;
    let delta = match cfg.run.delta {
        Some(d) => d,
        None => default_delta(t)?,
    };
    let n_c = if delta > 0.0 { correction_node_count(delta, t)? } else { 0 };
    let mut targets: Vec<C> = cfg.probes.points.iter().map(|p| C::new(p[0], p[1])).collect();
    if let Some(s) = &cfg.snapshot {
        targets.extend(s.points());
    }
    let tplan = TargetPlan::new(&bdy, &targets, cfg.run.h_safe.unwrap_or(crate::helmholtz::DEFAULT_H_SAFE));
    Ok(Setup { bdy, bplan, tplan, packet, band, delta, n_c })
}

/// One frequency-domain solve with incident data from the packet, evaluated
/// at the unmasked targets.
fn solve_one(s: &Setup, omega: C) -> Result<(Vec<C>, f64), PipelineError> {
    let wrap = |e| PipelineError::Solve { omega, source: e };
    let freq = ComplexFrequency::new(omega.re, omega.im, s.packet.c).map_err(wrap)?;
    let rhs: Vec<C> = s.bdy.points.iter().map(|q| -s.packet.transform(q.z, omega)).collect();
    let a = assemble_cfie(&s.bdy, &s.bplan, freq, freq.default_coupling()).map_err(wrap)?;
    let phi = a.solve_density(&rhs).map_err(wrap)?;
    let vals = evaluate_field(&s.bdy, &s.tplan, &phi).map_err(wrap)?;
    Ok((vals.into_iter().flatten().collect(), phi.residual))
}

/// Solves at every frequency in order and transposes to one row per target.
fn solve_many(s: &Setup, omegas: &[C], residuals: &mut Vec<(C, f64)>) -> Result<Vec<Vec<C>>, PipelineError> {
    let results: Vec<Result<(Vec<C>, f64), PipelineError>> = omegas.par_iter().map(|&w| solve_one(s, w)).collect();
    let rows = s.tplan.mask.iter().filter(|m| m.is_none()).count();
    let mut out = vec![Vec::with_capacity(omegas.len()); rows];
    for (&w, r) in omegas.iter().zip(results) {
        let (vals, res) = r?;
        residuals.push((w, res));
        for (row, v) in out.iter_mut().zip(vals) {
            row.push(v);
        }
    }
    Ok(out)
}

/// Scattered field of the configured packet at arbitrary complex
/// frequencies, one entry per target (`None` where masked), together with
/// the residual of every solve.
pub fn solve_frequencies(cfg: &SimConfig, omegas: &[C]) -> Result<(Vec<Option<Vec<C>>>, Vec<(C, f64)>), PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let s = prepare(cfg)?;
        let mut residuals = Vec::new();
        let mut rows = solve_many(&s, omegas, &mut residuals)?.into_iter();
        let out = s.tplan.mask.iter().map(|m| if m.is_none() { rows.next() } else { None }).collect();
        Ok((out, residuals))
    })
}

pub fn run_simulation(cfg: &SimConfig) -> Result<SolutionSet, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &SimConfig) -> Result<SolutionSet, PipelineError> {
    let clock = Instant::now();
    let s = prepare(cfg)?;
    let setup_time = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let mut residuals = Vec::new();
    let mut flags = Vec::new();
    let band = s.band;
    let delta = s.delta;

    let mut sample_at = |m: usize| -> Result<FrequencyField, PipelineError> {
        let omegas: Vec<C> = band.grid(m).into_iter().map(|w| C::new(w, delta)).collect();
        let rows = solve_many(&s, &omegas, &mut residuals)?;
        Ok(FrequencyField::new(band, m, delta, rows)?)
    };
    let expansion = match cfg.sampling.m {
        Some(m) => coeffs_from_samples(&sample_at(m)?),
        None => {
            let r = adaptive_m(&mut sample_at, cfg.sampling.eps_chop, cfg.sampling.m_max)?;
            if !r.resolved {
                flags.push(SolverFlag::UnresolvedM { m: r.expansion.m, tail: r.expansion.tail_ratio() });
            }
            r.expansion
        }
    };

    let mut edge = |side: Side, w: f64| -> Result<Option<EdgeSamples>, PipelineError> {
        if s.n_c == 0 {
            return Ok(None);
        }
        let rule = CorrectionRule::new(side, w, delta, s.n_c);
        let rows = solve_many(&s, &rule.frequencies(), &mut residuals)?;
        Ok(Some(EdgeSamples { rule, rows }))
    };
    let left = edge(Side::Left, band.w1)?;
    let right = edge(Side::Right, band.w2)?;
    for &(omega, residual) in &residuals {
        if !(residual <= RESIDUAL_FLAG) {
            flags.push(SolverFlag::Residual { omega, residual });
        }
    }
    let solve_time = clock.elapsed().as_secs_f64();
    let clock = Instant::now();

    let mut row_of = Vec::with_capacity(s.tplan.len());
    let mut next = 0;
    for m in &s.tplan.mask {
        row_of.push(if m.is_none() {
            next += 1;
            Some(next - 1)
        } else {
            None
        });
    }
    let probe_count = cfg.probes.points.len();
    let mut sol = SolutionSet {
        targets: s.tplan.targets.clone(),
        mask: s.tplan.mask.clone(),
        row_of,
        probe_count,
        probe_times: cfg.probe_times(),
        snapshot: cfg.snapshot.clone(),
        packet: s.packet,
        band,
        m: expansion.m,
        delta,
        n_c: s.n_c,
        boundary_nodes: s.bdy.len(),
        expansion,
        left,
        right,
        probe_series: Vec::new(),
        frames: Vec::new(),
        residuals,
        flags,
        timings: Timings::default(),
    };

    let probe_series = (0..probe_count)
        .into_par_iter()
        .map(|k| Ok(transpose_none(sol.terms_at(k, &sol.probe_times)?, sol.probe_times.len())))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let frames = match &cfg.snapshot {
        Some(snap) => {
            let cells = (probe_count..sol.targets.len())
                .into_par_iter()
                .map(|k| Ok(transpose_none(sol.terms_at(k, &snap.times)?, snap.times.len())))
                .collect::<Result<Vec<_>, PipelineError>>()?;
            (0..snap.times.len()).map(|f| cells.iter().map(|c| c[f]).collect()).collect()
        }
        None => Vec::new(),
    };
    sol.probe_series = probe_series;
    sol.frames = frames;
    sol.timings = Timings { setup: setup_time, solves: solve_time, synthesis: clock.elapsed().as_secs_f64() };
    Ok(sol)
}

fn transpose_none(v: Option<Vec<Terms>>, n: usize) -> Vec<Option<Terms>> {
    match v {
        Some(v) => v.into_iter().map(Some).collect(),
        None => vec![None; n],
    }
}

/// Outcome of [`verify_assembly`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub checks: usize,
    /// Largest discrepancy relative to the magnitude of the terms involved.
    pub max_discrepancy: f64,
    /// Largest `|i_left| + |i_right|` seen; zero for undamped runs.
    pub max_correction: f64,
    pub passed: bool,
}

pub const AUDIT_TOLERANCE: f64 = 1e-12;

/// `sinc(x) = sin(pi x)/(pi x)`.
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Recomputes the three terms at randomly chosen stored `(target, time)`
/// pairs, straight from the coefficients and edge samples, and compares with
/// the stored values.
pub fn verify_assembly(sol: &SolutionSet, spot_checks: usize, seed: u64) -> AuditReport {
    let mut stored: Vec<(usize, f64, Terms)> = Vec::new();
    for (k, series) in sol.probe_series.iter().enumerate() {
        for (l, v) in series.iter().enumerate() {
            if let Some(v) = v {
                stored.push((k, sol.probe_times[l], *v));
            }
        }
    }
    if let Some(snap) = &sol.snapshot {
        for (f, frame) in sol.frames.iter().enumerate() {
            for (cell, v) in frame.iter().enumerate() {
                if let Some(v) = v {
                    stored.push((sol.probe_count + cell, snap.times[f], *v));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, stored.len(), spot_checks.min(stored.len()));
    let p = sol.band.width();
    let mut worst: f64 = 0.0;
    let mut max_correction: f64 = 0.0;
    for idx in picks.iter() {
        let (target, t, st) = stored[idx];
        let row = sol.row_of[target].expect("stored value has a row");
        let coeffs = &sol.expansion.coeffs[row];
        let m = sol.expansion.m;
        let a = p * t / (2.0 * PI);
        let mut sum = C::new(0.0, 0.0);
        let mut scale: f64 = 0.0;
        for j in 1..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += coeffs[m + j] * (sign * sinc(a - j as f64));
            scale = scale.max(coeffs[m + j].norm());
        }
        let pre = C::from_polar(p / (2.0 * PI) * (sol.delta * t).exp(), -t * (0.5 * p + sol.band.w1));
        let i_delta = pre * sum;
        let edge = |e: &Option<EdgeSamples>, sign: f64| -> C {
            let Some(e) = e else { return C::new(0.0, 0.0) };
            let mut acc = C::new(0.0, 0.0);
            for q in 0..e.rule.len() {
                acc += e.rows[row][q] * (e.rule.weights[q] * (e.rule.nodes[q] * t).exp());
            }
            C::new(0.0, sign) * C::from_polar(1.0, -e.rule.edge * t) * acc / (2.0 * PI)
        };
        let i_left = edge(&sol.left, -1.0);
        let i_right = edge(&sol.right, 1.0);
        let u = i_delta - i_right - i_left;
        let magnitude = [st.u.norm(), st.i_delta.norm(), i_left.norm() + i_right.norm(), pre.norm() * scale]
            .into_iter()
            .fold(f64::MIN_POSITIVE, f64::max);
        let d = [(u - st.u).norm(), (i_delta - st.i_delta).norm(), (i_left - st.i_left).norm(), (i_right - st.i_right).norm()]
            .into_iter()
            .fold(0.0, f64::max);
        worst = worst.max(d / magnitude);
        max_correction = max_correction.max(st.i_left.norm() + st.i_right.norm());
    }
    AuditReport { checks: picks.len(), max_discrepancy: worst, max_correction, passed: worst <= AUDIT_TOLERANCE }
}
