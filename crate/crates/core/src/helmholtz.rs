//! Combined-field integral equation for the exterior Dirichlet Helmholtz
//! problem, Nyström discretization on Gauss-Legendre panels, and evaluation of
//! the resulting layer potential.
//!
//! With `G(x) = i/4 H0(kappa |x|)` and the outward normal `n`, the scattered
//! field is represented as
//!
//! ```text
//! U(x) = int (dG/dn_y(x - y) - i eta G(x - y)) phi(y) ds(y)
//! ```
//!
//! and the density solves `phi/2 + K phi = g` for Dirichlet data `g`. This
//! combination is uniquely solvable for every `Im kappa >= 0`, `eta > 0`.
//!
//! Quadrature: on its own panel a target uses product integration against
//! `ln|tau - tau_i|` (the log-singular parts are split off with `J0`, `J1`);
//! a source panel closer to the target than its own length is subdivided
//! adaptively and the density interpolated onto the leaves; everything else
//! uses the plain panel rule. The near-field plan depends only on geometry and
//! is shared by every frequency.

use std::cell::OnceCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{BoundaryPoint, DiscretizedBoundary, Membership, MembershipTester};
use crate::quadrature::{barycentric_weights, log_product_weights};
use crate::specfun::{bessel_j01, bessel_j_seq, hankel01, hankel_seq, HankelTable, SpecfunError};

type C = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HelmholtzError {
    #[error("invalid frequency omega={omega}, delta={delta}, c={c}: need omega > 0, delta >= 0, c > 0")]
    InvalidFrequency { omega: f64, delta: f64, c: f64 },
    #[error("coupling constant must be positive, got {0}")]
    InvalidCoupling(f64),
    #[error("non-finite kernel value between target {target} and source node {node}")]
    NonFinite { target: usize, node: usize },
    #[error("operator is numerically singular at omega = {omega} + {delta}i")]
    Singular { omega: f64, delta: f64 },
    #[error("right-hand side has length {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("special function failure: {0}")]
    Specfun(#[from] SpecfunError),
    #[error("disk series did not converge within {0} terms")]
    SeriesDivergence(usize),
}

/// `omega + i delta` together with the wave speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFrequency {
    pub omega: f64,
    pub delta: f64,
    pub c: f64,
}

impl ComplexFrequency {
    pub fn new(omega: f64, delta: f64, c: f64) -> Result<Self, HelmholtzError> {
        if !(omega > 0.0 && delta >= 0.0 && c > 0.0 && omega.is_finite() && delta.is_finite() && c.is_finite()) {
            return Err(HelmholtzError::InvalidFrequency { omega, delta, c });
        }
        Ok(Self { omega, delta, c })
    }

    /// Wavenumber `(omega + i delta) / c`.
    pub fn kappa(&self) -> C {
        C::new(self.omega, self.delta) / self.c
    }

    /// Default coupling `eta = Re kappa`.
    pub fn default_coupling(&self) -> f64 {
        self.omega / self.c
    }
}

/// Kernel evaluation at one wavenumber, backed by a tabulated Hankel pair.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub kappa: C,
    pub eta: f64,
    table: HankelTable,
    ik4: C,
    eta4: f64,
}

impl KernelContext {
    pub fn new(kappa: C, eta: f64, r_max: f64) -> Result<Self, HelmholtzError> {
        if !(eta > 0.0) {
            return Err(HelmholtzError::InvalidCoupling(eta));
        }
        Ok(Self { kappa, eta, table: HankelTable::new(kappa, r_max)?, ik4: C::new(0.0, 0.25) * kappa, eta4: 0.25 * eta })
    }

    /// `dG/dn_y(x - y) - i eta G(x - y)` for `x != y`.
    #[inline]
    pub fn kernel(&self, x: C, y: C, ny: C) -> C {
        let d = x - y;
        let r = d.norm();
        let h = self.table.eval(r);
        let ndot = (ny.re * d.re + ny.im * d.im) / r;
        self.ik4 * h.h1 * ndot + h.h0 * self.eta4
    }

    /// Free-space Green's function `i/4 H0(kappa |x - y|)`.
    pub fn green(&self, x: C, y: C) -> C {
        C::new(0.0, 0.25) * self.table.eval((x - y).norm()).h0
    }
}

/// Free-space Green's function without a table, for exact-solution checks.
pub fn point_source(kappa: C, source: C, x: C) -> Result<C, HelmholtzError> {
    Ok(C::new(0.0, 0.25) * hankel01(kappa * (x - source).norm())?.h0)
}

/// A dyadic piece of a source panel with its own Gauss-Legendre points and
/// the interpolation matrix from the panel's nodes.
#[derive(Debug, Clone)]
struct Leaf {
    z: Vec<C>,
    normal: Vec<C>,
    weight: Vec<f64>,
    /// `interp[l * p + j]` = Lagrange basis `j` of the panel at leaf point `l`
    interp: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct NearEntry {
    panel: u32,
    leaf_start: u32,
    leaf_end: u32,
}

const MAX_LEAF_DEPTH: u32 = 60;

/// Frequency-independent list of near (target, source panel) interactions.
#[derive(Debug, Clone, Default)]
pub struct NearPlan {
    leaves: Vec<Leaf>,
    leaf_ids: Vec<u32>,
    per_target: Vec<Vec<NearEntry>>,
}

struct PanelBound {
    center: C,
    radius: f64,
    samples: Vec<C>,
    length: f64,
}

fn panel_bounds(bdy: &DiscretizedBoundary) -> Vec<PanelBound> {
    let p = bdy.nodes_per_panel();
    bdy.panels
        .iter()
        .enumerate()
        .map(|(k, panel)| {
            let mut samples: Vec<C> = (0..p).map(|q| bdy.node(panel.first_node + q)).collect();
            samples.push(bdy.panel_point(k, -1.0).z);
            samples.push(bdy.panel_point(k, 1.0).z);
            let center = bdy.panel_point(k, 0.0).z;
            let radius = samples.iter().map(|s| (s - center).norm()).fold(0.0, f64::max);
            PanelBound { center, radius, samples, length: panel.length }
        })
        .collect()
}

impl NearPlan {
    /// `own_panel(t)` names a panel to skip for target `t` (its self panel).
    fn build(bdy: &DiscretizedBoundary, targets: &[C], own_panel: impl Fn(usize) -> Option<usize>, active: &[bool]) -> Self {
        let bounds = panel_bounds(bdy);
        let p = bdy.nodes_per_panel();
        let bary = barycentric_weights(&bdy.rule.nodes);
        let mut plan = NearPlan { per_target: vec![Vec::new(); targets.len()], ..Default::default() };
        let mut cache: HashMap<(u32, u32, u64), u32> = HashMap::new();
        for (t, &x) in targets.iter().enumerate() {
            if !active[t] {
                continue;
            }
            for (k, b) in bounds.iter().enumerate() {
                if own_panel(t) == Some(k) {
                    continue;
                }
                if (x - b.center).norm() - b.radius >= b.length {
                    continue;
                }
                let dist = b.samples.iter().map(|s| (s - x).norm()).fold(f64::INFINITY, f64::min);
                if dist >= b.length {
                    continue;
                }
                let start = plan.leaf_ids.len() as u32;
                plan.subdivide(bdy, &bary, p, &mut cache, x, k, 0, 0);
                plan.per_target[t].push(NearEntry { panel: k as u32, leaf_start: start, leaf_end: plan.leaf_ids.len() as u32 });
            }
        }
        plan
    }

    #[allow(clippy::too_many_arguments)]
    fn subdivide(
        &mut self,
        bdy: &DiscretizedBoundary,
        bary: &[f64],
        p: usize,
        cache: &mut HashMap<(u32, u32, u64), u32>,
        x: C,
        panel: usize,
        depth: u32,
        index: u64,
    ) {
        let width = 2.0 / (1u64 << depth) as f64;
        let a = -1.0 + width * index as f64;
        let b = a + width;
        let key = (panel as u32, depth, index);
        let id = match cache.get(&key) {
            Some(&id) => id,
            None => {
                let leaf = make_leaf(bdy, bary, p, panel, a, b);
                self.leaves.push(leaf);
                let id = (self.leaves.len() - 1) as u32;
                cache.insert(key, id);
                id
            }
        };
        let leaf = &self.leaves[id as usize];
        let length: f64 = leaf.weight.iter().sum();
        let mut dist = leaf.z.iter().map(|s| (s - x).norm()).fold(f64::INFINITY, f64::min);
        dist = dist.min((bdy.panel_point(panel, a).z - x).norm()).min((bdy.panel_point(panel, b).z - x).norm());
        if dist >= length || depth >= MAX_LEAF_DEPTH {
            self.leaf_ids.push(id);
            return;
        }
        self.subdivide(bdy, bary, p, cache, x, panel, depth + 1, 2 * index);
        self.subdivide(bdy, bary, p, cache, x, panel, depth + 1, 2 * index + 1);
    }

    /// Number of stored leaves and near interactions, for diagnostics.
    pub fn size(&self) -> (usize, usize) {
        (self.leaves.len(), self.per_target.iter().map(Vec::len).sum())
    }
}

fn make_leaf(bdy: &DiscretizedBoundary, bary: &[f64], p: usize, panel: usize, a: f64, b: f64) -> Leaf {
    let half = 0.5 * (b - a);
    let mut leaf = Leaf {
        z: Vec::with_capacity(p),
        normal: Vec::with_capacity(p),
        weight: Vec::with_capacity(p),
        interp: Vec::with_capacity(p * p),
    };
    for (t, w) in bdy.rule.nodes.iter().zip(&bdy.rule.weights) {
        let tau = 0.5 * (a + b) + half * t;
        let bp: BoundaryPoint = bdy.panel_point(panel, tau);
        leaf.z.push(bp.z);
        leaf.normal.push(bp.normal);
        leaf.weight.push(w * half * bp.speed);
        leaf.interp.extend(crate::quadrature::lagrange_basis(&bdy.rule.nodes, bary, tau));
    }
    leaf
}

/// Geometry-only precomputation for assembling the boundary operator.
#[derive(Debug, Clone)]
pub struct BoundaryPlan {
    near: NearPlan,
    /// `log_weights[i * p + j]`: product weights for `ln|tau - tau_i|` on [-1, 1]
    log_weights: Vec<f64>,
    diameter: f64,
}

impl BoundaryPlan {
    pub fn new(bdy: &DiscretizedBoundary) -> Self {
        let targets: Vec<C> = bdy.points.iter().map(|p| p.z).collect();
        let active = vec![true; targets.len()];
        let near = NearPlan::build(bdy, &targets, |t| Some(bdy.node_panel[t]), &active);
        let p = bdy.nodes_per_panel();
        let mut log_weights = Vec::with_capacity(p * p);
        for &s in &bdy.rule.nodes {
            log_weights.extend(log_product_weights(&bdy.rule, s));
        }
        Self { near, log_weights, diameter: bdy.diameter() }
    }

    pub fn near_size(&self) -> (usize, usize) {
        self.near.size()
    }
}

/// Why an evaluation target produces no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskReason {
    InsideScatterer,
    NearBoundary,
}

/// Off-boundary evaluation targets with their near-field plan.
#[derive(Debug, Clone)]
pub struct TargetPlan {
    pub targets: Vec<C>,
    pub mask: Vec<Option<MaskReason>>,
    near: NearPlan,
    extent: f64,
}

/// Default minimum target distance from the boundary. Closer targets are
/// still handled by the adaptive near-field rule, but are masked to keep the
/// subdivision depth bounded.
pub const DEFAULT_H_SAFE: f64 = 1e-6;

impl TargetPlan {
    pub fn new(bdy: &DiscretizedBoundary, targets: &[C], h_safe: f64) -> Self {
        let tester = MembershipTester::new(&bdy.curve);
        let mask: Vec<Option<MaskReason>> = targets
            .iter()
            .map(|&z| match tester.classify(z) {
                Membership::Inside => Some(MaskReason::InsideScatterer),
                Membership::Indeterminate => Some(MaskReason::NearBoundary),
                Membership::Outside => {
                    if tester.distance(z) < h_safe {
                        Some(MaskReason::NearBoundary)
                    } else {
                        None
                    }
                }
            })
            .collect();
        let active: Vec<bool> = mask.iter().map(Option::is_none).collect();
        let near = NearPlan::build(bdy, targets, |_| None, &active);
        let center = bdy.points.iter().map(|p| p.z).sum::<C>() / bdy.len() as f64;
        let extent = targets.iter().map(|z| (z - center).norm()).fold(0.0, f64::max) + bdy.diameter();
        Self { targets: targets.to_vec(), mask, near, extent }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Distance bound covering every target-node pair.
    pub fn extent(&self) -> f64 {
        self.extent
    }
}

/// Dense Nyström matrix in the `L2`-scaled form `W^{1/2} A W^{-1/2}`, with
/// its LU factorization computed on first use.
pub struct OperatorMatrix {
    scaled: Mat<C>,
    sqrt_w: Vec<f64>,
    freq: ComplexFrequency,
    coupling: f64,
    lu: OnceCell<PartialPivLu<C>>,
}

impl std::fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("n", &self.sqrt_w.len())
            .field("freq", &self.freq)
            .field("coupling", &self.coupling)
            .field("factored", &self.lu.get().is_some())
            .finish()
    }
}

/// Boundary density at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub values: Vec<C>,
    pub freq: ComplexFrequency,
    pub coupling: f64,
    /// `||A phi - g|| / ||g||` in the weighted L2 norm (0 for `g = 0`).
    pub residual: f64,
}

/// Assembles `1/2 I + K` for the boundary.
pub fn assemble_cfie(
    bdy: &DiscretizedBoundary,
    plan: &BoundaryPlan,
    freq: ComplexFrequency,
    coupling: f64,
) -> Result<OperatorMatrix, HelmholtzError> {
    let ctx = KernelContext::new(freq.kappa(), coupling, plan.diameter * 1.01)?;
    assemble_with(bdy, plan, &ctx, freq)
}

fn assemble_with(
    bdy: &DiscretizedBoundary,
    plan: &BoundaryPlan,
    ctx: &KernelContext,
    freq: ComplexFrequency,
) -> Result<OperatorMatrix, HelmholtzError> {
    let n = bdy.len();
    let p = bdy.nodes_per_panel();
    let kappa = ctx.kappa;
    let eta = ctx.eta;
    let pts = &bdy.points;
    let w = &bdy.weights;
    let mut a = Mat::<C>::zeros(n, n);

    // smooth rule everywhere; the kernel is symmetric in |x - y| so one Hankel
    // evaluation serves both (i, j) and (j, i)
    for i in 0..n {
        let xi = pts[i].z;
        for j in (i + 1)..n {
            let xj = pts[j].z;
            let d = xi - xj;
            let r = d.norm();
            let h = ctx.table.eval(r);
            let s = h.h0 * ctx.eta4;
            let g = ctx.ik4 * h.h1 / r;
            let nj = pts[j].normal;
            let ni = pts[i].normal;
            let dij = nj.re * d.re + nj.im * d.im;
            let dji = -(ni.re * d.re + ni.im * d.im);
            a[(i, j)] = (g * dij + s) * w[j];
            a[(j, i)] = (g * dji + s) * w[i];
        }
    }

    // self panels: product integration against ln|tau - tau_i|
    let k_s_const = C::new(0.25 * eta, 0.0) + C::new(0.0, eta / (2.0 * PI)) * (C::new(EULER_GAMMA, 0.0) + (kappa * 0.5).ln());
    let kl_diag = C::new(0.0, eta / (2.0 * PI));
    let gl = &bdy.rule;
    for panel in &bdy.panels {
        let f = panel.first_node;
        for qi in 0..p {
            let i = f + qi;
            let x = pts[i].z;
            for qj in 0..p {
                let j = f + qj;
                let wl = plan.log_weights[qi * p + qj];
                let sp = pts[j].speed;
                let v = if qi == qj {
                    let ks = k_s_const - C::new(pts[i].curvature / (4.0 * PI), 0.0);
                    C::new(0.5, 0.0) + kl_diag * (wl * sp) + (ks + kl_diag * sp.ln()) * (gl.weights[qj] * sp)
                } else {
                    let y = pts[j].z;
                    let d = x - y;
                    let r = d.norm();
                    let (j0, j1) = bessel_j01(kappa * r);
                    let ndot = (pts[j].normal.re * d.re + pts[j].normal.im * d.im) / r;
                    let kl = -kappa / (2.0 * PI) * j1 * ndot + C::new(0.0, eta / (2.0 * PI)) * j0;
                    let k = ctx.kernel(x, y, pts[j].normal);
                    let lt = (gl.nodes[qj] - gl.nodes[qi]).abs().ln();
                    kl * (wl * sp) + (k - kl * lt) * (gl.weights[qj] * sp)
                };
                a[(i, j)] = v;
            }
        }
    }

    // near panels: adaptive leaves with interpolated density
    let mut kbuf = vec![C::new(0.0, 0.0); p];
    let mut acc = vec![C::new(0.0, 0.0); p];
    for (i, entries) in plan.near.per_target.iter().enumerate() {
        let x = pts[i].z;
        for e in entries {
            near_row(ctx, &plan.near, e, x, p, &mut kbuf, &mut acc);
            let f = bdy.panels[e.panel as usize].first_node;
            for q in 0..p {
                a[(i, f + q)] = acc[q];
            }
        }
    }

    let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    for j in 0..n {
        for i in 0..n {
            let v = a[(i, j)];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(HelmholtzError::NonFinite { target: i, node: j });
            }
            a[(i, j)] = v * (sqrt_w[i] / sqrt_w[j]);
        }
    }
    Ok(OperatorMatrix { scaled: a, sqrt_w, freq, coupling: eta, lu: OnceCell::new() })
}

/// Quadrature weights against the panel's nodal density values for one near
/// interaction; result in `acc`.
#[inline]
fn near_row(ctx: &KernelContext, near: &NearPlan, e: &NearEntry, x: C, p: usize, kbuf: &mut [C], acc: &mut [C]) {
    acc.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
    for &id in &near.leaf_ids[e.leaf_start as usize..e.leaf_end as usize] {
        let leaf = &near.leaves[id as usize];
        for l in 0..p {
            kbuf[l] = ctx.kernel(x, leaf.z[l], leaf.normal[l]) * leaf.weight[l];
        }
        for l in 0..p {
            let row = &leaf.interp[l * p..(l + 1) * p];
            let k = kbuf[l];
            for q in 0..p {
                acc[q] += k * row[q];
            }
        }
    }
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        self.sqrt_w.len()
    }

    pub fn freq(&self) -> ComplexFrequency {
        self.freq
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn is_factored(&self) -> bool {
        self.lu.get().is_some()
    }

    /// Entry of the unscaled operator `1/2 I + K`.
    pub fn entry(&self, i: usize, j: usize) -> C {
        self.scaled[(i, j)] * (self.sqrt_w[j] / self.sqrt_w[i])
    }

    /// `(1/2 I + K) phi`.
    pub fn apply(&self, phi: &[C]) -> Vec<C> {
        let n = self.n();
        let psi: Vec<C> = phi.iter().zip(&self.sqrt_w).map(|(v, s)| v * s).collect();
        let mut out = vec![C::new(0.0, 0.0); n];
        for j in 0..n {
            let col = self.scaled.col_as_slice(j);
            let v = psi[j];
            for i in 0..n {
                out[i] += col[i] * v;
            }
        }
        out.iter_mut().zip(&self.sqrt_w).for_each(|(o, s)| *o /= s);
        out
    }

    fn factor(&self) -> &PartialPivLu<C> {
        self.lu.get_or_init(|| self.scaled.partial_piv_lu())
    }

    /// Solves `(1/2 I + K) phi = rhs`, factoring on the first call.
    pub fn solve_density(&self, rhs: &[C]) -> Result<Density, HelmholtzError> {
        let n = self.n();
        if rhs.len() != n {
            return Err(HelmholtzError::Dimension { got: rhs.len(), expected: n });
        }
        let b = Mat::<C>::from_fn(n, 1, |i, _| rhs[i] * self.sqrt_w[i]);
        let bnorm = b.col_as_slice(0).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if bnorm == 0.0 {
            return Ok(Density { values: vec![C::new(0.0, 0.0); n], freq: self.freq, coupling: self.coupling, residual: 0.0 });
        }
        let psi = self.factor().solve(&b);
        let psi = psi.col_as_slice(0);
        if psi.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(HelmholtzError::Singular { omega: self.freq.omega, delta: self.freq.delta });
        }
        let mut res = b.col_as_slice(0).to_vec();
        for j in 0..n {
            let col = self.scaled.col_as_slice(j);
            let v = psi[j];
            for i in 0..n {
                res[i] -= col[i] * v;
            }
        }
        let residual = res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / bnorm;
        let values = psi.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect();
        Ok(Density { values, freq: self.freq, coupling: self.coupling, residual })
    }
}

/// Summation backend for the layer potential at off-boundary targets. The
/// direct backend costs `O(targets x nodes)`; a fast multipole backend would
/// implement the same trait.
pub trait FieldSummation {
    fn evaluate(&self, bdy: &DiscretizedBoundary, plan: &TargetPlan, ctx: &KernelContext, phi: &[C]) -> Vec<Option<C>>;
}

/// Direct summation with the near-field correction of the target plan.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSummation;

impl FieldSummation for DirectSummation {
    fn evaluate(&self, bdy: &DiscretizedBoundary, plan: &TargetPlan, ctx: &KernelContext, phi: &[C]) -> Vec<Option<C>> {
        let p = bdy.nodes_per_panel();
        let wphi: Vec<C> = phi.iter().zip(&bdy.weights).map(|(v, w)| v * w).collect();
        let mut kbuf = vec![C::new(0.0, 0.0); p];
        let mut acc = vec![C::new(0.0, 0.0); p];
        let mut near_panel = vec![false; bdy.panels.len()];
        plan.targets
            .iter()
            .enumerate()
            .map(|(t, &x)| {
                if plan.mask[t].is_some() {
                    return None;
                }
                let entries = &plan.near.per_target[t];
                for e in entries {
                    near_panel[e.panel as usize] = true;
                }
                let mut u = C::new(0.0, 0.0);
                for (k, panel) in bdy.panels.iter().enumerate() {
                    if near_panel[k] {
                        continue;
                    }
                    for j in panel.first_node..panel.first_node + p {
                        let bp = &bdy.points[j];
                        u += ctx.kernel(x, bp.z, bp.normal) * wphi[j];
                    }
                }
                for e in entries {
                    near_row(ctx, &plan.near, e, x, p, &mut kbuf, &mut acc);
                    let f = bdy.panels[e.panel as usize].first_node;
                    for q in 0..p {
                        u += acc[q] * phi[f + q];
                    }
                    near_panel[e.panel as usize] = false;
                }
                Some(u)
            })
            .collect()
    }
}

/// Scattered field of `phi` at the plan's targets (masked targets give `None`).
pub fn evaluate_field(bdy: &DiscretizedBoundary, plan: &TargetPlan, phi: &Density) -> Result<Vec<Option<C>>, HelmholtzError> {
    evaluate_field_with(bdy, plan, phi, phi.coupling, &DirectSummation)
}

/// As [`evaluate_field`], with an explicit coupling constant and backend.
pub fn evaluate_field_with(
    bdy: &DiscretizedBoundary,
    plan: &TargetPlan,
    phi: &Density,
    coupling: f64,
    backend: &dyn FieldSummation,
) -> Result<Vec<Option<C>>, HelmholtzError> {
    let ctx = KernelContext::new(phi.freq.kappa(), coupling, plan.extent)?;
    Ok(backend.evaluate(bdy, plan, &ctx, &phi.values))
}

/// Exact scattered field of a plane wave `e^{i kappa x.d}` by the sound-soft
/// disk of radius `radius` centred at the origin.
pub fn disk_series_reference(
    radius: f64,
    freq: ComplexFrequency,
    direction: C,
    targets: &[C],
) -> Result<Vec<C>, HelmholtzError> {
    const MAX_TERMS: usize = 500;
    let kappa = freq.kappa();
    let ka = kappa * radius;
    let jn = bessel_j_seq(MAX_TERMS, ka);
    let hna = hankel_seq(MAX_TERMS, ka)?;
    let dir_angle = direction.arg();
    targets
        .iter()
        .map(|&x| {
            let r = x.norm();
            let theta = x.arg() - dir_angle;
            let hnr = hankel_seq(MAX_TERMS, kappa * r)?;
            let mut sum = C::new(0.0, 0.0);
            let mut quiet = 0;
            let mut i_n = C::new(1.0, 0.0);
            for n in 0..=MAX_TERMS {
                let ratio = hnr[n] / hna[n];
                if !(ratio.re.is_finite() && ratio.im.is_finite()) {
                    return Err(HelmholtzError::SeriesDivergence(n));
                }
                let eps = if n == 0 { 1.0 } else { 2.0 };
                let term = i_n * jn[n] * ratio * (eps * (n as f64 * theta).cos());
                sum += term;
                i_n *= C::new(0.0, 1.0);
                if term.norm() < 1e-16 {
                    quiet += 1;
                    if quiet >= 5 {
                        return Ok(-sum);
                    }
                } else {
                    quiet = 0;
                }
            }
            Err(HelmholtzError::SeriesDivergence(MAX_TERMS))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_scatterer, discretize, disk, ScattererParams};

    fn unit_disk(panels: usize) -> DiscretizedBoundary {
        discretize(&disk(1.0, C::new(0.0, 0.0)).unwrap(), 16, panels, 0).unwrap()
    }

    fn rel(a: C, b: C) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_data_gives_zero_density() {
        let bdy = unit_disk(8);
        let plan = BoundaryPlan::new(&bdy);
        let freq = ComplexFrequency::new(3.0, 0.0, 1.0).unwrap();
        let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
        let d = a.solve_density(&vec![C::new(0.0, 0.0); bdy.len()]).unwrap();
        assert!(d.values.iter().all(|v| *v == C::new(0.0, 0.0)));
    }

    #[test]
    fn rejects_bad_frequency() {
        assert!(ComplexFrequency::new(1.0, -0.1, 1.0).is_err());
        assert!(ComplexFrequency::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn disk_matches_mie_series() {
        let bdy = unit_disk(16);
        let plan = BoundaryPlan::new(&bdy);
        let targets: Vec<C> = (0..16).map(|k| C::from_polar(2.0, 2.0 * PI * k as f64 / 16.0 + 0.1)).collect();
        let tplan = TargetPlan::new(&bdy, &targets, DEFAULT_H_SAFE);
        for &delta in &[0.0, 0.02] {
            let freq = ComplexFrequency::new(5.0, delta, 1.0).unwrap();
            let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
            let k = freq.kappa();
            let rhs: Vec<C> = bdy.points.iter().map(|p| -(C::new(0.0, 1.0) * k * p.z.re).exp()).collect();
            let phi = a.solve_density(&rhs).unwrap();
            assert!(phi.residual < 1e-12);
            let u = evaluate_field(&bdy, &tplan, &phi).unwrap();
            let exact = disk_series_reference(1.0, freq, C::new(1.0, 0.0), &targets).unwrap();
            for (a, b) in u.iter().zip(&exact) {
                assert!(rel(a.unwrap(), *b) < 1e-10, "delta={delta}: {} vs {b}", a.unwrap());
            }
        }
    }

    #[test]
    fn mie_series_satisfies_boundary_condition() {
        let freq = ComplexFrequency::new(5.0, 0.02, 1.0).unwrap();
        let k = freq.kappa();
        let pts: Vec<C> = (0..12).map(|j| C::from_polar(1.0, 0.5 * j as f64)).collect();
        let us = disk_series_reference(1.0, freq, C::new(1.0, 0.0), &pts).unwrap();
        for (z, u) in pts.iter().zip(&us) {
            let inc = (C::new(0.0, 1.0) * k * z.re).exp();
            assert!((u + inc).norm() < 1e-10);
        }
    }

    #[test]
    fn near_boundary_targets_are_accurate() {
        let bdy = unit_disk(12);
        let plan = BoundaryPlan::new(&bdy);
        let freq = ComplexFrequency::new(4.0, 0.01, 1.0).unwrap();
        let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
        let src = C::new(0.2, -0.1);
        let rhs: Vec<C> = bdy.points.iter().map(|p| point_source(freq.kappa(), src, p.z).unwrap()).collect();
        let phi = a.solve_density(&rhs).unwrap();
        let targets: Vec<C> = [1.5, 1.1, 1.01, 1.001, 1.0001].iter().map(|&r| C::from_polar(r, 0.77)).collect();
        let tplan = TargetPlan::new(&bdy, &targets, DEFAULT_H_SAFE);
        let u = evaluate_field(&bdy, &tplan, &phi).unwrap();
        for (x, v) in targets.iter().zip(&u) {
            let exact = point_source(freq.kappa(), src, *x).unwrap();
            assert!(rel(v.unwrap(), exact) < 1e-9, "{x}: {:.2e}", rel(v.unwrap(), exact));
        }
    }

    #[test]
    fn masks_interior_targets() {
        let bdy = unit_disk(8);
        let tplan = TargetPlan::new(&bdy, &[C::new(0.0, 0.0), C::new(1.0 + 1e-12, 0.0), C::new(3.0, 0.0)], DEFAULT_H_SAFE);
        assert_eq!(tplan.mask, vec![Some(MaskReason::InsideScatterer), Some(MaskReason::NearBoundary), None]);
    }

    #[test]
    fn crescents_interior_source() {
        let curve = build_scatterer("crescents", &ScattererParams::new()).unwrap();
        let bdy = discretize(&curve, 16, 96, 0).unwrap();
        let plan = BoundaryPlan::new(&bdy);
        let freq = ComplexFrequency::new(3.0, 0.01, 1.0).unwrap();
        let a = assemble_cfie(&bdy, &plan, freq, freq.default_coupling()).unwrap();
        // a point inside the first crescent's material
        let tester = MembershipTester::new(&curve);
        let node = bdy.points[bdy.len() / 4];
        let src = [1.0, 0.8, 0.6, 0.4, 0.3]
            .iter()
            .map(|d| node.z - node.normal * *d)
            .find(|&z| tester.classify(z) == Membership::Inside && tester.distance(z) > 0.25)
            .unwrap();
        let rhs: Vec<C> = bdy.points.iter().map(|p| point_source(freq.kappa(), src, p.z).unwrap()).collect();
        let phi = a.solve_density(&rhs).unwrap();
        let targets: Vec<C> = (0..20).map(|k| C::from_polar(25.0, 2.0 * PI * k as f64 / 20.0)).collect();
        let tplan = TargetPlan::new(&bdy, &targets, DEFAULT_H_SAFE);
        let u = evaluate_field(&bdy, &tplan, &phi).unwrap();
        for (x, v) in targets.iter().zip(&u) {
            let exact = point_source(freq.kappa(), src, *x).unwrap();
            assert!(rel(v.unwrap(), exact) < 1e-7, "{x}: {:.2e}", rel(v.unwrap(), exact));
        }
    }
}
