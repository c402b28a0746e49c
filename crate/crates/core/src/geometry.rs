//! Scatterer boundaries: parametric pieces, the named gallery, panel
//! discretization with dyadic corner refinement, and point membership.
//!
//! Points in the plane are represented as complex numbers throughout.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::{integrate_adaptive, legendre_all, GaussLegendre};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unknown scatterer '{0}' (expected disk, c_curve, crescents, keyhole or radiator)")]
    UnknownName(String),
    #[error("unknown parameter '{key}' for scatterer '{name}'")]
    UnknownParameter { name: String, key: String },
    #[error("invalid parameters for '{name}': {reason}")]
    InvalidParameters { name: String, reason: String },
    #[error("component {component} is not closed: gap {gap:.3e}")]
    NotClosed { component: usize, gap: f64 },
    #[error("degenerate parametrization on component {component}, piece {piece}")]
    Degenerate { component: usize, piece: usize },
    #[error("curve self-intersects near {point}")]
    SelfIntersection { point: C },
    #[error("discretization parameters out of range: {0}")]
    Discretization(String),
}

/// Elementary parametric shapes on the unit parameter interval `s in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `a + s (b - a)`
    Segment { a: C, b: C },
    /// `exp((1 - s) la + s lb)`, i.e. `a^(1-s) b^s` with principal logarithms.
    LogArc { la: C, lb: C },
    /// `center + radius e^{i((1 - s) th0 + s th1)}`
    CircleArc { center: C, radius: f64, th0: f64, th1: f64 },
    /// `e^{i b sin t} (3 + c tanh(a cos t)) d` with `t = 2 pi s`
    CCurve { a: f64, b: f64, c: f64, d: f64 },
    /// `e^{-2it} - a1/(e^{-2it} + a2) + d/2` with `t = pi s`
    Crescent { a1: f64, a2: f64, d: f64 },
}

impl Shape {
    /// Point, first and second derivative with respect to `s`.
    pub fn eval(&self, s: f64) -> (C, C, C) {
        let i = C::new(0.0, 1.0);
        match *self {
            Shape::Segment { a, b } => (a + (b - a) * s, b - a, C::new(0.0, 0.0)),
            Shape::LogArc { la, lb } => {
                let d = lb - la;
                let z = (la + d * s).exp();
                (z, z * d, z * d * d)
            }
            Shape::CircleArc { center, radius, th0, th1 } => {
                let dth = th1 - th0;
                let e = C::from_polar(radius, th0 + s * dth);
                (center + e, e * i * dth, -e * dth * dth)
            }
            Shape::CCurve { a, b, c, d } => {
                let t = 2.0 * PI * s;
                let (st, ct) = t.sin_cos();
                let u = a * ct;
                let th = u.tanh();
                let sech2 = 1.0 - th * th;
                let du = -a * st;
                let ddu = -a * ct;
                let rho = 3.0 + c * th;
                let drho = c * sech2 * du;
                let ddrho = c * (-2.0 * sech2 * th * du * du + sech2 * ddu);
                let phi = b * st;
                let dphi = b * ct;
                let ddphi = -b * st;
                let e = C::from_polar(d, phi);
                let z = e * rho;
                let dz = e * (i * dphi * rho + drho);
                let ddz = e * (-dphi * dphi * rho + 2.0 * i * dphi * drho + i * ddphi * rho + ddrho);
                let k = 2.0 * PI;
                (z, dz * k, ddz * k * k)
            }
            Shape::Crescent { a1, a2, d } => {
                let t = PI * s;
                let e = C::from_polar(1.0, -2.0 * t);
                let de = -2.0 * i * e;
                let dde = -4.0 * e;
                let q = e + a2;
                let z = e - a1 / q + d / 2.0;
                let g = 1.0 + a1 / (q * q);
                let dz = de * g;
                let ddz = dde * g - 2.0 * a1 * de * de / (q * q * q);
                (z, dz * PI, ddz * PI * PI)
            }
        }
    }
}

/// A shape placed in the plane by `scale * shape + shift`, optionally traversed
/// backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub shape: Shape,
    pub scale: C,
    pub shift: C,
    pub reversed: bool,
}

impl Piece {
    pub fn new(shape: Shape) -> Self {
        Self { shape, scale: C::new(1.0, 0.0), shift: C::new(0.0, 0.0), reversed: false }
    }

    /// Point, first and second derivative with respect to the piece parameter `s in [0, 1]`.
    pub fn eval(&self, s: f64) -> (C, C, C) {
        let (u, sign) = if self.reversed { (1.0 - s, -1.0) } else { (s, 1.0) };
        let (z, dz, ddz) = self.shape.eval(u);
        (self.scale * z + self.shift, self.scale * dz * sign, self.scale * ddz)
    }

    pub fn point(&self, s: f64) -> C {
        self.eval(s).0
    }

    pub fn arclength(&self) -> f64 {
        arclength_between(self, 0.0, 1.0)
    }

    fn transformed(&self, scale: C, shift: C) -> Self {
        Self { shape: self.shape.clone(), scale: scale * self.scale, shift: scale * self.shift + shift, reversed: self.reversed }
    }
}

fn arclength_between(piece: &Piece, s0: f64, s1: f64) -> f64 {
    integrate_adaptive(|s| C::new(piece.eval(s).1.norm(), 0.0), s0, s1, 8, 1e-14, 1e-15, 2_000_000)
        .map(|v| v.re)
        .unwrap_or_else(|e| e.estimate.re)
}

/// One closed loop of pieces. `corners[k]` marks a non-smooth joint at the
/// start of piece `k` (between piece `k - 1` and piece `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub pieces: Vec<Piece>,
    pub corners: Vec<bool>,
}

impl Component {
    /// Shoelace area of a dense sampling; positive for counterclockwise loops.
    pub fn signed_area(&self) -> f64 {
        let mut area = 0.0;
        for p in &self.pieces {
            let n = 256;
            for k in 0..n {
                let a = p.point(k as f64 / n as f64);
                let b = p.point((k + 1) as f64 / n as f64);
                area += a.re * b.im - b.re * a.im;
            }
        }
        0.5 * area
    }

    fn reverse(&mut self) {
        let n = self.pieces.len();
        self.pieces.reverse();
        for p in &mut self.pieces {
            p.reversed = !p.reversed;
        }
        // the joint at the start of new piece k was the joint at the end of
        // old piece n-1-k, i.e. the start of old piece n-k
        let old = self.corners.clone();
        for k in 0..n {
            self.corners[k] = old[(n - k) % n];
        }
    }
}

/// Closed, possibly multiply connected scatterer boundary. Every component is
/// oriented counterclockwise around the scatterer material, so the normal
/// `-i gamma'/|gamma'|` points into the exterior domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub name: String,
    pub components: Vec<Component>,
}

impl BoundaryCurve {
    /// Validates closure, non-degeneracy and (heuristically) simplicity, and
    /// normalizes orientation.
    pub fn new(name: impl Into<String>, mut components: Vec<Component>) -> Result<Self, GeometryError> {
        let diameter = {
            let pts: Vec<C> = components
                .iter()
                .flat_map(|c| c.pieces.iter())
                .flat_map(|p| (0..=16).map(move |k| p.point(k as f64 / 16.0)))
                .collect();
            let mut d: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    d = d.max((a - b).norm());
                }
            }
            d
        };
        for (ci, comp) in components.iter().enumerate() {
            assert_eq!(comp.pieces.len(), comp.corners.len());
            let n = comp.pieces.len();
            for k in 0..n {
                let end = comp.pieces[k].point(1.0);
                let start = comp.pieces[(k + 1) % n].point(0.0);
                let gap = (end - start).norm();
                if gap > 1e-12 * diameter.max(1e-300) {
                    return Err(GeometryError::NotClosed { component: ci, gap });
                }
            }
            for (pi, p) in comp.pieces.iter().enumerate() {
                let speeds: Vec<f64> = (0..=64).map(|k| p.eval(k as f64 / 64.0).1.norm()).collect();
                let max = speeds.iter().cloned().fold(0.0, f64::max);
                if !(max > 0.0) || speeds[1..64].iter().any(|&v| !(v > 1e-8 * max)) {
                    return Err(GeometryError::Degenerate { component: ci, piece: pi });
                }
            }
        }
        check_simple(&components)?;
        for comp in &mut components {
            if comp.signed_area() < 0.0 {
                comp.reverse();
            }
        }
        Ok(Self { name: name.into(), components })
    }

    pub fn corner_count(&self) -> usize {
        self.components.iter().flat_map(|c| c.corners.iter()).filter(|&&b| b).count()
    }

    pub fn piece_count(&self) -> usize {
        self.components.iter().map(|c| c.pieces.len()).sum()
    }

    pub fn arclength(&self) -> f64 {
        self.components.iter().flat_map(|c| c.pieces.iter()).map(Piece::arclength).sum()
    }

    /// Dense polyline sampling with roughly uniform arclength spacing.
    /// Returns exactly `points` samples in total (at least two per piece),
    /// split across components; the closing point is not repeated.
    pub fn polyline(&self, points: usize) -> Vec<Vec<C>> {
        let pieces: Vec<(usize, &Piece)> = self
            .components
            .iter()
            .enumerate()
            .flat_map(|(c, comp)| comp.pieces.iter().map(move |p| (c, p)))
            .collect();
        let total = self.arclength();
        let budget = points.max(2 * pieces.len());
        let share: Vec<f64> = pieces.iter().map(|(_, p)| budget as f64 * p.arclength() / total).collect();
        let mut counts: Vec<usize> = share.iter().map(|s| (s.floor() as usize).max(2)).collect();
        // Largest remainder first, then trim from the biggest pieces if the floor of 2 overshot.
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| (share[b] - share[b].floor()).total_cmp(&(share[a] - share[a].floor())));
        let mut used: usize = counts.iter().sum();
        for &i in order.iter().cycle().take(4 * counts.len()) {
            if used >= budget {
                break;
            }
            counts[i] += 1;
            used += 1;
        }
        while used > budget {
            let i = (0..counts.len()).max_by_key(|&i| counts[i]).unwrap_or(0);
            counts[i] -= 1;
            used -= 1;
        }
        let mut out = vec![Vec::new(); self.components.len()];
        for ((c, p), k) in pieces.iter().zip(counts) {
            for j in 0..k {
                out[*c].push(p.point(j as f64 / k as f64));
            }
        }
        out
    }

    /// Point membership (see [`MembershipTester`]); builds a tester per call.
    pub fn contains(&self, point: C) -> Membership {
        MembershipTester::new(self).classify(point)
    }
}

fn segments_cross(a: C, b: C, c: C, d: C) -> bool {
    let orient = |p: C, q: C, r: C| (q - p).re * (r - p).im - (q - p).im * (r - p).re;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Sampled self-intersection heuristic: proper crossings between
/// non-adjacent chords of a 64-per-piece polyline, pruned by piece bounding boxes.
fn check_simple(components: &[Component]) -> Result<(), GeometryError> {
    const K: usize = 64;
    struct PieceSamples {
        pts: Vec<C>,
        lo: C,
        hi: C,
        next: usize,
    }
    let mut all = Vec::new();
    for comp in components {
        let base = all.len();
        let n = comp.pieces.len();
        for (k, p) in comp.pieces.iter().enumerate() {
            let pts: Vec<C> = (0..=K).map(|k| p.point(k as f64 / K as f64)).collect();
            let lo = C::new(
                pts.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
                pts.iter().map(|z| z.im).fold(f64::INFINITY, f64::min),
            );
            let hi = C::new(
                pts.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
                pts.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max),
            );
            all.push(PieceSamples { pts, lo, hi, next: base + (k + 1) % n });
        }
    }
    for i in 0..all.len() {
        for j in i..all.len() {
            let (a, b) = (&all[i], &all[j]);
            if a.hi.re < b.lo.re || b.hi.re < a.lo.re || a.hi.im < b.lo.im || b.hi.im < a.lo.im {
                continue;
            }
            for p in 0..K {
                for q in 0..K {
                    let joint = |x: usize, px: usize, y: usize, py: usize| all[x].next == y && px == K - 1 && py == 0;
                    if (i == j && p.abs_diff(q) <= 1) || joint(i, p, j, q) || joint(j, q, i, p) {
                        continue;
                    }
                    if segments_cross(a.pts[p], a.pts[p + 1], b.pts[q], b.pts[q + 1]) {
                        return Err(GeometryError::SelfIntersection { point: a.pts[p] });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Named scatterer parameters; missing keys take the gallery defaults.
pub type ScattererParams = BTreeMap<String, f64>;

fn take(name: &str, params: &ScattererParams, allowed: &[(&str, f64)]) -> Result<Vec<f64>, GeometryError> {
    for key in params.keys() {
        if !allowed.iter().any(|(k, _)| k == key) {
            return Err(GeometryError::UnknownParameter { name: name.into(), key: key.clone() });
        }
    }
    Ok(allowed.iter().map(|(k, d)| params.get(*k).copied().unwrap_or(*d)).collect())
}

fn invalid(name: &str, reason: impl Into<String>) -> GeometryError {
    GeometryError::InvalidParameters { name: name.into(), reason: reason.into() }
}

/// Gallery names with their parameter keys and defaults.
pub const GALLERY: &[(&str, &[(&str, f64)])] = &[
    ("disk", &[("radius", 1.0), ("center_x", 0.0), ("center_y", 0.0)]),
    ("c_curve", &[("a", 3.0), ("b", 2.8), ("c", 0.1), ("d", 1.0)]),
    ("crescents", &[("r", 5.0), ("a1", 0.24), ("a2", 0.9), ("d", 3.0)]),
    ("keyhole", &[("R", 3.0), ("r", 2.0), ("e", 0.3), ("theta", PI)]),
    (
        "radiator",
        &[("r", 1.5), ("R", 5.0), ("e", 0.8), ("outr", 0.8), ("deltatheta", 0.15), ("n", 5.0), ("btheta", 1.25 * PI)],
    ),
];

pub fn build_scatterer(name: &str, params: &ScattererParams) -> Result<BoundaryCurve, GeometryError> {
    let defaults = GALLERY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
        .ok_or_else(|| GeometryError::UnknownName(name.into()))?;
    let v = take(name, params, defaults)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(name, "parameters must be finite"));
    }
    match name {
        "disk" => disk(v[0], C::new(v[1], v[2])),
        "c_curve" => c_curve(v[0], v[1], v[2], v[3]),
        "crescents" => crescents(v[0], v[1], v[2], v[3]),
        "keyhole" => keyhole(v[0], v[1], v[2], v[3]),
        "radiator" => radiator(v[0], v[1], v[2], v[3], v[4], v[5], v[6]),
        _ => unreachable!(),
    }
}

pub fn disk(radius: f64, center: C) -> Result<BoundaryCurve, GeometryError> {
    if !(radius > 0.0) {
        return Err(invalid("disk", "radius must be positive"));
    }
    let piece = Piece::new(Shape::CircleArc { center, radius, th0: 0.0, th1: 2.0 * PI });
    BoundaryCurve::new("disk", vec![Component { pieces: vec![piece], corners: vec![false] }])
}

pub fn c_curve(a: f64, b: f64, c: f64, d: f64) -> Result<BoundaryCurve, GeometryError> {
    if !(d > 0.0) || !(c.abs() < 3.0) || !(b.abs() < PI) {
        return Err(invalid("c_curve", "need d > 0, |c| < 3 and |b| < pi"));
    }
    let piece = Piece::new(Shape::CCurve { a, b, c, d });
    BoundaryCurve::new("c_curve", vec![Component { pieces: vec![piece], corners: vec![false] }])
}

pub fn crescents(r: f64, a1: f64, a2: f64, d: f64) -> Result<BoundaryCurve, GeometryError> {
    if !(r > 0.0) || !(a2.abs() != 1.0) {
        return Err(invalid("crescents", "need r > 0 and |a2| != 1"));
    }
    let rot = C::new(0.0, r);
    let shape = Shape::Crescent { a1, a2, d };
    let first = Piece::new(shape.clone()).transformed(C::new(1.0, 0.0), C::new(0.0, 1.0)).transformed(rot, C::new(0.0, 0.0));
    let second = Piece::new(shape).transformed(C::new(-1.0, 0.0), C::new(0.0, 0.0)).transformed(rot, C::new(0.0, 0.0));
    BoundaryCurve::new(
        "crescents",
        vec![
            Component { pieces: vec![first], corners: vec![false] },
            Component { pieces: vec![second], corners: vec![false] },
        ],
    )
}

pub fn keyhole(big_r: f64, r: f64, e: f64, theta: f64) -> Result<BoundaryCurve, GeometryError> {
    if !(big_r > r && r > 0.0 && e > 0.0 && e < r) {
        return Err(invalid("keyhole", "need R > r > e > 0"));
    }
    let c = [C::new(-big_r, e), C::new(-r, e), C::new(-r, -e), C::new(-big_r, -e)];
    let pieces = vec![
        Piece::new(Shape::Segment { a: c[0], b: c[1] }),
        Piece::new(Shape::LogArc { la: c[1].ln(), lb: c[2].ln() }),
        Piece::new(Shape::Segment { a: c[2], b: c[3] }),
        Piece::new(Shape::LogArc { la: c[3].ln(), lb: c[0].ln() }),
    ];
    let rot = C::from_polar(1.0, PI + theta);
    let pieces = pieces.iter().map(|p| p.transformed(rot, C::new(0.0, 0.0))).collect();
    BoundaryCurve::new("keyhole", vec![Component { pieces, corners: vec![true; 4] }])
}

/// Number of petals the radiator keeps for a given `n`.
pub fn radiator_petal_count(n: usize) -> usize {
    if (n + 1) % 2 == 0 {
        n
    } else {
        n + 1
    }
}

#[allow(clippy::too_many_arguments)]
pub fn radiator(
    r: f64,
    big_r: f64,
    e: f64,
    outr: f64,
    deltatheta: f64,
    n: f64,
    btheta: f64,
) -> Result<BoundaryCurve, GeometryError> {
    let name = "radiator";
    if !(n >= 1.0 && n.fract() == 0.0 && n <= 64.0) {
        return Err(invalid(name, "n must be a positive integer"));
    }
    if !(big_r > r && r > e && e > 0.0 && outr > 0.0 && deltatheta > 0.0) {
        return Err(invalid(name, "need R > r > e > 0, outr > 0, deltatheta > 0"));
    }
    let n = n as usize;
    // petal angles, those >= pi first; the petal at exactly pi collides with
    // the slot and is dropped (integer test instead of a float comparison)
    let mut ks: Vec<usize> = (0..=n).filter(|&k| 2 * k >= n + 1).collect();
    ks.extend((0..=n).filter(|&k| 2 * k < n + 1));
    ks.retain(|&k| 2 * k != n + 1);
    let thetas: Vec<f64> = ks.iter().map(|&k| 2.0 * k as f64 * PI / (n + 1) as f64).collect();
    let centers: Vec<C> = thetas.iter().map(|&t| C::from_polar((big_r + r) / 2.0, t)).collect();

    let i = C::new(0.0, 1.0);
    let mut c = vec![-big_r - e * i, -r - e * i];
    for (&theta, &cent) in thetas.iter().zip(&centers) {
        c.push(C::from_polar(r, theta - deltatheta));
        c.push(cent + C::from_polar(outr, theta + r / outr * deltatheta + PI));
        c.push(cent + C::from_polar(outr, theta - r / outr * deltatheta + PI));
        c.push(C::from_polar(r, theta + deltatheta));
    }
    c.push(-r + e * i);
    c.push(-big_r + e * i);
    let nn = c.len();

    let seg = |a: C, b: C| Piece::new(Shape::Segment { a, b });
    let arc = |a: C, b: C| Piece::new(Shape::LogArc { la: a.ln(), lb: b.ln() });
    let mut pieces = vec![seg(c[0], c[1])];
    // 1-based i1 = 2, 6, ..., nn - 4 in the original indexing
    let mut petal = 0;
    let mut i1 = 1;
    while i1 + 4 < nn {
        pieces.push(arc(c[i1], c[i1 + 1]));
        pieces.push(seg(c[i1 + 1], c[i1 + 2]));
        let cent = centers[petal];
        let start = (c[i1 + 2] - cent).arg();
        let mut end = (c[i1 + 3] - cent).arg();
        if (end - start).abs() < PI {
            end += 2.0 * PI;
        }
        pieces.push(Piece::new(Shape::CircleArc { center: cent, radius: outr, th0: start, th1: end }));
        pieces.push(seg(c[i1 + 3], c[i1 + 4]));
        petal += 1;
        i1 += 4;
    }
    pieces.push(arc(c[nn - 3], c[nn - 2]));
    pieces.push(seg(c[nn - 2], c[nn - 1]));
    pieces.push(arc(c[nn - 1], c[0]));

    // gam = e^{i(pi + Btheta)} gam1(2 pi - t): rotate and traverse backwards
    let rot = C::from_polar(1.0, PI + btheta);
    let mut comp = Component { corners: vec![true; pieces.len()], pieces };
    comp.reverse();
    comp.pieces = comp.pieces.iter().map(|p| p.transformed(rot, C::new(0.0, 0.0))).collect();
    BoundaryCurve::new(name, vec![comp])
}

/// One Gauss-Legendre panel on a piece parameter interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub component: usize,
    /// Global piece index (pieces numbered across components).
    pub piece: usize,
    pub s0: f64,
    pub s1: f64,
    /// Number of dyadic corner splits that produced this panel.
    pub level: u32,
    pub first_node: usize,
    pub length: f64,
}

/// Point data of a boundary location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub z: C,
    /// Unit outward normal.
    pub normal: C,
    /// `|d gamma / d tau|` in the panel-local parameter `tau in [-1, 1]`.
    pub speed: f64,
    /// Signed curvature (positive where the material is locally convex).
    pub curvature: f64,
}

#[derive(Debug, Clone)]
pub struct DiscretizedBoundary {
    pub curve: BoundaryCurve,
    pub rule: GaussLegendre,
    pub panels: Vec<Panel>,
    pub points: Vec<BoundaryPoint>,
    /// Arclength quadrature weights (Gauss weight times `speed`).
    pub weights: Vec<f64>,
    pub node_panel: Vec<usize>,
    pub node_piece: Vec<usize>,
    pieces: Vec<Piece>,
}

impl DiscretizedBoundary {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.rule.len()
    }

    pub fn node(&self, i: usize) -> C {
        self.points[i].z
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_panel_length(&self) -> f64 {
        self.panels.iter().map(|p| p.length).fold(0.0, f64::max)
    }

    pub fn min_panel_length(&self) -> f64 {
        self.panels.iter().map(|p| p.length).fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between two nodes (cheap bounding estimate).
    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = (C::new(f64::INFINITY, f64::INFINITY), C::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &self.points {
            lo = C::new(lo.re.min(p.z.re), lo.im.min(p.z.im));
            hi = C::new(hi.re.max(p.z.re), hi.im.max(p.z.im));
        }
        (hi - lo).norm()
    }

    /// Boundary point at panel-local parameter `tau in [-1, 1]`.
    pub fn panel_point(&self, panel: usize, tau: f64) -> BoundaryPoint {
        let p = &self.panels[panel];
        let half = 0.5 * (p.s1 - p.s0);
        let s = 0.5 * (p.s0 + p.s1) + half * tau;
        boundary_point(&self.pieces[p.piece], s, half)
    }
}

fn boundary_point(piece: &Piece, s: f64, half: f64) -> BoundaryPoint {
    let (z, dz, ddz) = piece.eval(s);
    let sp = dz.norm();
    BoundaryPoint {
        z,
        normal: C::new(dz.im, -dz.re) / sp,
        speed: sp * half,
        curvature: (dz.conj() * ddz).im / (sp * sp * sp),
    }
}

/// Composite Gauss-Legendre discretization. `base_panels` are distributed over
/// the pieces in proportion to arclength (at least one each); panels away from
/// corners are bisected until the parametrization is resolved, and every panel
/// touching a corner is split dyadically `corner_depth` times toward it.
pub fn discretize(
    curve: &BoundaryCurve,
    nodes_per_panel: usize,
    base_panels: usize,
    corner_depth: u32,
) -> Result<DiscretizedBoundary, GeometryError> {
    discretize_with_resolution(curve, nodes_per_panel, base_panels, corner_depth, PANEL_RESOLUTION)
}

/// As [`discretize`] with an explicit panel resolution tolerance.
pub fn discretize_with_resolution(
    curve: &BoundaryCurve,
    nodes_per_panel: usize,
    base_panels: usize,
    corner_depth: u32,
    resolution: f64,
) -> Result<DiscretizedBoundary, GeometryError> {
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(GeometryError::Discretization("resolution must lie in (0, 1)".into()));
    }
    if nodes_per_panel < 4 {
        return Err(GeometryError::Discretization("nodes_per_panel must be at least 4".into()));
    }
    if base_panels == 0 {
        return Err(GeometryError::Discretization("base_panels must be positive".into()));
    }
    if corner_depth > 52 {
        return Err(GeometryError::Discretization("corner_depth above 52 exhausts double precision".into()));
    }
    let rule = GaussLegendre::new(nodes_per_panel);
    let pieces: Vec<(usize, Piece, bool, bool)> = curve
        .components
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| {
            let n = comp.pieces.len();
            comp.pieces
                .iter()
                .enumerate()
                .map(move |(k, p)| (ci, p.clone(), comp.corners[k], comp.corners[(k + 1) % n]))
        })
        .collect();
    let lengths: Vec<f64> = pieces.iter().map(|(_, p, _, _)| p.arclength()).collect();
    let total: f64 = lengths.iter().sum();

    let mut panels = Vec::new();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut node_panel = Vec::new();
    let mut node_piece = Vec::new();
    for (pi, ((ci, piece, corner_start, corner_end), len)) in pieces.iter().zip(&lengths).enumerate() {
        let mut count = ((base_panels as f64 * len / total).round() as usize).max(1);
        if *corner_start && *corner_end && corner_depth > 0 {
            count = count.max(2);
        }
        let breaks = equal_arclength_breaks(piece, count);
        let mut intervals: Vec<(f64, f64, u32)> = Vec::new();
        for k in 0..count {
            let s0 = breaks[k];
            let s1 = breaks[k + 1];
            let refine_start = *corner_start && k == 0 && corner_depth > 0;
            let refine_end = *corner_end && k + 1 == count && corner_depth > 0;
            if refine_start {
                let h = s1 - s0;
                let mut cuts: Vec<f64> = (0..corner_depth).map(|l| s0 + h / 2f64.powi((corner_depth - l) as i32)).collect();
                cuts.insert(0, s0);
                cuts.push(s1);
                for (l, w) in cuts.windows(2).enumerate() {
                    let level = if l == 0 { corner_depth } else { corner_depth + 1 - l as u32 };
                    intervals.push((w[0], w[1], level));
                }
            } else if refine_end {
                let h = s1 - s0;
                let mut cuts: Vec<f64> = (0..corner_depth).map(|l| s1 - h / 2f64.powi((l + 1) as i32)).collect();
                cuts.insert(0, s0);
                cuts.push(s1);
                for (l, w) in cuts.windows(2).enumerate() {
                    let level = (l as u32 + 1).min(corner_depth);
                    intervals.push((w[0], w[1], level));
                }
            } else {
                resolve_interval(piece, s0, s1, resolution, 0, &mut intervals);
            }
        }
        for (s0, s1, level) in intervals {
            let half = 0.5 * (s1 - s0);
            let first = points.len();
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let bp = boundary_point(piece, 0.5 * (s0 + s1) + half * t, half);
                weights.push(w * bp.speed);
                points.push(bp);
                node_panel.push(panels.len());
                node_piece.push(pi);
            }
            let length = weights[first..].iter().sum();
            panels.push(Panel { component: *ci, piece: pi, s0, s1, level, first_node: first, length });
        }
    }
    Ok(DiscretizedBoundary {
        curve: curve.clone(),
        rule,
        panels,
        points,
        weights,
        node_panel,
        node_piece,
        pieces: pieces.into_iter().map(|(_, p, _, _)| p).collect(),
    })
}

/// Relative Legendre tail of `gamma'` and `|gamma'|` below which a panel counts as resolved.
pub const PANEL_RESOLUTION: f64 = 1e-8;
const MAX_RESOLVE_DEPTH: u32 = 20;

/// Pushes `[s0, s1]`, bisected until `gamma'` and the speed are resolved by a 16-term
/// Legendre expansion. Independent of `nodes_per_panel`.
fn resolve_interval(piece: &Piece, s0: f64, s1: f64, tol: f64, depth: u32, out: &mut Vec<(f64, f64, u32)>) {
    const N: usize = 16;
    thread_local! {
        static RULE: (GaussLegendre, Vec<Vec<f64>>) = {
            let rule = GaussLegendre::new(N);
            let poly = rule.nodes.iter().map(|&x| legendre_all(N - 1, x)).collect();
            (rule, poly)
        };
    }
    let resolved = RULE.with(|(rule, poly)| {
        let half = 0.5 * (s1 - s0);
        let vals: Vec<C> = rule.nodes.iter().map(|&x| piece.eval(0.5 * (s0 + s1) + half * x).1).collect();
        let speeds: Vec<C> = vals.iter().map(|v| C::new(v.norm(), 0.0)).collect();
        let tail = |f: &[C]| {
            let coeffs: Vec<f64> = (0..N)
                .map(|k| {
                    let sum: C = f.iter().zip(&rule.weights).zip(poly).map(|((v, w), p)| v * (w * p[k])).sum();
                    (sum * (k as f64 + 0.5)).norm()
                })
                .collect();
            let max = coeffs.iter().cloned().fold(0.0, f64::max);
            coeffs[N - 2].max(coeffs[N - 1]) / max
        };
        // the speed has branch points where gamma' nearly vanishes
        tail(&vals).max(tail(&speeds)) <= tol
    });
    if resolved || depth >= MAX_RESOLVE_DEPTH {
        out.push((s0, s1, 0));
    } else {
        let mid = 0.5 * (s0 + s1);
        resolve_interval(piece, s0, mid, tol, depth + 1, out);
        resolve_interval(piece, mid, s1, tol, depth + 1, out);
    }
}

/// Parameter values splitting a piece into `count` arcs of (nearly) equal length.
fn equal_arclength_breaks(piece: &Piece, count: usize) -> Vec<f64> {
    const CELLS: usize = 1024;
    let rule = GaussLegendre::new(8);
    let cell = |a: f64, b: f64| -> f64 {
        let (x, w) = rule.mapped(a, b);
        x.iter().zip(&w).map(|(s, w)| w * piece.eval(*s).1.norm()).sum()
    };
    let mut cumulative = vec![0.0; CELLS + 1];
    for k in 0..CELLS {
        cumulative[k + 1] = cumulative[k] + cell(k as f64 / CELLS as f64, (k + 1) as f64 / CELLS as f64);
    }
    let total = cumulative[CELLS];
    let mut breaks = vec![0.0; count + 1];
    breaks[count] = 1.0;
    for (k, b) in breaks.iter_mut().enumerate().take(count).skip(1) {
        let target = total * k as f64 / count as f64;
        let c = cumulative.partition_point(|&v| v <= target).clamp(1, CELLS) - 1;
        let base = c as f64 / CELLS as f64;
        let (mut lo, mut hi) = (base, (c + 1) as f64 / CELLS as f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cumulative[c] + cell(base, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *b = 0.5 * (lo + hi);
    }
    breaks
}

/// Result of a point-membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// In the scatterer material (not part of the exterior domain).
    Inside,
    /// In the exterior domain.
    Outside,
    /// Within `1e-9` of the boundary.
    Indeterminate,
}

/// Reusable point classifier: winding number of a fine polygon, with an exact
/// closest-point refinement for points near the polygon.
#[derive(Debug, Clone)]
pub struct MembershipTester {
    pieces: Vec<Piece>,
    /// (start, end, piece, s_start, s_end)
    edges: Vec<(C, C, usize, f64, f64)>,
    band: f64,
}

pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

impl MembershipTester {
    pub fn new(curve: &BoundaryCurve) -> Self {
        let mut pieces = Vec::new();
        let mut edges = Vec::new();
        let mut band: f64 = 0.0;
        let diameter_scale = curve.arclength();
        for comp in &curve.components {
            for p in &comp.pieces {
                let pi = pieces.len();
                pieces.push(p.clone());
                let k = ((4096.0 * p.arclength() / diameter_scale).ceil() as usize).clamp(16, 4096);
                for j in 0..k {
                    let s0 = j as f64 / k as f64;
                    let s1 = (j + 1) as f64 / k as f64;
                    let a = p.point(s0);
                    let b = p.point(s1);
                    let mid = p.point(0.5 * (s0 + s1));
                    band = band.max(point_segment_distance(mid, a, b));
                    edges.push((a, b, pi, s0, s1));
                }
            }
        }
        Self { pieces, edges, band: 4.0 * band + BOUNDARY_TOLERANCE }
    }

    /// Distance from `z` to the boundary (exact up to Newton convergence).
    pub fn distance(&self, z: C) -> f64 {
        let (d, edge) = self.nearest_edge(z);
        if d > self.band {
            return d;
        }
        self.refine(z, edge).0
    }

    fn nearest_edge(&self, z: C) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (k, (a, b, ..)) in self.edges.iter().enumerate() {
            let d = point_segment_distance(z, *a, *b);
            if d < best.0 {
                best = (d, k);
            }
        }
        best
    }

    /// Closest point on the true piece near `edge`; returns (distance, side)
    /// with `side > 0` on the exterior side.
    fn refine(&self, z: C, edge: usize) -> (f64, f64) {
        let (_, _, pi, s0, s1) = self.edges[edge];
        let piece = &self.pieces[pi];
        let h = s1 - s0;
        let (lo, hi) = ((s0 - h).max(0.0), (s1 + h).min(1.0));
        // golden-section on |gamma(s) - z|^2 then Newton polish
        let f = |s: f64| (piece.point(s) - z).norm_sqr();
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..60 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        let mut s = 0.5 * (a + b);
        for _ in 0..4 {
            let (p, dp, ddp) = piece.eval(s);
            let r = p - z;
            let d1 = (r.conj() * dp).re;
            let d2 = dp.norm_sqr() + (r.conj() * ddp).re;
            if d2 <= 0.0 {
                break;
            }
            let next = (s - d1 / d2).clamp(lo, hi);
            s = next;
        }
        let (p, dp, _) = piece.eval(s);
        let normal = C::new(dp.im, -dp.re) / dp.norm();
        let r = z - p;
        (r.norm(), (r.conj() * normal).re)
    }

    fn winding(&self, z: C) -> i32 {
        let mut w = 0;
        for (a, b, ..) in &self.edges {
            if a.im <= z.im {
                if b.im > z.im && cross(*b - *a, z - *a) > 0.0 {
                    w += 1;
                }
            } else if b.im <= z.im && cross(*b - *a, z - *a) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    pub fn classify(&self, z: C) -> Membership {
        let (d, edge) = self.nearest_edge(z);
        if d > self.band {
            return if self.winding(z) != 0 { Membership::Inside } else { Membership::Outside };
        }
        let (dist, side) = self.refine(z, edge);
        if dist <= BOUNDARY_TOLERANCE {
            Membership::Indeterminate
        } else if dist > 4.0 * BOUNDARY_TOLERANCE && side.abs() > 0.5 * dist {
            if side > 0.0 {
                Membership::Outside
            } else {
                Membership::Inside
            }
        } else if self.winding(z) != 0 {
            // next to a corner the normal test is unreliable
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
}

fn cross(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

pub fn point_segment_distance(z: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a).conj() * ab).re / l2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}
