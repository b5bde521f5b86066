//! Edges and wedges on three spacetime backends: Minkowski space,
//! the de Sitter hyperboloid in five ambient dimensions, and spatially
//! flat FRW spacetimes through their conformal chart.
//!
//! Minkowski wedges are stored in a canonical redundancy-free form: the
//! two null boundary covectors, normalized to unit time component and
//! ordered by its sign, plus the least-Euclidean-norm point of the edge.
//! Two wedges are equal iff these data agree componentwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GEOM_TOL: f64 = 1e-10;
pub const NULL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("points or wedges live on different backends")]
    BackendMismatch,
    #[error("operation not supported on this backend: {0}")]
    UnsupportedBackend(&'static str),
    #[error("point is not on the unit hyperboloid: x.x = {got}")]
    NotOnHyperboloid { got: f64 },
    #[error("matrix does not preserve the metric within tolerance (residual {residual})")]
    NotIsometry { residual: f64 },
    #[error("boundary covector is not null: norm {got}")]
    CovectorNotNull { got: f64 },
    #[error("boundary covectors must have opposite time-component signs")]
    CovectorOrientation,
    #[error("killing pair is degenerate or not spacelike")]
    DegenerateKillingPair,
    #[error("coordinate {value} outside the chart interval ({lo}, {hi})")]
    ChartRange { value: f64, lo: f64, hi: f64 },
    #[error("scale factor must be positive on the interval, found a({t}) = {a}")]
    BadScaleFactor { t: f64, a: f64 },
    #[error("analytic inclusion verdict {verdict} contradicted by sample point {point:?}")]
    SamplingContradiction { verdict: &'static str, point: [f64; 4] },
    #[error("conformal time {tau} not attained on the chart interval")]
    TauNotBracketed { tau: f64 },
}

/// Mostly-plus-free conventions: signature (+,-,-,-) in four dimensions
/// and (+,-,-,-,-) for the five-dimensional ambient space.
pub fn mink4(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3]
}

pub fn mink5(u: &[f64; 5], v: &[f64; 5]) -> f64 {
    u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3] - u[4] * v[4]
}

fn dot4(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    (0..4).map(|i| u[i] * v[i]).sum()
}

fn sub4(u: &[f64; 4], v: &[f64; 4]) -> [f64; 4] {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2], u[3] - v[3]]
}

pub fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat4_apply(a: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

pub fn mat5_mul(a: &[[f64; 5]; 5], b: &[[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let mut c = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            c[i][j] = (0..5).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat5_apply(a: &[[f64; 5]; 5], v: &[f64; 5]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = (0..5).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

/// Inverse of a Lorentz matrix via the metric, `eta Lambda^T eta`; exact
/// up to rounding, no linear solve needed.
pub fn lorentz4_inverse(l: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let eta = |i: usize| if i == 0 { 1.0 } else { -1.0 };
    let mut inv = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            inv[i][j] = eta(i) * l[j][i] * eta(j);
        }
    }
    inv
}

pub fn lorentz5_inverse(l: &[[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let eta = |i: usize| if i == 0 { 1.0 } else { -1.0 };
    let mut inv = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            inv[i][j] = eta(i) * l[j][i] * eta(j);
        }
    }
    inv
}

fn lorentz4_residual(l: &[[f64; 4]; 4]) -> f64 {
    let inv = lorentz4_inverse(l);
    let prod = mat4_mul(&inv, l);
    let mut r: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((prod[i][j] - target).abs());
        }
    }
    r
}

fn lorentz5_residual(l: &[[f64; 5]; 5]) -> f64 {
    let inv = lorentz5_inverse(l);
    let prod = mat5_mul(&inv, l);
    let mut r: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((prod[i][j] - target).abs());
        }
    }
    r
}

/// Boost with rapidity `s` along the spatial unit direction `e`.
pub fn lorentz_boost(e: [f64; 3], s: f64) -> [[f64; 4]; 4] {
    let norm = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    let n = [e[0] / norm, e[1] / norm, e[2] / norm];
    let (ch, sh) = (s.cosh(), s.sinh());
    let mut l = [[0.0; 4]; 4];
    l[0][0] = ch;
    for i in 0..3 {
        l[0][i + 1] = sh * n[i];
        l[i + 1][0] = sh * n[i];
        for j in 0..3 {
            l[i + 1][j + 1] = (if i == j { 1.0 } else { 0.0 }) + (ch - 1.0) * n[i] * n[j];
        }
    }
    l
}

/// Spatial rotation by `angle` about the axis (Rodrigues form), embedded
/// as a Lorentz matrix fixing time.
pub fn spatial_rotation(axis: [f64; 3], angle: f64) -> [[f64; 4]; 4] {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let n = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let (c, s) = (angle.cos(), angle.sin());
    let mut l = [[0.0; 4]; 4];
    l[0][0] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let eps: f64 = match (i, j) {
                (0, 1) => -n[2],
                (1, 0) => n[2],
                (0, 2) => n[1],
                (2, 0) => -n[1],
                (1, 2) => -n[0],
                (2, 1) => n[0],
                _ => 0.0,
            };
            l[i + 1][j + 1] = c * delta + (1.0 - c) * n[i] * n[j] - s * eps;
        }
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Minkowski4,
    DeSitter5,
    Frw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimePoint {
    pub backend: Backend,
    pub coords: Vec<f64>,
}

impl SpacetimePoint {
    pub fn minkowski(x: [f64; 4]) -> Self {
        Self { backend: Backend::Minkowski4, coords: x.to_vec() }
    }

    /// Ambient five-vector on the unit hyperboloid `x.x = -1`.
    pub fn desitter(x: [f64; 5]) -> Result<Self, GeometryError> {
        let norm = mink5(&x, &x);
        if (norm + 1.0).abs() > NULL_TOL.max(1e-12 * (1.0 + norm.abs())) {
            return Err(GeometryError::NotOnHyperboloid { got: norm });
        }
        Ok(Self { backend: Backend::DeSitter5, coords: x.to_vec() })
    }

    /// Cosmic-time chart point `(t, x, y, z)`.
    pub fn frw(x: [f64; 4]) -> Self {
        Self { backend: Backend::Frw, coords: x.to_vec() }
    }

    fn as4(&self) -> [f64; 4] {
        [self.coords[0], self.coords[1], self.coords[2], self.coords[3]]
    }

    fn as5(&self) -> [f64; 5] {
        [self.coords[0], self.coords[1], self.coords[2], self.coords[3], self.coords[4]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalClass {
    Timelike,
    Spacelike,
    Null,
}

fn classify(interval: f64) -> CausalClass {
    if interval > NULL_TOL {
        CausalClass::Timelike
    } else if interval < -NULL_TOL {
        CausalClass::Spacelike
    } else {
        CausalClass::Null
    }
}

/// Causal relation of two points. FRW points are compared in conformal
/// coordinates, which preserves the causal structure; a chart is then
/// required.
pub fn causal_relation(
    x: &SpacetimePoint,
    y: &SpacetimePoint,
    chart: Option<&FRWChart>,
) -> Result<CausalClass, GeometryError> {
    if x.backend != y.backend {
        return Err(GeometryError::BackendMismatch);
    }
    match x.backend {
        Backend::Minkowski4 => {
            let d = sub4(&x.as4(), &y.as4());
            Ok(classify(mink4(&d, &d)))
        }
        Backend::DeSitter5 => {
            let (a, b) = (x.as5(), y.as5());
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3], a[4] - b[4]];
            Ok(classify(mink5(&d, &d)))
        }
        Backend::Frw => {
            let chart = chart.ok_or(GeometryError::UnsupportedBackend(
                "frw causal relation needs a chart",
            ))?;
            let cx = chart.to_conformal(x)?;
            let cy = chart.to_conformal(y)?;
            causal_relation(&cx, &cy, None)
        }
    }
}

/// Canonical Minkowski wedge: null boundary covectors `a` (time component
/// -1) and `b` (time component +1) and the least-Euclidean-norm edge point.
/// Membership is `a.(x - base) > 0` and `b.(x - base) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiWedge {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub base: [f64; 4],
}

fn canonical_base(a: &[f64; 4], b: &[f64; 4], q: &[f64; 4]) -> [f64; 4] {
    // Least-norm solution of a.x = a.q, b.x = b.q via the 2x2 Gram system.
    let gaa = dot4(a, a);
    let gab = dot4(a, b);
    let gbb = dot4(b, b);
    let ca = dot4(a, q);
    let cb = dot4(b, q);
    let det = gaa * gbb - gab * gab;
    let wa = (gbb * ca - gab * cb) / det;
    let wb = (gaa * cb - gab * ca) / det;
    let mut x = [0.0; 4];
    for i in 0..4 {
        x[i] = wa * a[i] + wb * b[i];
    }
    x
}

impl MinkowskiWedge {
    /// The reference wedge `x^1 > |x^0|`.
    pub fn reference() -> Self {
        Self {
            a: [-1.0, 1.0, 0.0, 0.0],
            b: [1.0, 1.0, 0.0, 0.0],
            base: [0.0; 4],
        }
    }

    /// Wedge from its two null boundary covectors and any edge point.
    pub fn from_covectors(
        a: [f64; 4],
        b: [f64; 4],
        edge_point: [f64; 4],
    ) -> Result<Self, GeometryError> {
        for cv in [&a, &b] {
            let n = mink4(cv, cv);
            if n.abs() > 1e-9 {
                return Err(GeometryError::CovectorNotNull { got: n });
            }
        }
        if !(a[0] * b[0] < 0.0) {
            return Err(GeometryError::CovectorOrientation);
        }
        let (neg, pos) = if a[0] < 0.0 { (a, b) } else { (b, a) };
        let mut an = neg;
        let mut bn = pos;
        let sa = -an[0];
        let sb = bn[0];
        for i in 0..4 {
            an[i] /= sa;
            bn[i] /= sb;
        }
        let base = canonical_base(&an, &bn, &edge_point);
        Ok(Self { a: an, b: bn, base })
    }

    /// Image of the reference wedge under the Poincare transformation
    /// `x -> Lambda x + y`, with `Lambda` proper orthochronous.
    pub fn from_poincare(lambda: &[[f64; 4]; 4], y: [f64; 4]) -> Result<Self, GeometryError> {
        let residual = lorentz4_residual(lambda);
        if residual > 1e-9 {
            return Err(GeometryError::NotIsometry { residual });
        }
        let inv = lorentz4_inverse(lambda);
        // Boundary covectors pull back: a = a0 . Lambda^-1 (row vector).
        let pull = |c0: [f64; 4]| {
            let mut c = [0.0; 4];
            for j in 0..4 {
                c[j] = (0..4).map(|i| c0[i] * inv[i][j]).sum();
            }
            c
        };
        let a = pull([-1.0, 1.0, 0.0, 0.0]);
        let b = pull([1.0, 1.0, 0.0, 0.0]);
        Self::from_covectors(a, b, y)
    }

    pub fn translate(&self, y: [f64; 4]) -> Self {
        let q = [self.base[0] + y[0], self.base[1] + y[1], self.base[2] + y[2], self.base[3] + y[3]];
        Self { a: self.a, b: self.b, base: canonical_base(&self.a, &self.b, &q) }
    }

    pub fn contains(&self, x: &[f64; 4]) -> bool {
        let d = sub4(x, &self.base);
        dot4(&self.a, &d) > 0.0 && dot4(&self.b, &d) > 0.0
    }

    pub fn complement(&self) -> Self {
        // Negating both covectors flips the wedge across the edge; the
        // negated pair re-sorts to (-b, -a), base unchanged.
        let mut a = self.b;
        let mut b = self.a;
        for i in 0..4 {
            a[i] = -a[i];
            b[i] = -b[i];
        }
        Self { a, b, base: self.base }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let close = |u: &[f64; 4], v: &[f64; 4]| {
            u.iter().zip(v).all(|(x, y)| (x - y).abs() <= GEOM_TOL)
        };
        close(&self.a, &other.a) && close(&self.b, &other.b) && close(&self.base, &other.base)
    }

    /// Whether `self` is contained in `other`, decided from the covector
    /// cone relation and the edge offset.
    fn subset_of(&self, other: &Self) -> bool {
        // other's covectors must be nonnegative combinations of ours.
        let gaa = dot4(&self.a, &self.a);
        let gab = dot4(&self.a, &self.b);
        let gbb = dot4(&self.b, &self.b);
        let det = gaa * gbb - gab * gab;
        let expand = |c: &[f64; 4]| -> Option<(f64, f64)> {
            let ca = dot4(&self.a, c);
            let cb = dot4(&self.b, c);
            let alpha = (gbb * ca - gab * cb) / det;
            let beta = (gaa * cb - gab * ca) / det;
            let mut residual: f64 = 0.0;
            for i in 0..4 {
                residual = residual.max((c[i] - alpha * self.a[i] - beta * self.b[i]).abs());
            }
            if residual > GEOM_TOL {
                None
            } else {
                Some((alpha, beta))
            }
        };
        let offset = sub4(&self.base, &other.base);
        for c in [&other.a, &other.b] {
            match expand(c) {
                Some((alpha, beta)) => {
                    if alpha < -GEOM_TOL || beta < -GEOM_TOL || alpha + beta < GEOM_TOL {
                        return false;
                    }
                }
                None => return false,
            }
            if dot4(c, &offset) < -GEOM_TOL {
                return false;
            }
        }
        true
    }
}

/// De Sitter wedge: ambient Lorentz image `h W0` of the reference wedge,
/// stored as `h` together with the pulled-back canonical covector pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeSitterWedge {
    pub h: [[f64; 5]; 5],
    pub a: [f64; 5],
    pub b: [f64; 5],
}

impl DeSitterWedge {
    pub fn reference() -> Self {
        let mut h = [[0.0; 5]; 5];
        for i in 0..5 {
            h[i][i] = 1.0;
        }
        Self::from_isometry(&h).unwrap()
    }

    pub fn from_isometry(h: &[[f64; 5]; 5]) -> Result<Self, GeometryError> {
        let residual = lorentz5_residual(h);
        if residual > 1e-9 {
            return Err(GeometryError::NotIsometry { residual });
        }
        let inv = lorentz5_inverse(h);
        let pull = |c0: [f64; 5]| {
            let mut c = [0.0; 5];
            for j in 0..5 {
                c[j] = (0..5).map(|i| c0[i] * inv[i][j]).sum();
            }
            c
        };
        let mut a = pull([-1.0, 1.0, 0.0, 0.0, 0.0]);
        let mut b = pull([1.0, 1.0, 0.0, 0.0, 0.0]);
        if a[0] > 0.0 {
            std::mem::swap(&mut a, &mut b);
        }
        let sa = -a[0];
        let sb = b[0];
        for i in 0..5 {
            a[i] /= sa;
            b[i] /= sb;
        }
        Ok(Self { h: *h, a, b })
    }

    pub fn contains(&self, x: &SpacetimePoint) -> Result<bool, GeometryError> {
        if x.backend != Backend::DeSitter5 {
            return Err(GeometryError::BackendMismatch);
        }
        let v = x.as5();
        let dot = |c: &[f64; 5]| (0..5).map(|i| c[i] * v[i]).sum::<f64>();
        Ok(dot(&self.a) > 0.0 && dot(&self.b) > 0.0)
    }

    /// The wedge reflection fixing this wedge's edge; for the reference
    /// wedge it is `(x0, x1, xvec) -> (x0, -x1, -xvec)`.
    pub fn reflection(&self) -> [[f64; 5]; 5] {
        let mut j0 = [[0.0; 5]; 5];
        j0[0][0] = 1.0;
        for i in 1..5 {
            j0[i][i] = -1.0;
        }
        mat5_mul(&mat5_mul(&self.h, &j0), &lorentz5_inverse(&self.h))
    }

    pub fn complement(&self) -> Self {
        let j0 = {
            let mut m = [[0.0; 5]; 5];
            m[0][0] = 1.0;
            for i in 1..5 {
                m[i][i] = -1.0;
            }
            m
        };
        Self::from_isometry(&mat5_mul(&self.h, &j0)).unwrap()
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let close = |u: &[f64; 5], v: &[f64; 5]| {
            u.iter().zip(v).all(|(x, y)| (x - y).abs() <= GEOM_TOL)
        };
        close(&self.a, &other.a) && close(&self.b, &other.b)
    }

    /// One-parameter boost group preserving the wedge,
    /// `h Lambda_{W0}(t) h^-1` with the `cosh/sinh(2 pi t)` block.
    pub fn boost_flow(&self, t: f64) -> [[f64; 5]; 5] {
        let mut l0 = [[0.0; 5]; 5];
        for i in 2..5 {
            l0[i][i] = 1.0;
        }
        let arg = 2.0 * std::f64::consts::PI * t;
        l0[0][0] = arg.cosh();
        l0[1][1] = arg.cosh();
        l0[0][1] = arg.sinh();
        l0[1][0] = arg.sinh();
        mat5_mul(&mat5_mul(&self.h, &l0), &lorentz5_inverse(&self.h))
    }
}

/// FRW wedge in the conformal chart: edge in the constant-`tau` slice
/// through `(tau, base)`, opening along the spatial unit normal. The
/// spatial isometry group (translations and rotations) only produces
/// wedges of this unboosted shape, so they form a single coherent family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrwWedge {
    pub tau: f64,
    pub base: [f64; 3],
    pub normal: [f64; 3],
}

impl FrwWedge {
    pub fn new(tau: f64, base: [f64; 3], normal: [f64; 3]) -> Result<Self, GeometryError> {
        let n = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        if n < 1e-12 {
            return Err(GeometryError::DegenerateKillingPair);
        }
        Ok(Self { tau, base, normal: [normal[0] / n, normal[1] / n, normal[2] / n] })
    }

    fn as_minkowski(&self) -> MinkowskiWedge {
        let n = self.normal;
        MinkowskiWedge::from_covectors(
            [-1.0, n[0], n[1], n[2]],
            [1.0, n[0], n[1], n[2]],
            [self.tau, self.base[0], self.base[1], self.base[2]],
        )
        .unwrap()
    }

    pub fn complement(&self) -> Self {
        Self {
            tau: self.tau,
            base: self.base,
            normal: [-self.normal[0], -self.normal[1], -self.normal[2]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Wedge {
    Minkowski4(MinkowskiWedge),
    DeSitter5(DeSitterWedge),
    Frw(FrwWedge),
}

impl Wedge {
    pub fn backend(&self) -> Backend {
        match self {
            Wedge::Minkowski4(_) => Backend::Minkowski4,
            Wedge::DeSitter5(_) => Backend::DeSitter5,
            Wedge::Frw(_) => Backend::Frw,
        }
    }
}

pub fn wedge_membership(
    w: &Wedge,
    x: &SpacetimePoint,
    chart: Option<&FRWChart>,
) -> Result<bool, GeometryError> {
    match (w, x.backend) {
        (Wedge::Minkowski4(m), Backend::Minkowski4) => Ok(m.contains(&x.as4())),
        (Wedge::DeSitter5(d), Backend::DeSitter5) => d.contains(x),
        (Wedge::Frw(f), Backend::Frw) => {
            let chart = chart.ok_or(GeometryError::UnsupportedBackend(
                "frw membership needs a chart",
            ))?;
            let c = chart.to_conformal(x)?;
            Ok(f.as_minkowski().contains(&c.as4()))
        }
        _ => Err(GeometryError::BackendMismatch),
    }
}

pub fn causal_complement(w: &Wedge) -> Wedge {
    match w {
        Wedge::Minkowski4(m) => Wedge::Minkowski4(m.complement()),
        Wedge::DeSitter5(d) => Wedge::DeSitter5(d.complement()),
        Wedge::Frw(f) => Wedge::Frw(f.complement()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionVerdict {
    Equal,
    /// One wedge properly contains the other (either order).
    ProperSubset,
    /// One wedge lies in the causal complement of the other.
    ComplementSubset,
    Incomparable,
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index + 1;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic low-discrepancy points in `[-extent, extent]^4`.
pub fn halton_box4(count: usize, extent: f64) -> Vec<[f64; 4]> {
    let bases = [2, 3, 5, 7];
    (0..count)
        .map(|k| {
            let mut p = [0.0; 4];
            for (i, &b) in bases.iter().enumerate() {
                p[i] = extent * (2.0 * halton(k, b) - 1.0);
            }
            p
        })
        .collect()
}

fn minkowski_verdict(w1: &MinkowskiWedge, w2: &MinkowskiWedge) -> InclusionVerdict {
    let s12 = w1.subset_of(w2);
    let s21 = w2.subset_of(w1);
    if s12 && s21 {
        InclusionVerdict::Equal
    } else if s12 || s21 {
        InclusionVerdict::ProperSubset
    } else if w1.subset_of(&w2.complement()) {
        InclusionVerdict::ComplementSubset
    } else {
        InclusionVerdict::Incomparable
    }
}

fn validate_minkowski_verdict(
    w1: &MinkowskiWedge,
    w2: &MinkowskiWedge,
    verdict: InclusionVerdict,
    samples: usize,
) -> Result<(), GeometryError> {
    let extent = 4.0
        + w1.base.iter().chain(&w2.base).fold(0.0f64, |m, &c| m.max(c.abs()));
    let s12 = w1.subset_of(w2);
    for p in halton_box4(samples, extent) {
        let in1 = w1.contains(&p);
        let in2 = w2.contains(&p);
        let bad = match verdict {
            InclusionVerdict::Equal => in1 != in2,
            InclusionVerdict::ProperSubset => {
                if s12 {
                    in1 && !in2
                } else {
                    in2 && !in1
                }
            }
            InclusionVerdict::ComplementSubset => in1 && in2,
            InclusionVerdict::Incomparable => false,
        };
        if bad {
            return Err(GeometryError::SamplingContradiction {
                verdict: verdict_name(verdict),
                point: p,
            });
        }
    }
    Ok(())
}

fn verdict_name(v: InclusionVerdict) -> &'static str {
    match v {
        InclusionVerdict::Equal => "equal",
        InclusionVerdict::ProperSubset => "proper-subset",
        InclusionVerdict::ComplementSubset => "complement-subset",
        InclusionVerdict::Incomparable => "incomparable",
    }
}

/// Deterministic points on the unit hyperboloid: Halton time plus a
/// Halton spatial direction rescaled to satisfy the constraint.
pub fn halton_hyperboloid(count: usize, extent: f64) -> Vec<SpacetimePoint> {
    let bases = [2, 3, 5, 7, 11];
    (0..count)
        .map(|k| {
            let x0 = extent * (2.0 * halton(k, bases[0]) - 1.0);
            let mut dir = [0.0; 4];
            for i in 0..4 {
                dir[i] = 2.0 * halton(k, bases[i + 1]) - 1.0;
            }
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
            let radius = (1.0 + x0 * x0).sqrt();
            SpacetimePoint::desitter([
                x0,
                radius * dir[0] / norm,
                radius * dir[1] / norm,
                radius * dir[2] / norm,
                radius * dir[3] / norm,
            ])
            .unwrap()
        })
        .collect()
}

fn desitter_verdict(
    w1: &DeSitterWedge,
    w2: &DeSitterWedge,
    samples: usize,
) -> Result<InclusionVerdict, GeometryError> {
    // Inclusions between distinct de Sitter wedges do not occur; the
    // sampling pass must therefore find two-sided witnesses unless the
    // canonical forms agree.
    if w1.approx_eq(w2) {
        return Ok(InclusionVerdict::Equal);
    }
    let mut seen_1_not_2 = false;
    let mut seen_2_not_1 = false;
    for p in halton_hyperboloid(samples, 3.0) {
        let in1 = w1.contains(&p)?;
        let in2 = w2.contains(&p)?;
        seen_1_not_2 |= in1 && !in2;
        seen_2_not_1 |= in2 && !in1;
        if seen_1_not_2 && seen_2_not_1 {
            break;
        }
    }
    if seen_1_not_2 && seen_2_not_1 {
        Ok(InclusionVerdict::Incomparable)
    } else {
        Err(GeometryError::SamplingContradiction {
            verdict: "incomparable",
            point: [f64::NAN; 4],
        })
    }
}

/// Decides the inclusion relation analytically and validates the verdict
/// with a deterministic sampling pass; a contradiction is reported as a
/// diagnostic error rather than silently trusting either side.
pub fn wedge_inclusion(w1: &Wedge, w2: &Wedge) -> Result<InclusionVerdict, GeometryError> {
    wedge_inclusion_sampled(w1, w2, 10_000)
}

pub fn wedge_inclusion_sampled(
    w1: &Wedge,
    w2: &Wedge,
    samples: usize,
) -> Result<InclusionVerdict, GeometryError> {
    match (w1, w2) {
        (Wedge::Minkowski4(m1), Wedge::Minkowski4(m2)) => {
            let verdict = minkowski_verdict(m1, m2);
            validate_minkowski_verdict(m1, m2, verdict, samples)?;
            Ok(verdict)
        }
        (Wedge::DeSitter5(d1), Wedge::DeSitter5(d2)) => desitter_verdict(d1, d2, samples),
        (Wedge::Frw(f1), Wedge::Frw(f2)) => {
            let m1 = f1.as_minkowski();
            let m2 = f2.as_minkowski();
            let verdict = minkowski_verdict(&m1, &m2);
            validate_minkowski_verdict(&m1, &m2, verdict, samples)?;
            Ok(verdict)
        }
        _ => Err(GeometryError::BackendMismatch),
    }
}

/// Rotation-and-translation orbit label of a wedge: the rapidity of the
/// boost part, recovered from the angle between the two null covectors.
/// Two Minkowski wedges lie in one coherent subfamily iff the keys agree.
/// FRW wedges form a single family, so the key is constant there.
pub fn coherent_family_key(w: &Wedge) -> Result<f64, GeometryError> {
    match w {
        Wedge::Minkowski4(m) => {
            // Spatial parts of the canonical covectors are unit vectors;
            // their inner product c determines the transverse rapidity via
            // sinh^2 s = (1 - c)/(1 + c).
            let c = m.a[1] * m.b[1] + m.a[2] * m.b[2] + m.a[3] * m.b[3];
            let ratio = ((1.0 - c) / (1.0 + c)).max(0.0);
            Ok(ratio.sqrt().asinh())
        }
        Wedge::Frw(_) => Ok(0.0),
        Wedge::DeSitter5(_) => Err(GeometryError::UnsupportedBackend(
            "de sitter wedges form a single transitive family",
        )),
    }
}

/// Boost flow preserving the wedge, as an isometry matrix; de Sitter only.
pub fn boost_flow(w: &Wedge, t: f64) -> Result<[[f64; 5]; 5], GeometryError> {
    match w {
        Wedge::DeSitter5(d) => Ok(d.boost_flow(t)),
        _ => Err(GeometryError::UnsupportedBackend("boost flow implemented for de sitter")),
    }
}

/// Pair of commuting spacelike directions spanning an edge.
#[derive(Debug, Clone, PartialEq)]
pub enum KillingPair {
    /// Two spacelike 4-vectors (Minkowski translations).
    Minkowski4([[f64; 4]; 2]),
    /// Two spatial 3-vectors (FRW spatial translations).
    Frw([[f64; 3]; 2]),
}

impl KillingPair {
    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            KillingPair::Minkowski4([u, v]) => {
                if mink4(u, u) >= 0.0 || mink4(v, v) >= 0.0 {
                    return Err(GeometryError::DegenerateKillingPair);
                }
                // Gram determinant in the Euclidean sense detects linear
                // dependence regardless of causal type.
                let g = dot4(u, u) * dot4(v, v) - dot4(u, v) * dot4(u, v);
                if g < 1e-12 {
                    return Err(GeometryError::DegenerateKillingPair);
                }
                Ok(())
            }
            KillingPair::Frw([u, v]) => {
                let cross = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                let n = cross.iter().map(|c| c * c).sum::<f64>();
                if n < 1e-12 {
                    return Err(GeometryError::DegenerateKillingPair);
                }
                Ok(())
            }
        }
    }
}

/// Edge of an FRW wedge in cosmic-time coordinates: a 2-plane in the
/// constant-`t` slice through `base`, spanned by two spatial directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FrwEdge {
    pub t: f64,
    pub base: [f64; 3],
    pub span: [[f64; 3]; 2],
}

/// Conformal image of an FRW edge: a 2-plane in a constant-`tau` slice of
/// flat space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatEdge {
    pub tau: f64,
    pub base: [f64; 3],
    pub span: [[f64; 3]; 2],
}

pub fn frw_edge_image(e: &FrwEdge, chart: &FRWChart) -> Result<FlatEdge, GeometryError> {
    KillingPair::Frw(e.span).validate()?;
    Ok(FlatEdge { tau: chart.tau_of_t(e.t)?, base: e.base, span: e.span })
}

pub fn frw_edge_from_image(d: &FlatEdge, chart: &FRWChart) -> Result<FrwEdge, GeometryError> {
    KillingPair::Frw(d.span).validate()?;
    Ok(FrwEdge { t: chart.t_of_tau(d.tau)?, base: d.base, span: d.span })
}

/// Spatially flat FRW chart: scale factor `a(t)` on the cosmic-time
/// interval `(t_lo, t_hi)`, conformal time fixed by `tau(t0) = 0`.
pub struct FRWChart {
    scale: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t0: f64,
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, fm, tol, 40)
}

impl FRWChart {
    pub fn new(
        scale: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_lo: f64,
        t_hi: f64,
        t0: f64,
    ) -> Result<Self, GeometryError> {
        if !(t_lo < t0 && t0 < t_hi) {
            return Err(GeometryError::ChartRange { value: t0, lo: t_lo, hi: t_hi });
        }
        // Positivity probed on a deterministic sweep of the (clamped)
        // interval; a global certificate is not available for a callable.
        let lo = t_lo.max(t0 - 1e6);
        let hi = t_hi.min(t0 + 1e6);
        for k in 0..=256 {
            let t = lo + (hi - lo) * (k as f64 + 0.5) / 257.0;
            let a = scale(t);
            if !(a > 0.0) {
                return Err(GeometryError::BadScaleFactor { t, a });
            }
        }
        Ok(Self { scale: Box::new(scale), t_lo, t_hi, t0 })
    }

    pub fn scale_factor(&self, t: f64) -> f64 {
        (self.scale)(t)
    }

    /// Conformal time by quadrature of `d tau = dt / a(t)`.
    pub fn tau_of_t(&self, t: f64) -> Result<f64, GeometryError> {
        if !(t > self.t_lo && t < self.t_hi) {
            return Err(GeometryError::ChartRange { value: t, lo: self.t_lo, hi: self.t_hi });
        }
        Ok(adaptive_simpson(&|s| 1.0 / (self.scale)(s), self.t0, t, 1e-13))
    }

    /// Inverse of [`Self::tau_of_t`] by bracketing and bisection;
    /// monotonicity of `tau` makes this well posed.
    pub fn t_of_tau(&self, tau: f64) -> Result<f64, GeometryError> {
        let mut lo = self.t0;
        let mut hi = self.t0;
        let mut step = 1.0;
        if tau >= 0.0 {
            loop {
                hi = (self.t0 + step).min(self.t_hi - 1e-12 * (1.0 + self.t_hi.abs()));
                if hi >= self.t_hi {
                    return Err(GeometryError::TauNotBracketed { tau });
                }
                if self.tau_of_t(hi)? >= tau {
                    break;
                }
                if step > 1e12 {
                    return Err(GeometryError::TauNotBracketed { tau });
                }
                step *= 2.0;
            }
        } else {
            loop {
                lo = if self.t_lo.is_finite() {
                    self.t_lo + (self.t0 - self.t_lo) / (1.0 + step)
                } else {
                    self.t0 - step
                };
                if self.tau_of_t(lo)? <= tau {
                    break;
                }
                if step > 1e12 {
                    return Err(GeometryError::TauNotBracketed { tau });
                }
                step *= 2.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.tau_of_t(mid)? < tau {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo).abs() <= 1e-13 * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Conformal-chart image `(tau(t), x, y, z)` as a Minkowski point.
    pub fn to_conformal(&self, x: &SpacetimePoint) -> Result<SpacetimePoint, GeometryError> {
        if x.backend != Backend::Frw {
            return Err(GeometryError::BackendMismatch);
        }
        let c = x.as4();
        Ok(SpacetimePoint::minkowski([self.tau_of_t(c[0])?, c[1], c[2], c[3]]))
    }
}
