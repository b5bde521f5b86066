//! Discretized one-particle structure of the massive scalar field and the
//! truncated bosonic Fock space.
//!
//! Test functions live directly on the mass shell as amplitude vectors
//! over a momentum grid; the invariant measure enters through per-node
//! weights `w_j` approximating `d^3p / 2 eps_p`. Grids are closed under
//! `p -> -p`, which the commutator identities need.

use crate::geometry::Wedge;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScalarError {
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("amplitude vector has {got} entries, grid has {expected} nodes")]
    AmplitudeLength { got: usize, expected: usize },
    #[error("grid is not closed under p -> -p at node {node}")]
    NotInversionClosed { node: usize },
    #[error("node weights must be positive")]
    BadWeight,
    #[error("mass must be positive")]
    BadMass,
    #[error("operation needs an undoubled Fock space")]
    DoubledFock,
    #[error("operation needs a doubled Fock space")]
    UndoubledFock,
    #[error("weights and nodes have different lengths")]
    LengthMismatch,
}

/// Momentum grid on the mass shell: nodes `p_j`, weights `w_j > 0`,
/// energies `eps_j = sqrt(p_j^2 + m^2)`, and the index map of `p -> -p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassShellGrid {
    pub mass: f64,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub energies: Vec<f64>,
    pub inversion: Vec<usize>,
}

impl MassShellGrid {
    pub fn from_raw(
        mass: f64,
        nodes: Vec<[f64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self, ScalarError> {
        if !(mass > 0.0) {
            return Err(ScalarError::BadMass);
        }
        if nodes.len() != weights.len() {
            return Err(ScalarError::LengthMismatch);
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(ScalarError::BadWeight);
        }
        let energies: Vec<f64> = nodes
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + mass * mass).sqrt())
            .collect();
        let mut inversion = vec![usize::MAX; nodes.len()];
        for (j, p) in nodes.iter().enumerate() {
            let found = nodes.iter().position(|q| {
                (q[0] + p[0]).abs() <= 1e-12 && (q[1] + p[1]).abs() <= 1e-12 && (q[2] + p[2]).abs() <= 1e-12
            });
            match found {
                Some(k) if (weights[k] - weights[j]).abs() <= 1e-12 * weights[j].max(1.0) => {
                    inversion[j] = k;
                }
                _ => return Err(ScalarError::NotInversionClosed { node: j }),
            }
        }
        Ok(Self { mass, nodes, weights, energies, inversion })
    }

    /// Symmetric cubic lattice `{-k..k}^3 * dp` with product trapezoid
    /// weights divided by `2 eps_p`.
    pub fn cubic(mass: f64, k: i32, dp: f64) -> Result<Self, ScalarError> {
        let axis_weight = |i: i32| if i.abs() == k && k > 0 { 0.5 * dp } else { dp };
        let mut nodes = Vec::new();
        let mut raw = Vec::new();
        for ix in -k..=k {
            for iy in -k..=k {
                for iz in -k..=k {
                    nodes.push([ix as f64 * dp, iy as f64 * dp, iz as f64 * dp]);
                    raw.push(axis_weight(ix) * axis_weight(iy) * axis_weight(iz));
                }
            }
        }
        let weights = nodes
            .iter()
            .zip(&raw)
            .map(|(p, &w)| {
                let eps = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + mass * mass).sqrt();
                w / (2.0 * eps)
            })
            .collect();
        Self::from_raw(mass, nodes, weights)
    }

    /// One-dimensional grid `{-k..k} * dp` embedded along the x axis.
    pub fn line(mass: f64, k: i32, dp: f64) -> Result<Self, ScalarError> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for ix in -k..=k {
            let p = [ix as f64 * dp, 0.0, 0.0];
            let eps = (p[0] * p[0] + mass * mass).sqrt();
            let w = if ix.abs() == k && k > 0 { 0.5 * dp } else { dp };
            nodes.push(p);
            weights.push(w / (2.0 * eps));
        }
        Self::from_raw(mass, nodes, weights)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Complex amplitudes of a mass-shell restriction over a grid, optionally
/// tagged with the wedge the position-space function is meant to live in.
#[derive(Debug, Clone)]
pub struct MassShellFunction {
    pub grid: Arc<MassShellGrid>,
    pub amplitudes: Vec<C64>,
    pub support: Option<Wedge>,
}

impl MassShellFunction {
    pub fn new(grid: Arc<MassShellGrid>, amplitudes: Vec<C64>) -> Result<Self, ScalarError> {
        if amplitudes.len() != grid.len() {
            return Err(ScalarError::AmplitudeLength { got: amplitudes.len(), expected: grid.len() });
        }
        Ok(Self { grid, amplitudes, support: None })
    }

    pub fn with_support(mut self, w: Wedge) -> Self {
        self.support = Some(w);
        self
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }
}

/// Covariant inner product `sum_j w_j conj(f_j) g_j`.
pub fn inner_product_m(f: &MassShellFunction, g: &MassShellFunction) -> Result<C64, ScalarError> {
    if !f.same_grid(g) {
        return Err(ScalarError::GridMismatch);
    }
    Ok(f
        .amplitudes
        .iter()
        .zip(&g.amplitudes)
        .zip(&f.grid.weights)
        .map(|((a, b), &w)| w * a.conj() * b)
        .sum())
}

/// The complex structure restricted to the upper mass shell is
/// multiplication by `i`.
pub fn apply_complex_structure(f: &MassShellFunction) -> MassShellFunction {
    MassShellFunction {
        grid: f.grid.clone(),
        amplitudes: f.amplitudes.iter().map(|a| C64::i() * a).collect(),
        support: f.support.clone(),
    }
}

/// Spacetime translation by `y`: amplitudes pick up `exp(i p.y)` with the
/// on-shell four-momentum `p = (eps_j, p_j)` and mostly-minus pairing.
pub fn translate(f: &MassShellFunction, y: [f64; 4]) -> MassShellFunction {
    let amplitudes = f
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let p = f.grid.nodes[j];
            let phase = f.grid.energies[j] * y[0] - p[0] * y[1] - p[1] * y[2] - p[2] * y[3];
            a * (C64::i() * phase).exp()
        })
        .collect();
    MassShellFunction { grid: f.grid.clone(), amplitudes, support: None }
}

/// Bosonic Fock space truncated at total occupation `n_max`, over the grid
/// modes (doubled: particle block then hole block). Basis vectors are the
/// occupation vectors with `sum n_j <= n_max` in ascending lexicographic
/// order, so the vacuum is index 0.
#[derive(Debug, Clone)]
pub struct TruncatedFock {
    pub grid: Arc<MassShellGrid>,
    pub n_max: u8,
    pub doubled: bool,
    pub basis: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

fn enumerate_occupations(modes: usize, n_max: u8) -> Vec<Vec<u8>> {
    // Depth-first in increasing digit order yields ascending lexicographic
    // output directly.
    fn rec(modes: usize, budget: u8, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == modes {
            out.push(prefix.clone());
            return;
        }
        for n in 0..=budget {
            prefix.push(n);
            rec(modes, budget - n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, n_max, &mut Vec::new(), &mut out);
    out
}

impl TruncatedFock {
    pub fn new(grid: Arc<MassShellGrid>, n_max: u8, doubled: bool) -> Self {
        let modes = if doubled { 2 * grid.len() } else { grid.len() };
        let basis = enumerate_occupations(modes, n_max);
        let index = basis.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        Self { grid, n_max, doubled, basis, index }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn modes(&self) -> usize {
        if self.doubled { 2 * self.grid.len() } else { self.grid.len() }
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn total_occupation(&self, idx: usize) -> u32 {
        self.basis[idx].iter().map(|&n| u32::from(n)).sum()
    }

    /// Unit-normalized mode annihilator: `a_j |n> = sqrt(n_j) |n - e_j>`.
    pub fn mode_annihilator(&self, mode: usize) -> Array2<C64> {
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        for (col, occ) in self.basis.iter().enumerate() {
            let n = occ[mode];
            if n == 0 {
                continue;
            }
            let mut lower = occ.clone();
            lower[mode] = n - 1;
            let row = self.index[&lower];
            m[[row, col]] = C64::new(f64::from(n).sqrt(), 0.0);
        }
        m
    }

    /// Diagonal projector onto total occupation `<= n_max - depth`, the
    /// sub-basis on which identities with `depth` ladder factors are exact
    /// despite the truncation.
    pub fn protected_projector(&self, depth: u8) -> Array2<C64> {
        let dim = self.dim();
        let cutoff = u32::from(self.n_max.saturating_sub(depth));
        let mut m = Array2::zeros((dim, dim));
        for idx in 0..dim {
            if self.total_occupation(idx) <= cutoff {
                m[[idx, idx]] = C64::new(1.0, 0.0);
            }
        }
        m
    }
}

fn check_undoubled(fock: &TruncatedFock) -> Result<(), ScalarError> {
    if fock.doubled {
        Err(ScalarError::DoubledFock)
    } else {
        Ok(())
    }
}

fn check_grid(phi: &MassShellFunction, fock: &TruncatedFock) -> Result<(), ScalarError> {
    if Arc::ptr_eq(&phi.grid, &fock.grid) || *phi.grid == *fock.grid {
        Ok(())
    } else {
        Err(ScalarError::GridMismatch)
    }
}

/// Smeared annihilator `a(phi) = sum_j sqrt(w_j) conj(phi_j) a_j`, so that
/// `[a(phi), a_dagger(psi)] = <phi, psi>_m` on the protected sub-basis.
pub fn annihilation(
    phi: &MassShellFunction,
    fock: &TruncatedFock,
) -> Result<Array2<C64>, ScalarError> {
    check_undoubled(fock)?;
    check_grid(phi, fock)?;
    let dim = fock.dim();
    let mut m = Array2::zeros((dim, dim));
    for (col, occ) in fock.basis.iter().enumerate() {
        for (j, &n) in occ.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let mut lower = occ.clone();
            lower[j] = n - 1;
            let row = fock.index[&lower];
            let coeff = fock.grid.weights[j].sqrt() * f64::from(n).sqrt();
            m[[row, col]] += coeff * phi.amplitudes[j].conj();
        }
    }
    Ok(m)
}

pub fn creation(
    phi: &MassShellFunction,
    fock: &TruncatedFock,
) -> Result<Array2<C64>, ScalarError> {
    Ok(annihilation(phi, fock)?.t().mapv(|z| z.conj()))
}

/// The free scalar field `(a(f) + a_dagger(f)) / sqrt(2)`; hermitian.
pub fn vacuum_field(
    f: &MassShellFunction,
    fock: &TruncatedFock,
) -> Result<Array2<C64>, ScalarError> {
    let a = annihilation(f, fock)?;
    let ad = a.t().mapv(|z| z.conj());
    Ok((a + ad) / C64::new(2.0f64.sqrt(), 0.0))
}
