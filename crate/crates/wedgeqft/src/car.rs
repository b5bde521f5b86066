//! Finite-dimensional selfdual CAR algebra with gauge sectors and the
//! charge-sector deformation.
//!
//! The selfdual space is H + H with H = C^d, conjugation
//! `c(f_plus, f_minus) = (C f_minus, C f_plus)` for componentwise C.
//! The Fock representation lives over a basis projection P = P1 + P2 with
//! P2 = C(1 - P1)C forced by `c P c = 1 - P`, so exactly one of the two
//! slots (i, d+i) is a Fock mode for each i. Each mode carries a charge
//! (+1 for first-block modes, -1 for second-block) and an integer boost
//! eigenvalue; their second-quantized totals (K, Q) form the joint
//! spectrum driving the deformation.

use crate::spectral::{frobenius_norm, warp, DeformationMatrix, JointSpectrumRep, Operator};
use crate::wick::{assemble_npoint, Statistics};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::collections::BTreeSet;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CarError {
    #[error("vector has {got} components, the selfdual space has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("operator is not charge-homogeneous of degree {m}: entry maps sector {from} to sector {to}")]
    NotHomogeneous { m: i64, from: i64, to: i64 },
    #[error("projection mask has {got} entries, expected {expected}")]
    MaskLength { got: usize, expected: usize },
    #[error("boost spectrum has {got} entries, expected {expected}")]
    BoostLength { got: usize, expected: usize },
    #[error("quasifree symbol violates {0}")]
    BadQuasifreeSpec(&'static str),
    #[error("moment count must be even and at most {max}, got {got}")]
    BadMomentCount { got: usize, max: usize },
    #[error("Fock dimension 2^{0} exceeds the desk-scale bound")]
    TooLarge(usize),
}

/// The doubled space H + H with its antilinear conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfdualSpace {
    pub d: usize,
}

impl SelfdualSpace {
    pub fn dim(&self) -> usize {
        2 * self.d
    }

    /// `c(f_plus, f_minus) = (conj f_minus, conj f_plus)`.
    pub fn conjugate(&self, f: &[C64]) -> Vec<C64> {
        let d = self.d;
        let mut out = vec![C64::new(0.0, 0.0); 2 * d];
        for i in 0..d {
            out[i] = f[d + i].conj();
            out[d + i] = f[i].conj();
        }
        out
    }

    /// Inner product, antilinear in the first argument.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum()
    }
}

/// One Fock mode: its slot in the doubled space, its gauge charge and its
/// boost eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub h_index: usize,
    pub charge: i64,
    pub k: i64,
}

/// Fermionic Fock representation over the basis projection. Basis states
/// are mode subsets, ordered by ascending bitmask; the vacuum is index 0.
pub struct CarRep {
    pub space: SelfdualSpace,
    pub modes: Vec<Mode>,
    /// Per-basis-state totals of the boost and charge generators.
    pub k_values: Vec<i64>,
    pub q_values: Vec<i64>,
    pub rep: Arc<JointSpectrumRep>,
}

impl CarRep {
    /// `p1[i]` selects slot `i` (charge +1); otherwise slot `d+i`
    /// (charge -1) is the mode, as the complementarity of P demands.
    /// `k_plus`/`k_minus` are the one-particle boost eigenvalues on the
    /// two blocks.
    pub fn new(
        d: usize,
        p1: &[bool],
        k_plus: &[i64],
        k_minus: &[i64],
    ) -> Result<Self, CarError> {
        if p1.len() != d {
            return Err(CarError::MaskLength { got: p1.len(), expected: d });
        }
        if k_plus.len() != d || k_minus.len() != d {
            return Err(CarError::BoostLength { got: k_plus.len().min(k_minus.len()), expected: d });
        }
        if d > 12 {
            return Err(CarError::TooLarge(d));
        }
        let modes: Vec<Mode> = (0..d)
            .map(|i| {
                if p1[i] {
                    Mode { h_index: i, charge: 1, k: k_plus[i] }
                } else {
                    Mode { h_index: d + i, charge: -1, k: k_minus[i] }
                }
            })
            .collect();
        let dim = 1usize << d;
        let mut k_values = Vec::with_capacity(dim);
        let mut q_values = Vec::with_capacity(dim);
        for mask in 0..dim {
            let mut k = 0;
            let mut q = 0;
            for (m, mode) in modes.iter().enumerate() {
                if mask & (1 << m) != 0 {
                    k += mode.k;
                    q += mode.charge;
                }
            }
            k_values.push(k);
            q_values.push(q);
        }
        let eigenvalues = k_values
            .iter()
            .zip(&q_values)
            .map(|(&k, &q)| [k as f64, q as f64])
            .collect();
        let labels = (0..dim).map(|mask| format!("{mask:b}")).collect();
        let rep = Arc::new(JointSpectrumRep::new(eigenvalues, labels).unwrap());
        Ok(Self { space: SelfdualSpace { d }, modes, k_values, q_values, rep })
    }

    /// Default basis projection 1 + 0: all charges +1.
    pub fn standard(d: usize, k: &[i64]) -> Result<Self, CarError> {
        Self::new(d, &vec![true; d], k, &vec![0; d])
    }

    pub fn dim(&self) -> usize {
        1 << self.space.d
    }

    fn cdag_entry(&self, mode: usize, mask: usize) -> Option<(usize, f64)> {
        if mask & (1 << mode) != 0 {
            return None;
        }
        let below = (mask & ((1 << mode) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some((mask | (1 << mode), sign))
    }

    /// Selfdual field operator on Fock space,
    /// `B(f) = a_dag(P f) + a(P c f)`; satisfies `{B(f), B(g)} = <c f, g>`
    /// and `B(f)* = B(c f)` exactly.
    pub fn b_operator(&self, f: &[C64]) -> Result<Array2<C64>, CarError> {
        let d = self.space.d;
        if f.len() != 2 * d {
            return Err(CarError::DimensionMismatch { got: f.len(), expected: 2 * d });
        }
        let dim = self.dim();
        let mut out = Array2::zeros((dim, dim));
        for (m, mode) in self.modes.iter().enumerate() {
            // creation weight is the mode's own slot, annihilation weight
            // the conjugate slot (collapsing the double conjugation in
            // a(P c f))
            let create = f[mode.h_index];
            let conj_slot = if mode.h_index < d { mode.h_index + d } else { mode.h_index - d };
            let destroy = f[conj_slot];
            for mask in 0..dim {
                if let Some((target, sign)) = self.cdag_entry(m, mask) {
                    out[[target, mask]] += sign * create;
                    out[[mask, target]] += sign * destroy;
                }
            }
        }
        Ok(out)
    }

    /// Cospinor part `Psi(f_minus) = B(0 + f_minus)`, lowering charge.
    pub fn psi(&self, f_minus: &[C64]) -> Result<Array2<C64>, CarError> {
        let mut f = vec![C64::new(0.0, 0.0); 2 * self.space.d];
        f[self.space.d..].copy_from_slice(f_minus);
        self.b_operator(&f)
    }

    /// Spinor part `Psi_dag(f_plus) = B(f_plus + 0)`, raising charge.
    pub fn psi_dagger(&self, f_plus: &[C64]) -> Result<Array2<C64>, CarError> {
        let mut f = vec![C64::new(0.0, 0.0); 2 * self.space.d];
        f[..self.space.d].copy_from_slice(f_plus);
        self.b_operator(&f)
    }

    /// Gauge unitary `exp(i s Q)`, diagonal on the sector decomposition.
    pub fn gauge_unitary(&self, s: f64) -> Array2<C64> {
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        for a in 0..dim {
            m[[a, a]] = (C64::i() * (s * self.q_values[a] as f64)).exp();
        }
        m
    }

    /// Grading `(-1)^N`.
    pub fn grading(&self) -> Array2<C64> {
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        for (mask, row) in (0..dim).zip(0..dim) {
            let n = (mask as u64).count_ones();
            m[[row, row]] = C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        }
        m
    }

    /// Twist `Z = (1 - iY)/sqrt(2)`, turning anticommutators of odd
    /// operators into twisted commutators.
    pub fn twist(&self) -> Array2<C64> {
        let y = self.grading();
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        for a in 0..dim {
            m[[a, a]] = (C64::new(1.0, 0.0) - C64::i() * y[[a, a]]) / C64::new(2.0f64.sqrt(), 0.0);
        }
        m
    }

    fn validate_homogeneous(&self, f: &Array2<C64>, m: i64) -> Result<(), CarError> {
        for ((a, b), z) in f.indexed_iter() {
            if z.norm() != 0.0 && self.q_values[a] - self.q_values[b] != m {
                return Err(CarError::NotHomogeneous {
                    m,
                    from: self.q_values[b],
                    to: self.q_values[a],
                });
            }
        }
        Ok(())
    }

    /// Charge-sector deformation
    /// `sum_n U(kappa n) F U(-kappa (n + m)) E(n)` for F homogeneous of
    /// charge degree m, with `U(t) = exp(i t K)`. Coincides entrywise with
    /// the generic warped convolution over the joint (K, Q) spectrum.
    pub fn sector_deform(
        &self,
        f: &Array2<C64>,
        m: i64,
        kappa: f64,
    ) -> Result<Array2<C64>, CarError> {
        self.validate_homogeneous(f, m)?;
        let mut out = f.clone();
        for ((a, b), z) in out.indexed_iter_mut() {
            let n = self.q_values[b];
            let phase = kappa * (n as f64) * (self.k_values[a] as f64)
                - kappa * ((n + m) as f64) * (self.k_values[b] as f64);
            *z *= (C64::i() * phase).exp();
        }
        Ok(out)
    }

    /// Entrywise warped convolution over the (K, Q) joint spectrum with
    /// the standard antisymmetric form; reference implementation for the
    /// engine-equivalence checks.
    pub fn warp_via_spectral(&self, f: &Array2<C64>, kappa: f64) -> Array2<C64> {
        let op = Operator::new(self.rep.clone(), f.clone()).unwrap();
        warp(&op, &DeformationMatrix::standard(kappa)).matrix
    }

    /// Residual of the vacuum invariance of the deformation,
    /// `|| deform(F) Omega - F Omega ||`.
    pub fn deformed_vacuum_check(
        &self,
        f: &Array2<C64>,
        m: i64,
        kappa: f64,
    ) -> Result<f64, CarError> {
        let def = self.sector_deform(f, m, kappa)?;
        let mut omega: Array1<C64> = Array1::zeros(self.dim());
        omega[0] = C64::new(1.0, 0.0);
        let diff = &def.dot(&omega) - &f.dot(&omega);
        Ok(diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Derivative of the deformation of a gauge-invariant observable at
    /// kappa = 0: `D = sum_n i n [K, A] E(n)`, entrywise
    /// `i Q_b (K_a - K_b) A_ab`. Its norm vanishes exactly when A commutes
    /// with K on every sector of nonzero charge; both numbers are reported
    /// so the biconditional can be asserted.
    pub fn fixed_point_derivative(&self, a: &Array2<C64>) -> Result<FixedPointReport, CarError> {
        self.validate_homogeneous(a, 0)?;
        let dim = self.dim();
        let mut deriv = Array2::zeros((dim, dim));
        let mut offzero = Array2::zeros((dim, dim));
        for ((r, c), z) in a.indexed_iter() {
            let dk = (self.k_values[r] - self.k_values[c]) as f64;
            deriv[[r, c]] = C64::i() * (self.q_values[c] as f64) * dk * z;
            if self.q_values[c] != 0 {
                offzero[[r, c]] = dk * z;
            }
        }
        Ok(FixedPointReport {
            derivative_norm: frobenius_norm(&deriv),
            offzero_commutator_norm: frobenius_norm(&offzero),
            derivative: deriv,
        })
    }

    /// Distinct spectral shifts `(delta K, delta Q)` the pieces of a B
    /// operator can carry.
    fn shifts(&self) -> Vec<[i64; 2]> {
        let mut set = BTreeSet::new();
        for mode in &self.modes {
            set.insert([mode.k, mode.charge]);
            set.insert([-mode.k, -mode.charge]);
        }
        set.into_iter().collect()
    }

    /// Component of f whose B operator shifts the joint spectrum by `nu`:
    /// mode slots whose creation carries the shift, plus conjugate slots
    /// whose annihilation does. The pieces partition f.
    fn spectral_piece(&self, f: &[C64], nu: [i64; 2]) -> Vec<C64> {
        let d = self.space.d;
        let mut out = vec![C64::new(0.0, 0.0); 2 * d];
        for mode in &self.modes {
            if [mode.k, mode.charge] == nu {
                out[mode.h_index] = f[mode.h_index];
            }
            if [-mode.k, -mode.charge] == nu {
                let conj_slot = if mode.h_index < d { mode.h_index + d } else { mode.h_index - d };
                out[conj_slot] = f[conj_slot];
            }
        }
        out
    }

    /// Fock two-point value `<Omega, B(f) B(g) Omega> = <c f, P g>`.
    pub fn two_point(&self, f: &[C64], g: &[C64]) -> C64 {
        let cf = self.space.conjugate(f);
        self.modes.iter().map(|m| cf[m.h_index].conj() * g[m.h_index]).sum()
    }

    /// Deformed 4-point function evaluated two ways: the quasifree closed
    /// form with the twisted third term,
    ///
    /// `w2(f1,f2) w2(f3,f4) + w2(f1,f4) w2(f2,f3)
    ///  - sum_{nu2, nu3} e^{2 i kappa nu2.theta nu3}
    ///    w2(f1, f3^{nu3}) w2(f2^{nu2}, f4)`,
    ///
    /// and the brute-force matrix element with the inner operators warped
    /// (the outer warps act trivially on the vacuum).
    pub fn deformed_car_fourpoint(
        &self,
        fs: &[Vec<C64>; 4],
        kappa: f64,
    ) -> Result<(C64, C64), CarError> {
        // brute force
        let b1 = self.b_operator(&fs[0])?;
        let b2 = self.warp_via_spectral(&self.b_operator(&fs[1])?, kappa);
        let b3 = self.warp_via_spectral(&self.b_operator(&fs[2])?, kappa);
        let b4 = self.b_operator(&fs[3])?;
        let mut omega: Array1<C64> = Array1::zeros(self.dim());
        omega[0] = C64::new(1.0, 0.0);
        let v = b1.dot(&b2.dot(&b3.dot(&b4.dot(&omega))));
        let brute = v[0];

        // closed form
        let w2 = |f: &[C64], g: &[C64]| self.two_point(f, g);
        let mut closed = w2(&fs[0], &fs[1]) * w2(&fs[2], &fs[3])
            + w2(&fs[0], &fs[3]) * w2(&fs[1], &fs[2]);
        for nu2 in self.shifts() {
            let f2p = self.spectral_piece(&fs[1], nu2);
            for nu3 in self.shifts() {
                let f3p = self.spectral_piece(&fs[2], nu3);
                let phase = 2.0 * kappa * ((nu2[0] * nu3[1] - nu2[1] * nu3[0]) as f64);
                closed -= (C64::i() * phase).exp() * w2(&fs[0], &f3p) * w2(&f2p, &fs[3]);
            }
        }
        Ok((closed, brute))
    }
}

pub struct FixedPointReport {
    pub derivative_norm: f64,
    pub offzero_commutator_norm: f64,
    pub derivative: Array2<C64>,
}

/// The C*-norm of a selfdual field from its closed formula,
/// `||B(f)||^2 = (||f||^2 + sqrt(||f||^4 - |<f, c f>|^2)) / 2`.
pub fn b_norm_formula(space: &SelfdualSpace, f: &[C64]) -> f64 {
    let n2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let cf = space.conjugate(f);
    let z = space.inner(f, &cf).norm_sqr();
    (0.5 * (n2 + (n2 * n2 - z).max(0.0).sqrt())).sqrt()
}

/// Largest singular value by power iteration on M*M; the operators in
/// scope have tiny spectra, so the deterministic start converges fast.
pub fn operator_norm(m: &Array2<C64>) -> f64 {
    let dim = m.dim().0;
    let mm = m.t().mapv(|z| z.conj()).dot(m);
    let mut v: Array1<C64> = Array1::from_iter(
        (0..dim).map(|i| C64::new(1.0 + (i as f64 * 0.7391).sin(), (i as f64 * 0.421).cos())),
    );
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        let w = mm.dot(&v);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.mapv(|z| z / norm);
        if (next - lambda).abs() <= 1e-14 * next.max(1.0) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Quasifree symbol: S = S*, 0 <= S <= 1, c S c = 1 - S.
pub struct QuasifreeSpec {
    pub s: Array2<C64>,
}

impl QuasifreeSpec {
    pub fn validate(&self, space: &SelfdualSpace) -> Result<(), CarError> {
        let n = space.dim();
        if self.s.dim() != (n, n) {
            return Err(CarError::BadQuasifreeSpec("dimension"));
        }
        for i in 0..n {
            for j in 0..n {
                if (self.s[[i, j]] - self.s[[j, i]].conj()).norm() > 1e-12 {
                    return Err(CarError::BadQuasifreeSpec("hermiticity"));
                }
            }
        }
        // c S c = 1 - S, checked columnwise through the antilinear c
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let ce = space.conjugate(&e);
            let sce: Vec<C64> = (0..n)
                .map(|i| (0..n).map(|k| self.s[[i, k]] * ce[k]).sum())
                .collect();
            let csce = space.conjugate(&sce);
            for i in 0..n {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                if (csce[i] - (target - self.s[[i, j]])).norm() > 1e-12 {
                    return Err(CarError::BadQuasifreeSpec("c S c = 1 - S"));
                }
            }
        }
        // positivity of S and 1 - S probed on a deterministic vector suite
        for probe in 0..32 {
            let v: Vec<C64> = (0..n)
                .map(|i| {
                    let t = (probe * n + i) as f64;
                    C64::new((1.3 * t).sin(), (0.7 * t).cos())
                })
                .collect();
            let sv: Vec<C64> = (0..n)
                .map(|i| (0..n).map(|k| self.s[[i, k]] * v[k]).sum())
                .collect();
            let vsv: C64 = v.iter().zip(&sv).map(|(a, b)| a.conj() * b).sum();
            let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vsv.re < -1e-10 || vsv.re > vv + 1e-10 {
                return Err(CarError::BadQuasifreeSpec("0 <= S <= 1"));
            }
        }
        Ok(())
    }
}

/// Quasifree moments from the fermionic pairing sum with two-point values
/// `<c f_i, S f_j>`; odd counts vanish.
pub fn quasifree_moments(
    spec: &QuasifreeSpec,
    space: &SelfdualSpace,
    fs: &[Vec<C64>],
) -> Result<C64, CarError> {
    spec.validate(space)?;
    let n = fs.len();
    if n % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    if n > 12 {
        return Err(CarError::BadMomentCount { got: n, max: 12 });
    }
    let omega = |i: usize, j: usize| {
        let cf = space.conjugate(&fs[i]);
        let sfj: Vec<C64> = (0..space.dim())
            .map(|r| (0..space.dim()).map(|c| spec.s[[r, c]] * fs[j][c]).sum())
            .collect();
        space.inner(&cf, &sfj)
    };
    Ok(assemble_npoint(n, Statistics::Fermi, omega))
}
