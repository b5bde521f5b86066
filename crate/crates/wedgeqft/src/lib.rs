//! Numerical toolkit for warped-convolution deformations of free quantum
//! fields localized in wedge regions.
//!
//! The crate is organized around finite-dimensional truncations on which
//! every closed-form deformation identity can be checked exactly or to
//! quadrature accuracy:
//!
//! * [`spectral`]: warped convolutions on representations with pure-point
//!   joint spectrum, plus a regularized oscillatory-integral oracle.
//! * [`wick`]: constrained pairing enumeration for quasifree moments,
//!   bosonic and fermionic.
//! * [`geometry`]: edges and wedges on Minkowski, de Sitter and FRW
//!   backends with causal predicates and inclusion laws.
//! * [`scalar`]: mass-shell grids, the covariant inner product and the
//!   truncated bosonic Fock space of the scalar free field.
//! * [`thermal`]: the doubled (particle/hole) thermal representation,
//!   deformed ladder operators and fields, exchange relations, the
//!   locality commutator reduction and deformed n-point functions.
//! * [`car`]: the finite-dimensional selfdual CAR algebra with gauge
//!   sectors, charge-sector deformation and its fixed-point analysis.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything can be evaluated in parallel over parameter
//! grids.

pub mod car;
pub mod geometry;
pub mod scalar;
pub mod spectral;
pub mod thermal;
pub mod wick;

pub use num_complex::Complex64 as C64;
