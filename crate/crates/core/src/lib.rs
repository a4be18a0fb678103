//! Sesquilinear form measures on finite atomic spaces.
//!
//! A sesquilinear form measure (SFM) assigns to every subset of a finite set
//! of atoms a sesquilinear form on a truncated basis, entrywise σ-additively.
//! This crate represents such measures and carries them through a constructive
//! pipeline:
//!
//! 1. compression to a trace-class operator measure of bounded variation via a
//!    positive diagonal scaling ([`sfm`]),
//! 2. diagonalization of the per-atom densities by max-modulus deflation and
//!    Jordan splitting ([`linalg`]),
//! 3. a four-part decomposition `E = Σ iᵏ E⁽ᵏ⁾` into positive SFMs
//!    ([`decomposition`]),
//! 4. a spectral dilation with a unitary `W` satisfying `W⁴ = I`, with
//!    verification and unitary-equivalence testing ([`dilation`]),
//! 5. a phase-measurement example generator on arc partitions of the circle
//!    ([`phase`]).
//!
//! [`doc`] defines the JSON and CSV interchange formats used by the `sfmkit`
//! command-line tool.

pub mod decomposition;
pub mod dilation;
pub mod doc;
pub mod error;
pub mod linalg;
pub mod phase;
pub mod sfm;

pub use error::{Error, Result};

/// Relative cutoff under which eigenvalues are treated as rank deficiency.
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-12;

/// Default verification tolerance, relative to `max(1, scale)` of the checked
/// quantity.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Cap on cyclic Jacobi sweeps; convergence is quadratic, so the bound is
/// never reached for the matrix sizes this crate targets.
pub(crate) const MAX_JACOBI_SWEEPS: usize = 64;
