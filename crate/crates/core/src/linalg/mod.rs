//! Complex-matrix kernel: Hermitian eigendecomposition by max-modulus
//! deflation, signed frames, and the Jordan split.

mod eigen;
mod frame;
mod matrix;

pub use eigen::{canonicalize_phase, deflate_diagonalize, max_modulus_eigenpair, EigenSystem};
pub use frame::{signed_frame, SignedFrame};
pub use matrix::{inner, vec_norm, ComplexMatrix};
