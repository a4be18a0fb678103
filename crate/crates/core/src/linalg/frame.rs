//! Signed frames: the eigenstructure of a Hermitian matrix stored as two
//! families of mutually orthogonal vectors, `T = Σ |g⟩⟨g| − Σ |h⟩⟨h|`.

use num_complex::Complex64;

use super::eigen::EigenSystem;
use super::matrix::ComplexMatrix;

/// Scaled eigenvectors of a Hermitian matrix, split by eigenvalue sign.
///
/// Vectors are `√|λ| · φ`, kept in extraction order, so norms are
/// nonincreasing within each list and the lists are mutually orthogonal.
#[derive(Clone, Debug)]
pub struct SignedFrame {
    pub dim: usize,
    pub positive: Vec<Vec<Complex64>>,
    pub negative: Vec<Vec<Complex64>>,
}

impl SignedFrame {
    /// `Σ sgn · |g⟩⟨g|` over both lists.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let plus = ComplexMatrix::gram_from_vectors(self.dim, &self.positive);
        let minus = ComplexMatrix::gram_from_vectors(self.dim, &self.negative);
        plus.sub(&minus)
    }

    /// Jordan split `(T⁺, T⁻)`: both positive semidefinite, mutually
    /// annihilating, trace norms adding up to the total.
    pub fn jordan_split(&self) -> (ComplexMatrix, ComplexMatrix) {
        (
            ComplexMatrix::gram_from_vectors(self.dim, &self.positive),
            ComplexMatrix::gram_from_vectors(self.dim, &self.negative),
        )
    }

    /// `Σ ‖g_k‖²`, which equals `Σ |λ_k|` of the source eigensystem.
    pub fn total_weight(&self) -> f64 {
        self.positive
            .iter()
            .chain(&self.negative)
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }
}

/// Splits an eigensystem into sign-separated scaled vectors, dropping
/// eigenvalues inside the cutoff band `rank_cutoff · max(1, Σ|λ|)`.
pub fn signed_frame(eig: &EigenSystem, rank_cutoff: f64) -> SignedFrame {
    let total: f64 = eig.values.iter().map(|v| v.abs()).sum();
    let threshold = rank_cutoff * total.max(1.0);
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (&lambda, phi) in eig.values.iter().zip(&eig.vectors) {
        if lambda > threshold {
            let w = lambda.sqrt();
            positive.push(phi.iter().map(|z| z * w).collect());
        } else if lambda < -threshold {
            let w = (-lambda).sqrt();
            negative.push(phi.iter().map(|z| z * w).collect());
        }
    }
    SignedFrame {
        dim: eig.dim,
        positive,
        negative,
    }
}
