use num_complex::Complex64;

use crate::error::{Error, Result};

use super::eigen::hermitian_eigen;

/// Dense square complex matrix, row-major storage.
///
/// All toolkit operations go through this type; entries are validated finite
/// on construction from raw data.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        m
    }

    /// Builds a matrix from rows, rejecting ragged, non-square or non-finite input.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    /// Hermitian part `(A + A*)/2`; the diagonal comes out exactly real.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            out.set(i, i, Complex64::new(self.get(i, i).re, 0.0));
            for j in (i + 1)..self.dim {
                let z = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out.set(i, j, z);
                out.set(j, i, z.conj());
            }
        }
        out
    }

    /// Largest entrywise deviation from conjugate symmetry, `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol_abs: f64) -> bool {
        self.hermitian_deviation() <= tol_abs
    }

    /// Entrywise l1 norm, the sum of all entry moduli.
    ///
    /// Dominates the trace norm; used as the cheap summability bound in the
    /// compression step.
    pub fn entrywise_l1(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn entrywise_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Trace norm `‖A‖₁`.
    ///
    /// With `hermitian` set, computed as the sum of eigenvalue moduli; otherwise
    /// as the sum of singular values (eigenvalues of `A*A`, square-rooted).
    /// The two routes agree on Hermitian input.
    pub fn trace_norm(&self, hermitian: bool) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        if self.entrywise_max() == 0.0 {
            return 0.0;
        }
        if hermitian {
            let (values, _) = hermitian_eigen(&self.symmetrized());
            values.iter().map(|v| v.abs()).sum()
        } else {
            let gram = self.adjoint().mul(self);
            let (values, _) = hermitian_eigen(&gram);
            values.iter().map(|v| v.max(0.0).sqrt()).sum()
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * v[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Largest entrywise deviation `max |a_ij - b_ij|`.
    pub fn max_abs_deviation(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim, "deviation dimension mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// In-place rank-one update `A -= λ |v⟩⟨v|`, mirrored so conjugate symmetry
    /// is preserved bit for bit.
    pub fn sub_scaled_outer(&mut self, lambda: f64, v: &[Complex64]) {
        assert_eq!(self.dim, v.len(), "outer product dimension mismatch");
        for i in 0..self.dim {
            let d = self.get(i, i).re - lambda * v[i].norm_sqr();
            self.set(i, i, Complex64::new(d, 0.0));
            for j in (i + 1)..self.dim {
                let z = self.get(i, j) - v[i] * v[j].conj() * lambda;
                self.set(i, j, z);
                self.set(j, i, z.conj());
            }
        }
    }

    /// Gram matrix `Σ |v⟩⟨v|` of a family of vectors, accumulated with exact
    /// conjugate symmetry.
    pub fn gram_from_vectors(dim: usize, vectors: &[Vec<Complex64>]) -> Self {
        let mut out = Self::zeros(dim);
        for v in vectors {
            assert_eq!(v.len(), dim, "gram vector dimension mismatch");
            for i in 0..dim {
                let d = out.get(i, i).re + v[i].norm_sqr();
                out.set(i, i, Complex64::new(d, 0.0));
                for j in (i + 1)..dim {
                    let z = out.get(i, j) + v[i] * v[j].conj();
                    out.set(i, j, z);
                    out.set(j, i, z.conj());
                }
            }
        }
        out
    }
}

/// `⟨φ|ψ⟩ = Σ conj(φ_m) ψ_m`, antilinear in the first slot.
pub fn inner(phi: &[Complex64], psi: &[Complex64]) -> Complex64 {
    phi.iter().zip(psi).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_rows_rejects_ragged() {
        let err = ComplexMatrix::from_rows(vec![vec![c(1.0, 0.0)], vec![]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn from_rows_rejects_nan() {
        let err =
            ComplexMatrix::from_rows(vec![vec![c(f64::NAN, 0.0)]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 0 }));
    }

    #[test]
    fn entrywise_l1_examples() {
        let a = ComplexMatrix::diagonal(&[3.0, -1.0]);
        assert_eq!(a.entrywise_l1(), 4.0);
        let b =
            ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
                .unwrap();
        assert_eq!(b.entrywise_l1(), 2.0);
    }

    #[test]
    fn symmetrized_is_hermitian() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 2.0), c(3.0, -1.0)],
            vec![c(0.5, 0.25), c(-2.0, -4.0)],
        ])
        .unwrap();
        let s = a.symmetrized();
        assert_eq!(s.hermitian_deviation(), 0.0);
        assert_eq!(s.get(0, 0), c(1.0, 0.0));
    }

    #[test]
    fn sub_scaled_outer_keeps_symmetry() {
        let mut a = ComplexMatrix::identity(3);
        let v = vec![c(0.5, 0.5), c(0.5, -0.5), c(0.0, 0.0)];
        a.sub_scaled_outer(2.0, &v);
        assert_eq!(a.hermitian_deviation(), 0.0);
    }
}
