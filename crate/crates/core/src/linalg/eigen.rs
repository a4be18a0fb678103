//! Hermitian eigendecomposition built around deflation: the matrix is peeled
//! one max-modulus eigenpair at a time, each step subtracting the extracted
//! rank-one piece before searching again. A cyclic complex Jacobi sweep
//! supplies the per-step eigenpair.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{DEFAULT_TOL, MAX_JACOBI_SWEEPS};

use super::matrix::{vec_norm, ComplexMatrix};

/// Eigenpairs ordered by nonincreasing modulus.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Real eigenvalues, `|λ_k|` nonincreasing.
    pub values: Vec<f64>,
    /// Unit eigenvectors matching `values`, phase-canonicalized.
    pub vectors: Vec<Vec<Complex64>>,
    pub dim: usize,
}

impl EigenSystem {
    /// Rebuilds `Σ λ_k |φ_k⟩⟨φ_k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for (lambda, phi) in self.values.iter().zip(&self.vectors) {
            m.sub_scaled_outer(-lambda, phi);
        }
        m
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }
}

/// Full eigensolve of an exactly Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns unsorted (value, column-vector) pairs.
///
/// The sweep count is capped generously; convergence is quadratic and the
/// off-diagonal mass is driven to the round-off floor long before the cap.
pub(crate) fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = a.dim();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut m = a.clone();
    let mut basis = ComplexMatrix::identity(n);
    let target = f64::EPSILON * a.frobenius().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m.get(i, j).norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate_pivot(&mut m, &mut basis, p, q);
            }
        }
    }

    let values = (0..n).map(|i| m.get(i, i).re).collect();
    let vectors = (0..n)
        .map(|k| (0..n).map(|i| basis.get(i, k)).collect())
        .collect();
    (values, vectors)
}

/// One complex Jacobi rotation annihilating the (p, q) entry.
fn rotate_pivot(m: &mut ComplexMatrix, basis: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.dim();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        let new_kp = akp * c - akq * phase.conj() * s;
        let new_kq = akp * phase * s + akq * c;
        m.set(k, p, new_kp);
        m.set(p, k, new_kp.conj());
        m.set(k, q, new_kq);
        m.set(q, k, new_kq.conj());
    }
    let shift = 2.0 * c * s * r;
    m.set(p, p, Complex64::new(c * c * app - shift + s * s * aqq, 0.0));
    m.set(q, q, Complex64::new(s * s * app + shift + c * c * aqq, 0.0));
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));

    for k in 0..n {
        let vkp = basis.get(k, p);
        let vkq = basis.get(k, q);
        basis.set(k, p, vkp * c - vkq * phase.conj() * s);
        basis.set(k, q, vkp * phase * s + vkq * c);
    }
}

/// Rotates the first component of modulus above `threshold` onto the positive
/// real axis, removing the overall phase ambiguity.
pub fn canonicalize_phase(v: &mut [Complex64], threshold: f64) {
    for z in v.iter() {
        let r = z.norm();
        if r > threshold {
            let phase = z.conj() / r;
            for w in v.iter_mut() {
                *w *= phase;
            }
            return;
        }
    }
}

/// Descending lexicographic comparison on (re, im) component pairs; the fixed
/// rule that makes degenerate-eigenvalue selection deterministic.
fn lex_greater(a: &[Complex64], b: &[Complex64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x.re != y.re {
            return x.re > y.re;
        }
        if x.im != y.im {
            return x.im > y.im;
        }
    }
    false
}

/// Max-modulus eigenpair selection from a solved system. Ties in modulus break
/// toward the positive eigenvalue; ties in value break toward the
/// lexicographically greatest canonicalized eigenvector.
fn select_max_modulus(
    values: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
    tie_window: f64,
    phase_threshold: f64,
    dim: usize,
) -> (f64, Vec<Complex64>) {
    let max_mod = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max_mod == 0.0 {
        let mut e0 = vec![Complex64::new(0.0, 0.0); dim];
        e0[0] = Complex64::new(1.0, 0.0);
        return (0.0, e0);
    }

    let candidates: Vec<usize> = (0..values.len())
        .filter(|&i| max_mod - values[i].abs() <= tie_window)
        .collect();
    let top = candidates
        .iter()
        .map(|&i| values[i])
        .fold(f64::NEG_INFINITY, f64::max);

    let mut best: Option<(usize, Vec<Complex64>)> = None;
    for &i in &candidates {
        if top - values[i] > tie_window {
            continue;
        }
        let mut v = vectors[i].clone();
        canonicalize_phase(&mut v, phase_threshold);
        let norm = vec_norm(&v);
        if norm > 0.0 {
            for z in v.iter_mut() {
                *z /= norm;
            }
        }
        match &best {
            Some((_, current)) if !lex_greater(&v, current) => {}
            _ => best = Some((i, v)),
        }
    }
    let (idx, vector) = best.expect("candidate set is nonempty");
    (values[idx], vector)
}

fn validate_hermitian(a: &ComplexMatrix, tol: f64, scale: f64) -> Result<()> {
    let deviation = a.hermitian_deviation();
    let threshold = tol * scale;
    if deviation > threshold {
        return Err(Error::NotHermitian {
            deviation,
            threshold,
        });
    }
    Ok(())
}

/// Eigenvalue of maximal modulus with a unit eigenvector.
///
/// The selection realizes `|λ| = max over the unit ball of |⟨φ|Aφ⟩|`; `tol`
/// controls the Hermiticity gate, the tie window and the phase threshold, all
/// relative to `max(1, ‖A‖₁)`. The zero matrix yields `(0, e₀)`.
pub fn max_modulus_eigenpair(a: &ComplexMatrix, tol: f64) -> Result<(f64, Vec<Complex64>)> {
    let scale = a.trace_norm(false).max(1.0);
    validate_hermitian(a, tol, scale)?;
    let sym = a.symmetrized();
    let (values, vectors) = hermitian_eigen(&sym);
    Ok(select_max_modulus(
        values,
        vectors,
        tol * scale,
        tol,
        a.dim(),
    ))
}

/// Diagonalization by repeated max-modulus extraction.
///
/// Each round takes the dominant eigenpair of the working matrix, records it,
/// and subtracts `λ |φ⟩⟨φ|` before the next round. Extraction stops once the
/// dominant modulus falls to `rank_cutoff · max(1, ‖A‖₁)`, so exact zero modes
/// and round-off artifacts are never stored.
pub fn deflate_diagonalize(a: &ComplexMatrix, rank_cutoff: f64) -> Result<EigenSystem> {
    let scale = a.trace_norm(false).max(1.0);
    validate_hermitian(a, DEFAULT_TOL, scale)?;
    let threshold = rank_cutoff * scale;

    let mut work = a.symmetrized();
    let mut values = Vec::new();
    let mut vectors: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..a.dim() {
        let (vals, vecs) = hermitian_eigen(&work);
        let (lambda, phi) = select_max_modulus(vals, vecs, threshold, rank_cutoff, a.dim());
        if lambda.abs() <= threshold {
            break;
        }
        work.sub_scaled_outer(lambda, &phi);
        values.push(lambda);
        vectors.push(phi);
    }
    Ok(EigenSystem {
        values,
        vectors,
        dim: a.dim(),
    })
}
