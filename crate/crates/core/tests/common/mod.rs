//! Shared generators for the integration suites: seeded random matrices,
//! measures and states.
#![allow(dead_code)] // each test binary uses its own subset

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfmkit_core::linalg::ComplexMatrix;
use sfmkit_core::sfm::{AtomicSfm, SesquiForm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let rows = (0..dim)
        .map(|_| (0..dim).map(|_| random_complex(rng)).collect())
        .collect();
    ComplexMatrix::from_rows(rows).expect("generated entries are finite")
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    random_matrix(rng, dim).symmetrized()
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn atom_labels(count: usize) -> Vec<String> {
    (0..count).map(|j| format!("w{j}")).collect()
}

/// A general (neither symmetric nor positive) random measure.
pub fn random_sfm(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> AtomicSfm {
    let atoms = atom_labels(atoms)
        .into_iter()
        .map(|label| (label, SesquiForm::new(random_matrix(rng, dim))))
        .collect();
    AtomicSfm::new(dim, atoms).expect("well-formed random measure")
}

/// A positive random measure: every atom is a Gram matrix.
pub fn random_positive_sfm(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> AtomicSfm {
    let atoms = atom_labels(atoms)
        .into_iter()
        .map(|label| {
            let factors: Vec<Vec<Complex64>> = (0..dim)
                .map(|_| (0..dim).map(|_| random_complex(rng)).collect())
                .collect();
            (
                label,
                SesquiForm::new(ComplexMatrix::gram_from_vectors(dim, &factors)),
            )
        })
        .collect();
    AtomicSfm::new(dim, atoms).expect("well-formed random measure")
}

/// A symmetric (atomwise Hermitian) random measure.
pub fn random_symmetric_sfm(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> AtomicSfm {
    let atoms = atom_labels(atoms)
        .into_iter()
        .map(|label| (label, SesquiForm::new(random_hermitian(rng, dim))))
        .collect();
    AtomicSfm::new(dim, atoms).expect("well-formed random measure")
}

/// A random subset of the measure's atom labels (possibly empty).
pub fn random_subset<'a>(rng: &mut ChaCha8Rng, e: &'a AtomicSfm) -> Vec<&'a str> {
    e.labels()
        .into_iter()
        .filter(|_| rng.gen_bool(0.5))
        .collect()
}

/// A random unitary matrix as row vectors, by Gram-Schmidt on random rows.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<Complex64>> {
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        for prev in &rows {
            let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= overlap * p;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            rows.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    rows
}
