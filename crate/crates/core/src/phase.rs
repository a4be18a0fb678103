//! Phase-measurement example: phase-shift covariant measures built from a
//! unit-diagonal coefficient matrix on an arc partition of the circle, probed
//! with truncated coherent states.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::sfm::{AtomicSfm, SesquiForm};
use crate::DEFAULT_TOL;

/// Half-open arcs `[θ_j, θ_{j+1})` covering the circle exactly once.
#[derive(Clone, Debug)]
pub struct ArcPartition {
    breakpoints: Vec<f64>,
}

impl ArcPartition {
    /// `M` equal arcs starting at angle zero.
    pub fn uniform(arcs: usize) -> Result<Self> {
        if arcs == 0 {
            return Err(Error::InvalidPartition("at least one arc required".into()));
        }
        let breakpoints = (0..=arcs).map(|j| TAU * j as f64 / arcs as f64).collect();
        Self::from_breakpoints(breakpoints)
    }

    /// Strictly increasing angles `θ₀ < … < θ_M` with `θ_M = θ₀ + 2π`.
    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidPartition(
                "need at least two breakpoints".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].is_finite() && w[0].is_finite() && w[1] > w[0]) {
                return Err(Error::InvalidPartition(format!(
                    "breakpoints not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        let span = breakpoints[breakpoints.len() - 1] - breakpoints[0];
        if (span - TAU).abs() > 1e-9 {
            return Err(Error::InvalidPartition(format!(
                "breakpoints span {span}, expected 2π"
            )));
        }
        Ok(Self { breakpoints })
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Arc `j` as `(start, end)`.
    pub fn arc(&self, j: usize) -> (f64, f64) {
        (self.breakpoints[j], self.breakpoints[j + 1])
    }

    pub fn arcs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(|j| self.arc(j))
    }

    /// The partition shifted by `delta`; with `delta` a multiple of the arc
    /// length of a uniform partition this permutes the arcs.
    pub fn rotated(&self, delta: f64) -> Result<Self> {
        Self::from_breakpoints(self.breakpoints.iter().map(|t| t + delta).collect())
    }
}

/// Hermitian coefficient matrix with unit diagonal. Positivity is not
/// required; indefinite choices are the interesting ones.
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    matrix: ComplexMatrix,
}

impl CoefficientMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > DEFAULT_TOL {
            return Err(Error::InvalidCoefficients(format!(
                "not Hermitian, deviation {dev:.3e}"
            )));
        }
        for i in 0..matrix.dim() {
            let d = matrix.get(i, i);
            if (d - Complex64::new(1.0, 0.0)).norm() > DEFAULT_TOL {
                return Err(Error::InvalidCoefficients(format!(
                    "diagonal entry {i} is {d}, expected 1"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// No off-diagonal correlations: the measure becomes `(arc length / 2π)·I`.
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// All entries one; the canonical positive-semidefinite rank-one choice.
    pub fn all_ones(dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, Complex64::new(1.0, 0.0));
            }
        }
        Self { matrix: m }
    }

    /// `c_mn = r^|m−n|`; interpolates between the identity (`r = 0`) and
    /// all-ones (`r = 1`), leaving the positive regime for `r > 1`.
    pub fn toeplitz(dim: usize, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidCoefficients(format!("non-finite ratio {r}")));
        }
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(
                    i,
                    j,
                    Complex64::new(r.powi((i as i32 - j as i32).abs()), 0.0),
                );
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Minimum eigenvalue of the leading `size × size` block; a positivity
    /// diagnostic for the truncation-relaxed regime.
    pub fn leading_block_min_eigenvalue(&self, size: usize) -> Result<f64> {
        let size = size.min(self.dim());
        if size == 0 {
            return Err(Error::InvalidValue("empty leading block".into()));
        }
        let mut block = ComplexMatrix::zeros(size);
        for i in 0..size {
            for j in 0..size {
                block.set(i, j, self.matrix.get(i, j));
            }
        }
        let eig = crate::linalg::deflate_diagonalize(&block, crate::DEFAULT_RANK_CUTOFF)?;
        Ok(eig.values.iter().copied().fold(0.0, f64::min))
    }
}

/// Moment `∫_X w^{n−m} dμ(w)` of the normalized circle measure over the arc
/// `[a, b)`: the arc fraction for `m = n`, otherwise
/// `(e^{i(n−m)b} − e^{i(n−m)a}) / (2πi(n−m))`.
pub fn arc_moment(m: usize, n: usize, start: f64, end: f64) -> Result<Complex64> {
    if !(start.is_finite() && end.is_finite() && end > start && end - start <= TAU + 1e-12) {
        return Err(Error::InvalidArc { start, end });
    }
    let k = n as i64 - m as i64;
    if k == 0 {
        return Ok(Complex64::new((end - start) / TAU, 0.0));
    }
    let kf = k as f64;
    let num = Complex64::new(0.0, kf * end).exp() - Complex64::new(0.0, kf * start).exp();
    Ok(num / Complex64::new(0.0, TAU * kf))
}

/// Label for arc `j` of a partition; stable across the toolkit's outputs.
pub fn arc_label(j: usize) -> String {
    format!("arc{j}")
}

/// The covariant measure with entries `c_mn · ∫_X w^{n−m} dμ(w)` per arc.
/// With a unit diagonal the total over all arcs is the identity.
pub fn phase_sfm(c: &CoefficientMatrix, partition: &ArcPartition) -> Result<AtomicSfm> {
    let dim = c.dim();
    let mut atoms = Vec::with_capacity(partition.len());
    for (j, (a, b)) in partition.arcs().enumerate() {
        let mut form = ComplexMatrix::zeros(dim);
        for m in 0..dim {
            for n in 0..dim {
                form.set(m, n, c.matrix().get(m, n) * arc_moment(m, n, a, b)?);
            }
        }
        atoms.push((arc_label(j), SesquiForm::new(form)));
    }
    AtomicSfm::new(dim, atoms)
}

/// Truncated coherent state: `z^n/√(n!)` for `n < dim`, renormalized to unit
/// norm. `z = 0` degenerates to the first basis vector.
pub fn coherent_vector(z: Complex64, dim: usize) -> Result<Vec<Complex64>> {
    if dim == 0 {
        return Err(Error::InvalidValue("dimension must be positive".into()));
    }
    let mut v = Vec::with_capacity(dim);
    let mut term = Complex64::new(1.0, 0.0);
    v.push(term);
    for n in 1..dim {
        term = term * z / (n as f64).sqrt();
        v.push(term);
    }
    let norm = v.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|w| w / norm).collect())
}

/// Per-atom values `E({atom})(φ, φ)` with realness and negativity diagnostics.
#[derive(Clone, Debug)]
pub struct ProbabilityReport {
    pub labels: Vec<String>,
    pub values: Vec<Complex64>,
    pub total: Complex64,
    pub min_real: f64,
    pub max_imag_abs: f64,
}

impl ProbabilityReport {
    /// All values real and nonnegative within tolerance.
    pub fn is_distribution(&self, tol: f64) -> bool {
        self.min_real >= -tol && self.max_imag_abs <= tol
    }
}

pub fn probabilities(e: &AtomicSfm, phi: &[Complex64]) -> Result<ProbabilityReport> {
    if phi.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            got: phi.len(),
        });
    }
    let mut labels = Vec::with_capacity(e.len());
    let mut values = Vec::with_capacity(e.len());
    let mut total = Complex64::new(0.0, 0.0);
    let mut min_real = f64::INFINITY;
    let mut max_imag_abs: f64 = 0.0;
    for (label, form) in e.atoms() {
        let value = form.evaluate(phi, phi)?;
        total += value;
        min_real = min_real.min(value.re);
        max_imag_abs = max_imag_abs.max(value.im.abs());
        labels.push(label.clone());
        values.push(value);
    }
    Ok(ProbabilityReport {
        labels,
        values,
        total,
        min_real,
        max_imag_abs,
    })
}

/// A state and atom witnessing a negative measure value.
#[derive(Clone, Debug)]
pub struct NegativityWitness {
    pub value: f64,
    pub atom_label: String,
    pub state_description: String,
    pub state: Vec<Complex64>,
}

/// Deterministic grid search for negative values: basis states and all
/// two-basis superpositions `(e_m + e^{iθ} e_n)/√2` over an angle grid.
/// Returns the most negative find, or the overall minimum if none is
/// negative.
pub fn negativity_grid_scan(e: &AtomicSfm, angle_steps: usize) -> Result<NegativityWitness> {
    let dim = e.dim();
    let steps = angle_steps.max(1);
    let mut best: Option<NegativityWitness> = None;

    let mut consider = |state: Vec<Complex64>, description: String| -> Result<()> {
        let report = probabilities(e, &state)?;
        for (label, value) in report.labels.iter().zip(&report.values) {
            if best.as_ref().is_none_or(|b| value.re < b.value) {
                best = Some(NegativityWitness {
                    value: value.re,
                    atom_label: label.clone(),
                    state_description: description.clone(),
                    state: state.clone(),
                });
            }
        }
        Ok(())
    };

    for m in 0..dim {
        let mut state = vec![Complex64::new(0.0, 0.0); dim];
        state[m] = Complex64::new(1.0, 0.0);
        consider(state, format!("e{m}"))?;
    }
    let amp = 1.0 / 2.0f64.sqrt();
    for m in 0..dim {
        for n in (m + 1)..dim {
            for step in 0..steps {
                let theta = TAU * step as f64 / steps as f64;
                let mut state = vec![Complex64::new(0.0, 0.0); dim];
                state[m] = Complex64::new(amp, 0.0);
                state[n] = Complex64::new(0.0, theta).exp() * amp;
                consider(state, format!("(e{m} + e^(i{theta:.4}) e{n})/sqrt(2)"))?;
            }
        }
    }
    Ok(best.expect("scan visits at least the basis states"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn arc_moment_diagonal_is_arc_fraction() {
        let v = arc_moment(2, 2, 0.0, PI).unwrap();
        assert_eq!(v, c(0.5, 0.0));
    }

    #[test]
    fn arc_moment_half_circle() {
        // ∫_0^π w dμ = i/π
        let v = arc_moment(0, 1, 0.0, PI).unwrap();
        assert!((v - c(0.0, 1.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn arc_moment_full_circle_off_diagonal_vanishes() {
        for (m, n) in [(0usize, 1usize), (2, 5), (7, 3)] {
            let v = arc_moment(m, n, 0.0, TAU).unwrap();
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn arc_moment_rejects_bad_arcs() {
        assert!(matches!(
            arc_moment(0, 1, 1.0, 1.0),
            Err(Error::InvalidArc { .. })
        ));
        assert!(matches!(
            arc_moment(0, 1, 0.0, 7.0),
            Err(Error::InvalidArc { .. })
        ));
    }

    #[test]
    fn arc_moment_matches_quadrature() {
        // midpoint rule with 2^16 points on a few (m, n, arc) combinations
        let cases = [
            (0usize, 1usize, 0.0, PI),
            (1, 4, 0.3, 2.0),
            (5, 2, 1.0, 1.0 + PI),
            (3, 3, 0.25, 0.75),
        ];
        let points = 1 << 16;
        for (m, n, a, b) in cases {
            let k = n as f64 - m as f64;
            let h = (b - a) / points as f64;
            let mut sum = c(0.0, 0.0);
            for p in 0..points {
                let theta = a + (p as f64 + 0.5) * h;
                sum += c(0.0, k * theta).exp();
            }
            let oracle = sum * h / TAU;
            let v = arc_moment(m, n, a, b).unwrap();
            assert!(
                (v - oracle).norm() < 1e-8,
                "moment {v} vs quadrature {oracle}"
            );
        }
    }

    #[test]
    fn phase_sfm_identity_coefficients() {
        let part = ArcPartition::uniform(4).unwrap();
        let e = phase_sfm(&CoefficientMatrix::identity(3), &part).unwrap();
        for j in 0..4 {
            let form = e.form(j).matrix();
            let expected = ComplexMatrix::identity(3).scaled(c(0.25, 0.0));
            assert!(form.max_abs_deviation(&expected) < 1e-15);
        }
    }

    #[test]
    fn phase_sfm_all_ones_halves() {
        // atom [0, π) of the all-ones 2×2 choice: [[1/2, i/π], [-i/π, 1/2]]
        let part = ArcPartition::from_breakpoints(vec![0.0, PI, TAU]).unwrap();
        let e = phase_sfm(&CoefficientMatrix::all_ones(2), &part).unwrap();
        let form = e.form(0).matrix();
        assert!((form.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((form.get(0, 1) - c(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!((form.get(1, 0) - c(0.0, -1.0 / PI)).norm() < 1e-15);
        assert!((form.get(1, 1) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_sfm_total_is_identity() {
        let part = ArcPartition::uniform(16).unwrap();
        let c_matrix = CoefficientMatrix::toeplitz(8, 0.7).unwrap();
        let e = phase_sfm(&c_matrix, &part).unwrap();
        let dev = e.total().max_abs_deviation(&ComplexMatrix::identity(8));
        assert!(dev < 1e-12, "total deviates from identity by {dev:.3e}");
    }

    #[test]
    fn phase_sfm_is_symmetric_for_hermitian_coefficients() {
        let part = ArcPartition::uniform(6).unwrap();
        let e = phase_sfm(&CoefficientMatrix::all_ones(4), &part).unwrap();
        assert!(e.is_symmetric(1e-15));
    }

    #[test]
    fn covariance_under_arc_rotation() {
        // shifting a uniform partition by one arc matches conjugation by the
        // diagonal phase shift diag(e^{iδn})
        let arcs = 8;
        let dim = 5;
        let delta = TAU / arcs as f64;
        let part = ArcPartition::uniform(arcs).unwrap();
        let shifted = part.rotated(delta).unwrap();
        let cm = CoefficientMatrix::toeplitz(dim, 0.5).unwrap();
        let e = phase_sfm(&cm, &part).unwrap();
        let e_shifted = phase_sfm(&cm, &shifted).unwrap();
        for j in 0..arcs {
            let original = e.form(j).matrix();
            let moved = e_shifted.form(j).matrix();
            let mut conjugated = ComplexMatrix::zeros(dim);
            for m in 0..dim {
                for n in 0..dim {
                    let phase = c(0.0, delta * (n as f64 - m as f64)).exp();
                    conjugated.set(m, n, original.get(m, n) * phase);
                }
            }
            assert!(moved.max_abs_deviation(&conjugated) < 1e-12);
        }
    }

    #[test]
    fn refinement_resums_to_coarse() {
        // split every arc in two and re-sum
        let dim = 4;
        let cm = CoefficientMatrix::all_ones(dim);
        let coarse = ArcPartition::uniform(4).unwrap();
        let fine = ArcPartition::uniform(8).unwrap();
        let e_coarse = phase_sfm(&cm, &coarse).unwrap();
        let e_fine = phase_sfm(&cm, &fine).unwrap();
        for j in 0..4 {
            let resummed = e_fine
                .form(2 * j)
                .matrix()
                .add(e_fine.form(2 * j + 1).matrix());
            assert!(resummed.max_abs_deviation(e_coarse.form(j).matrix()) < 1e-14);
        }
    }

    #[test]
    fn full_circle_evaluation_is_plain_inner_product() {
        // E(Ω) = I, so evaluating over all atoms returns ⟨φ|ψ⟩
        let part = ArcPartition::uniform(7).unwrap();
        let e = phase_sfm(&CoefficientMatrix::toeplitz(4, 0.9).unwrap(), &part).unwrap();
        let phi = coherent_vector(c(1.0, 0.5), 4).unwrap();
        let psi = coherent_vector(c(-0.3, 2.0), 4).unwrap();
        let labels = e.labels();
        let value = e.evaluate(&labels, &phi, &psi).unwrap();
        let ip: Complex64 = phi.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        assert!((value - ip).norm() < 1e-12);
    }

    #[test]
    fn entry_variation_matches_direct_sum() {
        // |E_mn|(Ω) = |c_mn| Σ_arcs |moment|, summed arc by arc
        let part = ArcPartition::uniform(9).unwrap();
        let cm = CoefficientMatrix::toeplitz(5, 0.6).unwrap();
        let e = phase_sfm(&cm, &part).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                let mut direct = 0.0;
                for (a, b) in part.arcs() {
                    direct += (cm.matrix().get(m, n) * arc_moment(m, n, a, b).unwrap()).norm();
                }
                let got = e.entry_total_variation(m, n).unwrap();
                assert!((got - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn coherent_vector_cases() {
        let v = coherent_vector(c(3.7, -1.2), 1).unwrap();
        assert_eq!(v, vec![c(1.0, 0.0)]);

        // z = 1, N = 4: normalization of (1, 1, 1/√2, 1/√6)
        let v = coherent_vector(c(1.0, 0.0), 4).unwrap();
        let raw = [1.0, 1.0, 1.0 / 2.0f64.sqrt(), 1.0 / 6.0f64.sqrt()];
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (got, want) in v.iter().zip(raw) {
            assert!((got - c(want / norm, 0.0)).norm() < 1e-15);
        }
        let unit: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((unit - 1.0).abs() < 1e-15);

        // small z approaches the vacuum component
        let v = coherent_vector(c(1e-8, 0.0), 6).unwrap();
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-15);

        // z = 0 degenerates cleanly
        let v = coherent_vector(c(0.0, 0.0), 3).unwrap();
        assert_eq!(v[0], c(1.0, 0.0));
        assert_eq!(v[1], c(0.0, 0.0));
    }

    #[test]
    fn probabilities_uniform_for_identity_coefficients() {
        let part = ArcPartition::uniform(5).unwrap();
        let e = phase_sfm(&CoefficientMatrix::identity(3), &part).unwrap();
        let phi = coherent_vector(c(1.3, 0.4), 3).unwrap();
        let report = probabilities(&e, &phi).unwrap();
        for value in &report.values {
            assert!((value - c(0.2, 0.0)).norm() < 1e-12);
        }
        assert!((report.total - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn probabilities_all_ones_is_distribution() {
        let part = ArcPartition::uniform(16).unwrap();
        let e = phase_sfm(&CoefficientMatrix::all_ones(8), &part).unwrap();
        for z in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0)] {
            let phi = coherent_vector(z, 8).unwrap();
            let report = probabilities(&e, &phi).unwrap();
            assert!(report.is_distribution(1e-10));
            assert!((report.total - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn probabilities_peak_follows_phase_parameter() {
        let part = ArcPartition::uniform(16).unwrap();
        let e = phase_sfm(&CoefficientMatrix::all_ones(8), &part).unwrap();
        let phi = coherent_vector(c(2.0, 0.0), 8).unwrap();
        let report = probabilities(&e, &phi).unwrap();
        let peak = report
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
            .unwrap()
            .0;
        // arg(z) = 0 lies in the first or last arc's closure
        assert!(peak == 0 || peak == 15, "peak at arc {peak}");
    }

    #[test]
    fn non_psd_coefficients_yield_negative_value() {
        // c01 = c10 = 2 breaks positivity of the 2×2 block
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(2.0, 0.0));
        m.set(1, 0, c(2.0, 0.0));
        let cm = CoefficientMatrix::new(m).unwrap();
        let part = ArcPartition::from_breakpoints(vec![0.0, PI, TAU]).unwrap();
        let e = phase_sfm(&cm, &part).unwrap();
        let witness = negativity_grid_scan(&e, 64).unwrap();
        // min eigenvalue of [[1/2, 2i/π], [-2i/π, 1/2]] is 1/2 - 2/π
        let expected = 0.5 - 2.0 / PI;
        assert!(witness.value < 0.0);
        assert!((witness.value - expected).abs() < 1e-9);
    }

    #[test]
    fn coefficient_validation() {
        let mut bad_diag = ComplexMatrix::identity(2);
        bad_diag.set(0, 0, c(0.5, 0.0));
        assert!(matches!(
            CoefficientMatrix::new(bad_diag),
            Err(Error::InvalidCoefficients(_))
        ));
        let mut skew = ComplexMatrix::identity(2);
        skew.set(0, 1, c(0.0, 1.0));
        skew.set(1, 0, c(0.0, 1.0));
        assert!(matches!(
            CoefficientMatrix::new(skew),
            Err(Error::InvalidCoefficients(_))
        ));
        // block diagnostic: all-ones 3×3 is PSD, toeplitz(1.5) is not
        let ones = CoefficientMatrix::all_ones(3);
        assert!(ones.leading_block_min_eigenvalue(3).unwrap() > -1e-12);
        let wild = CoefficientMatrix::toeplitz(3, 1.5).unwrap();
        assert!(wild.leading_block_min_eigenvalue(3).unwrap() < -1e-3);
    }

    #[test]
    fn partition_validation() {
        assert!(ArcPartition::uniform(0).is_err());
        assert!(ArcPartition::from_breakpoints(vec![0.0, 1.0]).is_err());
        assert!(ArcPartition::from_breakpoints(vec![0.0, 0.0, TAU]).is_err());
        let p = ArcPartition::uniform(3).unwrap();
        assert_eq!(p.len(), 3);
    }
}
