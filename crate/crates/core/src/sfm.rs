//! Sesquilinear forms, atomic form measures, and the compression pipeline:
//! diagonal scaling, trace-class measure, total-variation base measure, and
//! per-atom density.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix};

/// A sesquilinear form on the truncated basis, antilinear in the first slot,
/// stored as its coefficient matrix `Φ_mn = Φ(e_m, e_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SesquiForm {
    matrix: ComplexMatrix,
}

impl SesquiForm {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(ComplexMatrix::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Φ(φ, ψ) = Σ conj(φ_m) Φ_mn ψ_n`.
    pub fn evaluate(&self, phi: &[Complex64], psi: &[Complex64]) -> Result<Complex64> {
        let n = self.dim();
        if phi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: phi.len(),
            });
        }
        if psi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: psi.len(),
            });
        }
        Ok(inner(phi, &self.matrix.mul_vec(psi)))
    }

    /// Adjoint form `Φ*(φ, ψ) = conj(Φ(ψ, φ))`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.matrix.adjoint())
    }

    /// Splits into Hermitian parts `(A, B)` with `Φ = A + iB`,
    /// `A = (Φ + Φ*)/2` and `B = (iΦ* − iΦ)/2`.
    pub fn symmetric_split(&self) -> (SesquiForm, SesquiForm) {
        let adj = self.matrix.adjoint();
        let re = self.matrix.add(&adj).scaled(Complex64::new(0.5, 0.0));
        let im = adj
            .sub(&self.matrix)
            .scaled(Complex64::new(0.0, 0.5));
        (Self::new(re), Self::new(im))
    }

    pub fn is_hermitian(&self, tol_abs: f64) -> bool {
        self.matrix.is_hermitian(tol_abs)
    }
}

/// A sesquilinear form measure on a finite atomic space: one labeled form per
/// atom, the value on a set being the entrywise sum over its atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicSfm {
    dim: usize,
    atoms: Vec<(String, SesquiForm)>,
}

impl AtomicSfm {
    pub fn new(dim: usize, atoms: Vec<(String, SesquiForm)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidValue("dimension must be positive".into()));
        }
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for (label, form) in &atoms {
            if form.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: form.dim(),
                });
            }
            if atoms.iter().filter(|(l, _)| l == label).count() > 1 {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.atoms.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn atoms(&self) -> &[(String, SesquiForm)] {
        &self.atoms
    }

    pub fn form(&self, index: usize) -> &SesquiForm {
        &self.atoms[index].1
    }

    pub fn label(&self, index: usize) -> &str {
        &self.atoms[index].0
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.atoms
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Resolves a label set to atom indices; duplicates collapse (set
    /// semantics), unknown labels error.
    pub fn resolve(&self, set: &[&str]) -> Result<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        for label in set {
            seen[self.index_of(label)?] = true;
        }
        Ok((0..self.atoms.len()).filter(|&j| seen[j]).collect())
    }

    /// `E(X)` as a matrix: entrywise sum of the member forms.
    pub fn sum_over(&self, set: &[&str]) -> Result<ComplexMatrix> {
        let mut total = ComplexMatrix::zeros(self.dim);
        for j in self.resolve(set)? {
            total = total.add(self.atoms[j].1.matrix());
        }
        Ok(total)
    }

    /// `E(Ω)`.
    pub fn total(&self) -> ComplexMatrix {
        let mut total = ComplexMatrix::zeros(self.dim);
        for (_, form) in &self.atoms {
            total = total.add(form.matrix());
        }
        total
    }

    /// `E_X(φ, ψ)`, additive over disjoint sets.
    pub fn evaluate(&self, set: &[&str], phi: &[Complex64], psi: &[Complex64]) -> Result<Complex64> {
        SesquiForm::new(self.sum_over(set)?).evaluate(phi, psi)
    }

    /// Total variation of the complex measure at entry `(m, n)`:
    /// `Σ_j |E_mn(atom_j)|`.
    pub fn entry_total_variation(&self, m: usize, n: usize) -> Result<f64> {
        if m >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: m,
                dim: self.dim,
            });
        }
        if n >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: n,
                dim: self.dim,
            });
        }
        Ok(self
            .atoms
            .iter()
            .map(|(_, form)| form.matrix().get(m, n).norm())
            .sum())
    }

    /// Largest entry modulus over all atoms; the scale used in relative checks.
    pub fn max_entry_magnitude(&self) -> f64 {
        self.atoms
            .iter()
            .map(|(_, form)| form.matrix().entrywise_max())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol_abs: f64) -> bool {
        self.atoms.iter().all(|(_, f)| f.is_hermitian(tol_abs))
    }

    /// Atomwise sum; labels and dimensions must match exactly.
    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let atoms = self
            .atoms
            .iter()
            .zip(&rhs.atoms)
            .map(|((label, a), (_, b))| {
                (label.clone(), SesquiForm::new(a.matrix().add(b.matrix())))
            })
            .collect();
        Self::new(self.dim, atoms)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|(label, form)| (label.clone(), SesquiForm::new(form.matrix().scaled(factor))))
            .collect();
        Self {
            dim: self.dim,
            atoms,
        }
    }

    /// Atomwise adjoint `E*`.
    pub fn adjoint(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|(label, form)| (label.clone(), form.adjoint()))
            .collect();
        Self {
            dim: self.dim,
            atoms,
        }
    }

    pub fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        if self.atoms.len() != rhs.atoms.len() {
            return Err(Error::ShapeMismatch(format!(
                "atom counts differ: {} vs {}",
                self.atoms.len(),
                rhs.atoms.len()
            )));
        }
        for ((a, _), (b, _)) in self.atoms.iter().zip(&rhs.atoms) {
            if a != b {
                return Err(Error::LabelMismatch {
                    expected: a.clone(),
                    got: b.clone(),
                });
            }
        }
        Ok(())
    }

    /// Largest deviation from conjugate symmetry over all atoms.
    pub fn max_hermitian_deviation(&self) -> f64 {
        self.atoms
            .iter()
            .map(|(_, f)| f.matrix().hermitian_deviation())
            .fold(0.0, f64::max)
    }
}

/// Strictly positive diagonal weights defining the scaling operator and the
/// weighted-space pair it induces.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalScaling {
    weights: Vec<f64>,
}

impl DiagonalScaling {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        Ok(Self { weights })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            weights: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Dφ`: componentwise multiplication by the weights.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(&self.weights).map(|(z, &w)| z * w).collect()
    }

    /// `D⁻¹φ`.
    pub fn apply_inverse(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(&self.weights).map(|(z, &w)| z / w).collect()
    }

    /// Basis vector scaled by its weight, `D e_m`.
    pub fn scaled_basis_vector(&self, m: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.weights.len()];
        v[m] = Complex64::new(self.weights[m], 0.0);
        v
    }
}

/// Rule generating the summable positive sequence behind the scaling weights.
#[derive(Clone, Debug)]
pub enum AlphaSequence {
    /// `α_m = base^(m+1)` for `0 < base < 1`.
    Geometric { base: f64 },
    /// Explicit positive terms, one per basis index.
    Explicit(Vec<f64>),
}

impl Default for AlphaSequence {
    fn default() -> Self {
        AlphaSequence::Geometric { base: 0.5 }
    }
}

impl AlphaSequence {
    pub fn term(&self, m: usize) -> Result<f64> {
        match self {
            AlphaSequence::Geometric { base } => {
                if !(base.is_finite() && *base > 0.0 && *base < 1.0) {
                    return Err(Error::InvalidValue(format!(
                        "geometric alpha base must lie in (0, 1), got {base}"
                    )));
                }
                Ok(base.powi(m as i32 + 1))
            }
            AlphaSequence::Explicit(terms) => {
                let value = *terms.get(m).ok_or(Error::IndexOutOfRange {
                    index: m,
                    dim: terms.len(),
                })?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::InvalidWeight { index: m, value });
                }
                Ok(value)
            }
        }
    }
}

/// Scaling weights from the total-variation recipe
/// `d_m = α_m / max{1, √(|E_kl|(Ω)) : k, l ≤ m}`, together with the variation
/// bound `δ = Σ d_m d_n |E_mn|(Ω)`.
pub fn scaling_weights(e: &AtomicSfm, alpha: &AlphaSequence) -> Result<(DiagonalScaling, f64)> {
    let n = e.dim();
    let mut tv = vec![vec![0.0; n]; n];
    for m in 0..n {
        for l in 0..n {
            tv[m][l] = e.entry_total_variation(m, l)?;
        }
    }
    let mut weights = Vec::with_capacity(n);
    let mut clamp: f64 = 1.0;
    for m in 0..n {
        for k in 0..=m {
            clamp = clamp.max(tv[m][k].sqrt()).max(tv[k][m].sqrt());
        }
        weights.push(alpha.term(m)? / clamp);
    }
    let scaling = DiagonalScaling::new(weights)?;
    let delta = variation_bound_from(&tv, &scaling);
    Ok((scaling, delta))
}

/// `δ = Σ d_m d_n |E_mn|(Ω)` for an arbitrary scaling.
pub fn variation_bound(e: &AtomicSfm, scaling: &DiagonalScaling) -> Result<f64> {
    if scaling.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            got: scaling.dim(),
        });
    }
    let n = e.dim();
    let mut tv = vec![vec![0.0; n]; n];
    for m in 0..n {
        for l in 0..n {
            tv[m][l] = e.entry_total_variation(m, l)?;
        }
    }
    Ok(variation_bound_from(&tv, scaling))
}

fn variation_bound_from(tv: &[Vec<f64>], scaling: &DiagonalScaling) -> f64 {
    let mut delta = 0.0;
    for (m, row) in tv.iter().enumerate() {
        for (n, &v) in row.iter().enumerate() {
            delta += scaling.weight(m) * scaling.weight(n) * v;
        }
    }
    delta
}

/// Trace-class measure: the compressed atoms `F_j` together with the base
/// measure `μ_j = ‖F_j‖₁` (total variation at each atom).
#[derive(Clone, Debug)]
pub struct TraceMeasure {
    pub dim: usize,
    pub atoms: Vec<(String, ComplexMatrix)>,
    pub mu: Vec<f64>,
}

impl TraceMeasure {
    /// `F(X)` for a label set.
    pub fn sum_over(&self, indices: &[usize]) -> ComplexMatrix {
        let mut total = ComplexMatrix::zeros(self.dim);
        for &j in indices {
            total = total.add(&self.atoms[j].1);
        }
        total
    }

    /// `|F|(Ω) = Σ_j μ_j`.
    pub fn mu_total(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// Compression `F_j = D E_j D` entrywise: `(F_j)_mn = d_m d_n E_mn(atom_j)`,
/// with `μ_j = ‖F_j‖₁`.
pub fn compress(e: &AtomicSfm, scaling: &DiagonalScaling) -> Result<TraceMeasure> {
    if scaling.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            got: scaling.dim(),
        });
    }
    let n = e.dim();
    let mut atoms = Vec::with_capacity(e.len());
    let mut mu = Vec::with_capacity(e.len());
    for (label, form) in e.atoms() {
        let mut f = ComplexMatrix::zeros(n);
        for m in 0..n {
            for l in 0..n {
                f.set(
                    m,
                    l,
                    form.matrix().get(m, l) * (scaling.weight(m) * scaling.weight(l)),
                );
            }
        }
        mu.push(f.trace_norm(false));
        atoms.push((label.clone(), f));
    }
    Ok(TraceMeasure {
        dim: n,
        atoms,
        mu,
    })
}

/// Densities of the trace-class measure with respect to its total variation.
#[derive(Clone, Debug)]
pub struct DensityFamily {
    pub dim: usize,
    pub atoms: Vec<(String, ComplexMatrix)>,
}

/// Per-atom density `T_j = F_j / μ_j` (zero where `μ_j = 0`); unit trace norm
/// wherever the base measure is positive.
pub fn density(f: &TraceMeasure) -> DensityFamily {
    let atoms = f
        .atoms
        .iter()
        .zip(&f.mu)
        .map(|((label, m), &w)| {
            let t = if w > 0.0 {
                m.map(|z| z / w)
            } else {
                ComplexMatrix::zeros(f.dim)
            };
            (label.clone(), t)
        })
        .collect();
    DensityFamily {
        dim: f.dim,
        atoms,
    }
}

/// Density in the original coordinates, `(C_j)_mn = (T_j)_mn / (d_m d_n)`;
/// satisfies `E_X(φ, ψ) = Σ_{j∈X} μ_j C_j(φ, ψ)`.
pub fn form_density(t: &DensityFamily, scaling: &DiagonalScaling, atom: usize) -> Result<SesquiForm> {
    if scaling.dim() != t.dim {
        return Err(Error::DimensionMismatch {
            expected: t.dim,
            got: scaling.dim(),
        });
    }
    if atom >= t.atoms.len() {
        return Err(Error::IndexOutOfRange {
            index: atom,
            dim: t.atoms.len(),
        });
    }
    let n = t.dim;
    let source = &t.atoms[atom].1;
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(
                i,
                j,
                source.get(i, j) / (scaling.weight(i) * scaling.weight(j)),
            );
        }
    }
    Ok(SesquiForm::new(m))
}

/// The compressed atom viewed as an operator on the weighted space:
/// `Ẽ_j = D F_j D⁻¹`, similar to `F_j` and therefore isospectral.
pub fn weighted_extension(
    f: &TraceMeasure,
    scaling: &DiagonalScaling,
    atom: usize,
) -> Result<ComplexMatrix> {
    if scaling.dim() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: scaling.dim(),
        });
    }
    if atom >= f.atoms.len() {
        return Err(Error::IndexOutOfRange {
            index: atom,
            dim: f.atoms.len(),
        });
    }
    let n = f.dim;
    let source = &f.atoms[atom].1;
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, source.get(i, j) * (scaling.weight(i) / scaling.weight(j)));
        }
    }
    Ok(m)
}
