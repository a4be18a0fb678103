//! Four-part positive decomposition `E = Σ iᵏ E⁽ᵏ⁾`.
//!
//! The symmetric parts of the compressed density are diagonalized per atom;
//! sign-separated frame vectors, pulled back through the inverse scaling and
//! weighted by the base measure, rebuild each part as a sum of rank-one
//! positive forms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{deflate_diagonalize, signed_frame, ComplexMatrix};
use crate::sfm::{
    compress, density, scaling_weights, AlphaSequence, AtomicSfm, DensityFamily, DiagonalScaling,
    SesquiForm,
};
use crate::{DEFAULT_RANK_CUTOFF, DEFAULT_TOL};

/// Sign-separated rank-one expansion vectors for one atom, living in the
/// inverse-scaled coordinates. The base-measure weight is folded in, so plain
/// sums of outer products replace integrals.
#[derive(Clone, Debug)]
pub struct FrameAtom {
    pub label: String,
    pub positive: Vec<Vec<Complex64>>,
    pub negative: Vec<Vec<Complex64>>,
}

impl FrameAtom {
    /// `Σ sgn |v⟩⟨v|` over both lists.
    pub fn reconstruct(&self, dim: usize) -> ComplexMatrix {
        ComplexMatrix::gram_from_vectors(dim, &self.positive)
            .sub(&ComplexMatrix::gram_from_vectors(dim, &self.negative))
    }
}

/// Per-atom expansion vectors for a whole measure.
#[derive(Clone, Debug)]
pub struct FrameFamily {
    pub dim: usize,
    pub atoms: Vec<FrameAtom>,
}

impl FrameFamily {
    fn empty(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
        }
    }
}

/// Expansion vectors of a family of Hermitian densities: each density is
/// diagonalized by deflation, the signed frame is scaled by `√μ_j`, and every
/// component is divided by its scaling weight.
pub fn frame_vectors(
    densities: &DensityFamily,
    mu: &[f64],
    scaling: &DiagonalScaling,
    rank_cutoff: f64,
) -> Result<FrameFamily> {
    if scaling.dim() != densities.dim {
        return Err(Error::DimensionMismatch {
            expected: densities.dim,
            got: scaling.dim(),
        });
    }
    if mu.len() != densities.atoms.len() {
        return Err(Error::ShapeMismatch(format!(
            "base measure has {} weights for {} atoms",
            mu.len(),
            densities.atoms.len()
        )));
    }
    let mut family = FrameFamily::empty(densities.dim);
    for ((label, t), &weight) in densities.atoms.iter().zip(mu) {
        if weight == 0.0 {
            family.atoms.push(FrameAtom {
                label: label.clone(),
                positive: Vec::new(),
                negative: Vec::new(),
            });
            continue;
        }
        let eig = deflate_diagonalize(t, rank_cutoff)?;
        let frame = signed_frame(&eig, rank_cutoff);
        let root = weight.sqrt();
        let pull = |vectors: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            vectors
                .iter()
                .map(|g| {
                    g.iter()
                        .enumerate()
                        .map(|(m, z)| z * root / scaling.weight(m))
                        .collect()
                })
                .collect()
        };
        family.atoms.push(FrameAtom {
            label: label.clone(),
            positive: pull(&frame.positive),
            negative: pull(&frame.negative),
        });
    }
    Ok(family)
}

/// Scaling and base measure a decomposition was produced with. The scaling is
/// absent when the decomposition was read off a dilation.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub scaling: Option<DiagonalScaling>,
    pub mu: Vec<f64>,
}

/// The four positive parts `E⁽⁰⁾…E⁽³⁾` with `E = Σ iᵏ E⁽ᵏ⁾`.
#[derive(Clone, Debug)]
pub struct PositiveDecomposition {
    parts: [AtomicSfm; 4],
    provenance: Provenance,
}

impl PositiveDecomposition {
    pub fn new(parts: [AtomicSfm; 4], provenance: Provenance) -> Result<Self> {
        for rest in &parts[1..] {
            parts[0].check_same_shape(rest)?;
        }
        Ok(Self { parts, provenance })
    }

    pub fn parts(&self) -> &[AtomicSfm; 4] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> &AtomicSfm {
        &self.parts[k]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts[0].labels()
    }

    /// `Σ iᵏ E⁽ᵏ⁾`.
    pub fn reconstruct(&self) -> AtomicSfm {
        let i = Complex64::new(0.0, 1.0);
        let mut total = self.parts[0].clone();
        let mut coeff = Complex64::new(1.0, 0.0);
        for part in &self.parts[1..] {
            coeff *= i;
            total = total
                .try_add(&part.scaled(coeff))
                .expect("parts share shape");
        }
        total
    }

    /// Largest entrywise deviation from another decomposition, over all parts
    /// and atoms.
    pub fn max_deviation(&self, rhs: &Self) -> Result<f64> {
        let mut dev: f64 = 0.0;
        for k in 0..4 {
            self.parts[k].check_same_shape(&rhs.parts[k])?;
            for (j, (_, form)) in self.parts[k].atoms().iter().enumerate() {
                dev = dev.max(form.matrix().max_abs_deviation(rhs.parts[k].form(j).matrix()));
            }
        }
        Ok(dev)
    }
}

fn gram_measure(dim: usize, family: &FrameFamily, negative: bool) -> Result<AtomicSfm> {
    let atoms = family
        .atoms
        .iter()
        .map(|atom| {
            let vectors = if negative {
                &atom.negative
            } else {
                &atom.positive
            };
            (
                atom.label.clone(),
                SesquiForm::new(ComplexMatrix::gram_from_vectors(dim, vectors)),
            )
        })
        .collect();
    AtomicSfm::new(dim, atoms)
}

fn positive_only(family: &FrameFamily, negative: bool) -> FrameFamily {
    FrameFamily {
        dim: family.dim,
        atoms: family
            .atoms
            .iter()
            .map(|atom| FrameAtom {
                label: atom.label.clone(),
                positive: if negative {
                    atom.negative.clone()
                } else {
                    atom.positive.clone()
                },
                negative: Vec::new(),
            })
            .collect(),
    }
}

fn hermitian_density_parts(densities: &DensityFamily) -> (DensityFamily, DensityFamily) {
    let mut re_atoms = Vec::with_capacity(densities.atoms.len());
    let mut im_atoms = Vec::with_capacity(densities.atoms.len());
    for (label, t) in &densities.atoms {
        let (a, b) = SesquiForm::new(t.clone()).symmetric_split();
        re_atoms.push((label.clone(), a.into_matrix()));
        im_atoms.push((label.clone(), b.into_matrix()));
    }
    (
        DensityFamily {
            dim: densities.dim,
            atoms: re_atoms,
        },
        DensityFamily {
            dim: densities.dim,
            atoms: im_atoms,
        },
    )
}

/// A decomposition together with the expansion vectors that realize each part.
#[derive(Clone, Debug)]
pub struct DetailedDecomposition {
    pub decomposition: PositiveDecomposition,
    /// Per part, positive-list-only frame families; part `k`'s atom forms are
    /// exactly the Gram matrices of `frames[k]`.
    pub frames: [FrameFamily; 4],
}

/// Full pipeline with explicit scaling: compress, split the densities into
/// Hermitian parts, diagonalize, and collect the four positive parts. One
/// scaling and one base measure serve all parts.
pub fn decompose_detailed(
    e: &AtomicSfm,
    scaling: &DiagonalScaling,
    rank_cutoff: f64,
) -> Result<DetailedDecomposition> {
    let trace_measure = compress(e, scaling)?;
    let densities = density(&trace_measure);
    let (dens_re, dens_im) = hermitian_density_parts(&densities);
    let fam_re = frame_vectors(&dens_re, &trace_measure.mu, scaling, rank_cutoff)?;
    let fam_im = frame_vectors(&dens_im, &trace_measure.mu, scaling, rank_cutoff)?;

    let dim = e.dim();
    let parts = [
        gram_measure(dim, &fam_re, false)?,
        gram_measure(dim, &fam_im, false)?,
        gram_measure(dim, &fam_re, true)?,
        gram_measure(dim, &fam_im, true)?,
    ];
    let frames = [
        positive_only(&fam_re, false),
        positive_only(&fam_im, false),
        positive_only(&fam_re, true),
        positive_only(&fam_im, true),
    ];
    Ok(DetailedDecomposition {
        decomposition: PositiveDecomposition::new(
            parts,
            Provenance {
                scaling: Some(scaling.clone()),
                mu: trace_measure.mu,
            },
        )?,
        frames,
    })
}

/// [`decompose_detailed`] keeping only the decomposition.
pub fn decompose_with(
    e: &AtomicSfm,
    scaling: &DiagonalScaling,
    rank_cutoff: f64,
) -> Result<PositiveDecomposition> {
    decompose_detailed(e, scaling, rank_cutoff).map(|d| d.decomposition)
}

/// Four-part decomposition with the default scaling recipe and rank cutoff.
pub fn decompose(e: &AtomicSfm) -> Result<PositiveDecomposition> {
    let (scaling, _) = scaling_weights(e, &AlphaSequence::default())?;
    decompose_with(e, &scaling, DEFAULT_RANK_CUTOFF)
}

fn require_symmetric(e: &AtomicSfm) -> Result<()> {
    let deviation = e.max_hermitian_deviation();
    let scale = e.max_entry_magnitude().max(1.0);
    if deviation > DEFAULT_TOL * scale {
        return Err(Error::NotHermitian {
            deviation,
            threshold: DEFAULT_TOL * scale,
        });
    }
    Ok(())
}

/// Splits a symmetric measure into positive measures with `E = E⁺ − E⁻`,
/// using an explicit scaling.
pub fn split_symmetric_sfm_with(
    e: &AtomicSfm,
    scaling: &DiagonalScaling,
    rank_cutoff: f64,
) -> Result<(AtomicSfm, AtomicSfm)> {
    require_symmetric(e)?;
    let trace_measure = compress(e, scaling)?;
    let densities = density(&trace_measure);
    let family = frame_vectors(&densities, &trace_measure.mu, scaling, rank_cutoff)?;
    Ok((
        gram_measure(e.dim(), &family, false)?,
        gram_measure(e.dim(), &family, true)?,
    ))
}

/// [`split_symmetric_sfm_with`] under the default scaling recipe.
pub fn split_symmetric_sfm(e: &AtomicSfm) -> Result<(AtomicSfm, AtomicSfm)> {
    let (scaling, _) = scaling_weights(e, &AlphaSequence::default())?;
    split_symmetric_sfm_with(e, &scaling, DEFAULT_RANK_CUTOFF)
}

/// Positivity check of one part atom: Hermitian deviation and minimum
/// eigenvalue, with the scale its threshold is relative to.
#[derive(Clone, Debug)]
pub struct PartAtomCheck {
    pub part: usize,
    pub label: String,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub scale: f64,
}

/// Verification summary for a decomposition against its source measure.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub checks: Vec<PartAtomCheck>,
    /// Largest entrywise deviation `|E_mn(atom) − Σ iᵏ E⁽ᵏ⁾_mn(atom)|`.
    pub reconstruction_residual: f64,
    /// `1 + max |E_mn|`, the scale the residual is measured against.
    pub reconstruction_scale: f64,
    /// `min over basis vectors of Σ_k E⁽ᵏ⁾_Ω(e_i, e_i)`; positive iff the
    /// dilation embedding is injective on the basis.
    pub injectivity_indicator: f64,
    pub tol: f64,
}

impl DecompositionReport {
    pub fn min_eigenvalue(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| {
            c.hermitian_deviation <= self.tol * c.scale && c.min_eigenvalue >= -self.tol * c.scale
        }) && self.reconstruction_residual <= self.tol * self.reconstruction_scale
    }
}

impl std::fmt::Display for DecompositionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "reconstruction residual: {:.3e} (tol {:.3e})",
            self.reconstruction_residual,
            self.tol * self.reconstruction_scale
        )?;
        writeln!(f, "minimum part eigenvalue: {:.3e}", self.min_eigenvalue())?;
        writeln!(
            f,
            "injectivity indicator:   {:.3e}",
            self.injectivity_indicator
        )?;
        write!(f, "verdict: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

/// Checks positivity of every part atom, the four-part reconstruction, and
/// the injectivity indicator.
pub fn verify_decomposition(
    e: &AtomicSfm,
    dec: &PositiveDecomposition,
    tol: f64,
) -> Result<DecompositionReport> {
    e.check_same_shape(dec.part(0))?;
    let mut checks = Vec::with_capacity(4 * e.len());
    for (k, part) in dec.parts().iter().enumerate() {
        for (label, form) in part.atoms() {
            let matrix = form.matrix();
            let eig = deflate_diagonalize(&matrix.symmetrized(), DEFAULT_RANK_CUTOFF)?;
            let min_eigenvalue = eig.values.iter().copied().fold(0.0, f64::min);
            checks.push(PartAtomCheck {
                part: k,
                label: label.clone(),
                hermitian_deviation: matrix.hermitian_deviation(),
                min_eigenvalue,
                scale: matrix.trace_norm(false).max(1.0),
            });
        }
    }

    let rebuilt = dec.reconstruct();
    let mut residual: f64 = 0.0;
    for (j, (_, form)) in e.atoms().iter().enumerate() {
        residual = residual.max(form.matrix().max_abs_deviation(rebuilt.form(j).matrix()));
    }

    let mut indicator = f64::INFINITY;
    for i in 0..e.dim() {
        let mut sum = 0.0;
        for part in dec.parts() {
            sum += part.total().get(i, i).re;
        }
        indicator = indicator.min(sum);
    }

    Ok(DecompositionReport {
        checks,
        reconstruction_residual: residual,
        reconstruction_scale: 1.0 + e.max_entry_magnitude(),
        injectivity_indicator: indicator,
        tol,
    })
}

/// Expansion vectors realizing an arbitrary positive decomposition: each part
/// atom form is diagonalized directly and the scaled eigenvectors `√λ·φ`
/// become the frame. The vectors are mutually orthogonal, so every block of a
/// dilation built on them has full row rank.
///
/// Errors if some part atom fails positivity beyond the default tolerance.
pub fn frames_for_decomposition(
    dec: &PositiveDecomposition,
    rank_cutoff: f64,
) -> Result<[FrameFamily; 4]> {
    let dim = dec.dim();
    let mut families = Vec::with_capacity(4);
    for part in dec.parts() {
        let mut atoms = Vec::with_capacity(part.len());
        for (label, form) in part.atoms() {
            let matrix = form.matrix();
            let scale = matrix.trace_norm(false).max(1.0);
            if matrix.hermitian_deviation() > DEFAULT_TOL * scale {
                return Err(Error::NotHermitian {
                    deviation: matrix.hermitian_deviation(),
                    threshold: DEFAULT_TOL * scale,
                });
            }
            let eig = deflate_diagonalize(&matrix.symmetrized(), rank_cutoff)?;
            let min = eig.values.iter().copied().fold(0.0, f64::min);
            if min < -DEFAULT_TOL * scale {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            // round-off negatives inside the tolerance band are dropped
            let positive = eig
                .values
                .iter()
                .zip(&eig.vectors)
                .filter(|(lambda, _)| **lambda > 0.0)
                .map(|(lambda, phi)| {
                    let w = lambda.sqrt();
                    phi.iter().map(|z| z * w).collect()
                })
                .collect();
            atoms.push(FrameAtom {
                label: label.clone(),
                positive,
                negative: Vec::new(),
            });
        }
        families.push(FrameFamily { dim, atoms });
    }
    Ok(families.try_into().expect("exactly four families"))
}

/// The measure spreading the identity uniformly over the given atoms:
/// `(1/M)·I` per atom, so the total is exactly `I`.
pub fn uniform_identity_sfm(dim: usize, labels: &[String]) -> Result<AtomicSfm> {
    if labels.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let share = Complex64::new(1.0 / labels.len() as f64, 0.0);
    let atoms = labels
        .iter()
        .map(|label| {
            (
                label.clone(),
                SesquiForm::new(ComplexMatrix::identity(dim).scaled(share)),
            )
        })
        .collect();
    AtomicSfm::new(dim, atoms)
}

fn validate_semispectral(e0: &AtomicSfm) -> Result<()> {
    for (_, form) in e0.atoms() {
        let matrix = form.matrix();
        let scale = matrix.trace_norm(false).max(1.0);
        if matrix.hermitian_deviation() > DEFAULT_TOL * scale {
            return Err(Error::NotHermitian {
                deviation: matrix.hermitian_deviation(),
                threshold: DEFAULT_TOL * scale,
            });
        }
        let eig = deflate_diagonalize(&matrix.symmetrized(), DEFAULT_RANK_CUTOFF)?;
        let min = eig.values.iter().copied().fold(0.0, f64::min);
        if min < -DEFAULT_TOL * scale {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
    }
    let total = e0.total();
    let dev = total.max_abs_deviation(&ComplexMatrix::identity(e0.dim()));
    if dev > DEFAULT_TOL {
        return Err(Error::NotNormalized(format!(
            "total deviates from the identity by {dev:.3e}"
        )));
    }
    Ok(())
}

/// Makes the decomposition strict: decomposes `E + ε·E₀` and appends `ε·E₀`
/// to the negative real part, so the sum `Σ_k E⁽ᵏ⁾_Ω(φ,φ)` is bounded below
/// by `ε‖φ‖²` while the signed sum still rebuilds `E`.
///
/// `e0` must be a positive measure with total exactly the identity
/// (semispectral); the scaling is taken from `dec`'s provenance when present.
pub fn strictify(
    e: &AtomicSfm,
    dec: &PositiveDecomposition,
    eps: f64,
    e0: &AtomicSfm,
) -> Result<PositiveDecomposition> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidValue(format!(
            "strictification weight must be positive, got {eps}"
        )));
    }
    e.check_same_shape(e0)?;
    validate_semispectral(e0)?;

    let shifted = e.try_add(&e0.scaled(Complex64::new(eps, 0.0)))?;
    let scaling = match &dec.provenance().scaling {
        Some(s) => s.clone(),
        None => scaling_weights(&shifted, &AlphaSequence::default())?.0,
    };
    let inner = decompose_detailed(&shifted, &scaling, DEFAULT_RANK_CUTOFF)?;
    let mut parts = inner.decomposition.parts.clone();
    parts[2] = parts[2].try_add(&e0.scaled(Complex64::new(eps, 0.0)))?;
    PositiveDecomposition::new(parts, inner.decomposition.provenance)
}
