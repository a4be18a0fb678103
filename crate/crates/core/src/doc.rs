//! Interchange formats: JSON documents for measures, decompositions,
//! dilations and equivalence verdicts, plus the probability CSV.
//!
//! Floats are written with 17 significant decimal digits, which round-trips
//! every double exactly; parse ∘ serialize is therefore the identity on
//! documents, bit for bit.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::decomposition::{PositiveDecomposition, Provenance};
use crate::dilation::{BlockUnitary, Dilation, EquivalenceResult};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::phase::ProbabilityReport;
use crate::sfm::{AtomicSfm, DiagonalScaling, SesquiForm};

pub const SCHEMA_VERSION: &str = "1";

/// JSON formatter writing every float as `d.dddddddddddddddde±x`
/// (17 significant digits).
struct Float17;

impl serde_json::ser::Formatter for Float17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any document with the 17-digit float format.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Float17);
    value
        .serialize(&mut ser)
        .expect("document serialization cannot fail");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

/// Parses a document, reporting the line and column on malformed input.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn matrix_to_entries(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

fn entries_to_matrix(dim: usize, entries: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    if entries.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: entries.len(),
        });
    }
    let rows = entries
        .iter()
        .map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
        .collect();
    let m = ComplexMatrix::from_rows(rows)?;
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.dim(),
        });
    }
    Ok(m)
}

fn check_schema(version: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion(version.to_string()));
    }
    Ok(())
}

/// One labeled atom with its `[re, im]`-encoded matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureAtom {
    pub label: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// An atomic measure document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDocument {
    pub schema_version: String,
    pub dim: usize,
    pub atoms: Vec<MeasureAtom>,
}

impl MeasureDocument {
    pub fn from_sfm(e: &AtomicSfm) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: e.dim(),
            atoms: e
                .atoms()
                .iter()
                .map(|(label, form)| MeasureAtom {
                    label: label.clone(),
                    matrix: matrix_to_entries(form.matrix()),
                })
                .collect(),
        }
    }

    pub fn to_sfm(&self) -> Result<AtomicSfm> {
        check_schema(&self.schema_version)?;
        let atoms = self
            .atoms
            .iter()
            .map(|atom| {
                Ok((
                    atom.label.clone(),
                    SesquiForm::new(entries_to_matrix(self.dim, &atom.matrix)?),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        AtomicSfm::new(self.dim, atoms)
    }
}

/// One positive part, tagged with its power of `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPart {
    pub power: u8,
    pub atoms: Vec<MeasureAtom>,
}

/// A four-part decomposition document with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDocument {
    pub schema_version: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub mu: Vec<f64>,
    pub parts: Vec<DecompositionPart>,
}

impl DecompositionDocument {
    pub fn from_decomposition(dec: &PositiveDecomposition) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: dec.dim(),
            weights: dec
                .provenance()
                .scaling
                .as_ref()
                .map(|s| s.weights().to_vec()),
            mu: dec.provenance().mu.clone(),
            parts: dec
                .parts()
                .iter()
                .enumerate()
                .map(|(k, part)| DecompositionPart {
                    power: k as u8,
                    atoms: part
                        .atoms()
                        .iter()
                        .map(|(label, form)| MeasureAtom {
                            label: label.clone(),
                            matrix: matrix_to_entries(form.matrix()),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_decomposition(&self) -> Result<PositiveDecomposition> {
        check_schema(&self.schema_version)?;
        if self.parts.len() != 4 {
            return Err(Error::ShapeMismatch(format!(
                "expected 4 parts, got {}",
                self.parts.len()
            )));
        }
        let mut measures = Vec::with_capacity(4);
        for (k, part) in self.parts.iter().enumerate() {
            if part.power as usize != k {
                return Err(Error::ShapeMismatch(format!(
                    "part {k} carries power {}",
                    part.power
                )));
            }
            let atoms = part
                .atoms
                .iter()
                .map(|atom| {
                    Ok((
                        atom.label.clone(),
                        SesquiForm::new(entries_to_matrix(self.dim, &atom.matrix)?),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            measures.push(AtomicSfm::new(self.dim, atoms)?);
        }
        let parts: [AtomicSfm; 4] = measures.try_into().expect("length checked");
        if self.mu.len() != parts[0].len() {
            return Err(Error::ShapeMismatch(format!(
                "{} base weights for {} atoms",
                self.mu.len(),
                parts[0].len()
            )));
        }
        for &w in &self.mu {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidValue(format!("invalid base weight {w}")));
            }
        }
        let scaling = match &self.weights {
            Some(w) => Some(DiagonalScaling::new(w.clone())?),
            None => None,
        };
        if let Some(s) = &scaling {
            if s.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: s.dim(),
                });
            }
        }
        PositiveDecomposition::new(
            parts,
            Provenance {
                scaling,
                mu: self.mu.clone(),
            },
        )
    }
}

/// One block of a dilation atom: part index and embedding rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationBlock {
    pub k: u8,
    pub rows: Vec<Vec<[f64; 2]>>,
}

/// One dilation atom: label, base weight, four blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationAtom {
    pub label: String,
    pub mu: f64,
    pub blocks: Vec<DilationBlock>,
}

/// A dilation document: `{"dim": N, "atoms": [{label, mu, blocks}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationDocument {
    pub dim: usize,
    pub atoms: Vec<DilationAtom>,
}

impl DilationDocument {
    pub fn from_dilation(d: &Dilation) -> Self {
        Self {
            dim: d.dim(),
            atoms: d
                .labels()
                .iter()
                .enumerate()
                .map(|(j, label)| DilationAtom {
                    label: label.clone(),
                    mu: d.mu()[j],
                    blocks: (0..4)
                        .map(|k| DilationBlock {
                            k: k as u8,
                            rows: d
                                .block_rows(j, k)
                                .iter()
                                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_dilation(&self) -> Result<Dilation> {
        let mut labels = Vec::with_capacity(self.atoms.len());
        let mut mu = Vec::with_capacity(self.atoms.len());
        let mut blocks = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            if !(atom.mu.is_finite() && atom.mu >= 0.0) {
                return Err(Error::InvalidValue(format!(
                    "invalid base weight {} at atom `{}`",
                    atom.mu, atom.label
                )));
            }
            let mut parts: [Vec<Vec<Complex64>>; 4] = Default::default();
            let mut seen = [false; 4];
            for block in &atom.blocks {
                let k = block.k as usize;
                if k > 3 || seen[k] {
                    return Err(Error::ShapeMismatch(format!(
                        "atom `{}` has invalid or repeated block index {}",
                        atom.label, block.k
                    )));
                }
                seen[k] = true;
                parts[k] = block
                    .rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|[re, im]| {
                                if re.is_finite() && im.is_finite() {
                                    Ok(Complex64::new(*re, *im))
                                } else {
                                    Err(Error::InvalidValue(format!(
                                        "non-finite entry in atom `{}`",
                                        atom.label
                                    )))
                                }
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            labels.push(atom.label.clone());
            mu.push(atom.mu);
            blocks.push(parts);
        }
        Dilation::from_parts(self.dim, labels, mu, blocks)
    }
}

/// One recovered intertwiner block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryBlock {
    pub label: String,
    pub k: u8,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Verdict document for an equivalence test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceDocument {
    pub equivalent: bool,
    pub max_part_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_unitarity_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<UnitaryBlock>>,
}

impl EquivalenceDocument {
    pub fn from_result(result: &EquivalenceResult) -> Self {
        Self {
            equivalent: result.equivalent,
            max_part_deviation: result.max_part_deviation,
            max_unitarity_residual: result.max_unitarity_residual,
            blocks: result.unitaries.as_ref().map(|blocks| {
                blocks
                    .iter()
                    .map(|BlockUnitary { label, part, matrix }| UnitaryBlock {
                        label: label.clone(),
                        k: *part as u8,
                        matrix: matrix
                            .iter()
                            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                            .collect(),
                    })
                    .collect()
            }),
        }
    }
}

/// CSV with one row per atom: `atom_label,re,im`, floats in the same 17-digit
/// format as the JSON documents.
pub fn probabilities_csv(report: &ProbabilityReport) -> String {
    let mut out = String::from("atom_label,re,im\n");
    for (label, value) in report.labels.iter().zip(&report.values) {
        out.push_str(&format!("{label},{:.16e},{:.16e}\n", value.re, value.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::decompose;
    use crate::dilation::{dilate, equivalent, verify_dilation};
    use crate::phase::{coherent_vector, phase_sfm, probabilities, ArcPartition, CoefficientMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_sfm() -> AtomicSfm {
        let atoms = vec![
            (
                "x".to_string(),
                SesquiForm::new(
                    ComplexMatrix::from_rows(vec![
                        vec![c(0.1, 0.0), c(-0.7, 1.0 / 3.0)],
                        vec![c(0.25, -0.125), c(2.0, 0.0)],
                    ])
                    .unwrap(),
                ),
            ),
            (
                "y".to_string(),
                SesquiForm::new(
                    ComplexMatrix::from_rows(vec![
                        vec![c(-1.0, 0.1), c(0.0, 0.0)],
                        vec![c(0.3, 0.7), c(0.9, -0.2)],
                    ])
                    .unwrap(),
                ),
            ),
        ];
        AtomicSfm::new(2, atoms).unwrap()
    }

    #[test]
    fn measure_document_round_trips_bit_exact() {
        let e = sample_sfm();
        let doc = MeasureDocument::from_sfm(&e);
        let json = to_json_string(&doc);
        let parsed: MeasureDocument = parse_json(&json).unwrap();
        assert_eq!(doc, parsed);
        // serialize again: identical bytes
        assert_eq!(json, to_json_string(&parsed));
        // and the measure itself survives
        let back = parsed.to_sfm().unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn seventeen_digits_cover_awkward_values() {
        let doc = MeasureDocument {
            schema_version: SCHEMA_VERSION.into(),
            dim: 1,
            atoms: vec![MeasureAtom {
                label: "a".into(),
                matrix: vec![vec![[0.1, 1.0 / 3.0]]],
            }],
        };
        let json = to_json_string(&doc);
        let parsed: MeasureDocument = parse_json(&json).unwrap();
        assert_eq!(parsed.atoms[0].matrix[0][0][0].to_bits(), 0.1f64.to_bits());
        assert_eq!(
            parsed.atoms[0].matrix[0][0][1].to_bits(),
            (1.0f64 / 3.0).to_bits()
        );
    }

    #[test]
    fn parse_error_carries_location() {
        let err = parse_json::<MeasureDocument>("{\n  \"schema_version\": }").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn schema_version_is_checked() {
        let doc = MeasureDocument {
            schema_version: "0".into(),
            dim: 1,
            atoms: vec![MeasureAtom {
                label: "a".into(),
                matrix: vec![vec![[0.0, 0.0]]],
            }],
        };
        assert!(matches!(doc.to_sfm(), Err(Error::SchemaVersion(_))));
    }

    #[test]
    fn non_finite_entries_rejected() {
        let doc = MeasureDocument {
            schema_version: SCHEMA_VERSION.into(),
            dim: 1,
            atoms: vec![MeasureAtom {
                label: "a".into(),
                matrix: vec![vec![[f64::INFINITY, 0.0]]],
            }],
        };
        assert!(matches!(doc.to_sfm(), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn ragged_matrix_rejected() {
        let doc = MeasureDocument {
            schema_version: SCHEMA_VERSION.into(),
            dim: 2,
            atoms: vec![MeasureAtom {
                label: "a".into(),
                matrix: vec![vec![[0.0, 0.0]]],
            }],
        };
        assert!(doc.to_sfm().is_err());
    }

    #[test]
    fn decomposition_document_round_trips() {
        let e = sample_sfm();
        let dec = decompose(&e).unwrap();
        let doc = DecompositionDocument::from_decomposition(&dec);
        let json = to_json_string(&doc);
        let parsed: DecompositionDocument = parse_json(&json).unwrap();
        assert_eq!(doc, parsed);
        let back = parsed.to_decomposition().unwrap();
        assert!(dec.max_deviation(&back).unwrap() == 0.0);
        assert_eq!(
            dec.provenance().scaling.as_ref().unwrap().weights(),
            back.provenance().scaling.as_ref().unwrap().weights()
        );
    }

    #[test]
    fn dilation_document_round_trips_and_still_verifies() {
        let e = sample_sfm();
        let (_, d) = dilate(&e).unwrap();
        let doc = DilationDocument::from_dilation(&d);
        let json = to_json_string(&doc);
        let parsed: DilationDocument = parse_json(&json).unwrap();
        assert_eq!(doc, parsed);
        let back = parsed.to_dilation().unwrap();
        assert!(verify_dilation(&back, &e, 1e-9).unwrap().passed());
        let eq = equivalent(&d, &back, 1e-9).unwrap();
        assert!(eq.equivalent);
    }

    #[test]
    fn equivalence_document_shape() {
        let e = sample_sfm();
        let (_, d) = dilate(&e).unwrap();
        let result = equivalent(&d, &d, 1e-9).unwrap();
        let doc = EquivalenceDocument::from_result(&result);
        assert!(doc.equivalent);
        let json = to_json_string(&doc);
        let parsed: EquivalenceDocument = parse_json(&json).unwrap();
        assert_eq!(doc, parsed);
    }

    #[test]
    fn csv_layout() {
        let part = ArcPartition::uniform(3).unwrap();
        let e = phase_sfm(&CoefficientMatrix::identity(2), &part).unwrap();
        let phi = coherent_vector(c(1.0, 0.0), 2).unwrap();
        let report = probabilities(&e, &phi).unwrap();
        let csv = probabilities_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "atom_label,re,im");
        assert!(lines[1].starts_with("arc0,3.33333333333333"));
    }
}
