use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sfmkit_core::decomposition::{decompose_detailed, verify_decomposition};
use sfmkit_core::dilation::{build_dilation, equivalent, verify_dilation};
use sfmkit_core::doc::{
    parse_json, probabilities_csv, to_json_string, DecompositionDocument, DilationDocument,
    EquivalenceDocument, MeasureDocument,
};
use sfmkit_core::linalg::{deflate_diagonalize, ComplexMatrix};
use sfmkit_core::phase::{
    arc_label, coherent_vector, negativity_grid_scan, phase_sfm, probabilities, ArcPartition,
    CoefficientMatrix,
};
use sfmkit_core::sfm::{scaling_weights, AlphaSequence, AtomicSfm};
use sfmkit_core::{Error, DEFAULT_RANK_CUTOFF, DEFAULT_TOL};

/// Failure with its process exit code: 1 semantic, 2 input, 3 numerical.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub type CmdResult = Result<(), Failure>;

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn semantic_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn numerical_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

fn as_input_error(err: Error) -> Failure {
    input_error(err.to_string())
}

fn as_numerical_error(err: Error) -> Failure {
    numerical_error(err.to_string())
}

/// Flag beats the SFMKIT_TOL environment variable beats the default.
fn resolve_tol(flag: Option<f64>) -> Result<f64, Failure> {
    if let Some(t) = flag {
        if !(t.is_finite() && t > 0.0) {
            return Err(input_error(format!("invalid tolerance {t}")));
        }
        return Ok(t);
    }
    match std::env::var("SFMKIT_TOL") {
        Ok(raw) => {
            let t: f64 = raw
                .parse()
                .map_err(|_| input_error(format!("invalid SFMKIT_TOL value `{raw}`")))?;
            if !(t.is_finite() && t > 0.0) {
                return Err(input_error(format!("invalid SFMKIT_TOL value `{raw}`")));
            }
            Ok(t)
        }
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn read_file(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read `{path}`: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| input_error(format!("cannot create `{}`: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| input_error(format!("cannot write `{}`: {e}", path.display())))
}

fn load_measure(path: &str) -> Result<AtomicSfm, Failure> {
    let doc: MeasureDocument = parse_json(&read_file(path)?).map_err(as_input_error)?;
    doc.to_sfm().map_err(as_input_error)
}

fn load_dilation(path: &str) -> Result<sfmkit_core::dilation::Dilation, Failure> {
    let doc: DilationDocument = parse_json(&read_file(path)?).map_err(as_input_error)?;
    doc.to_dilation().map_err(as_input_error)
}

fn alpha_sequence(alpha: f64) -> Result<AlphaSequence, Failure> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(input_error(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    Ok(AlphaSequence::Geometric { base: alpha })
}

fn print_pipeline_summary(e: &AtomicSfm, scaling: &sfmkit_core::sfm::DiagonalScaling, delta: f64) {
    println!("dim {}, atoms {}", e.dim(), e.len());
    println!("variation bound delta = {delta:.6e}");
    let weights: Vec<String> = scaling.weights().iter().map(|w| format!("{w:.6e}")).collect();
    println!("scaling weights: [{}]", weights.join(", "));
}

pub fn decompose(input: &str, output: &str, tol: Option<f64>, alpha: f64) -> CmdResult {
    let tol = resolve_tol(tol)?;
    let e = load_measure(input)?;
    let alpha = alpha_sequence(alpha)?;
    let (scaling, delta) = scaling_weights(&e, &alpha).map_err(as_input_error)?;
    let detail =
        decompose_detailed(&e, &scaling, DEFAULT_RANK_CUTOFF).map_err(as_numerical_error)?;
    let dec = detail.decomposition;

    print_pipeline_summary(&e, &scaling, delta);
    println!("mu: {:?}", dec.provenance().mu);
    for (k, part) in dec.parts().iter().enumerate() {
        for (label, form) in part.atoms() {
            let eig = deflate_diagonalize(&form.matrix().symmetrized(), DEFAULT_RANK_CUTOFF)
                .map_err(as_numerical_error)?;
            let values: Vec<String> = eig.values.iter().map(|v| format!("{v:.6e}")).collect();
            println!("part {k} atom {label}: eigenvalues [{}]", values.join(", "));
        }
    }

    let report = verify_decomposition(&e, &dec, tol).map_err(as_numerical_error)?;
    println!("{report}");
    write_file(
        Path::new(output),
        &to_json_string(&DecompositionDocument::from_decomposition(&dec)),
    )?;
    if !report.passed() {
        return Err(numerical_error(format!(
            "decomposition verification failed: residual {:.3e}, min eigenvalue {:.3e}",
            report.reconstruction_residual,
            report.min_eigenvalue()
        )));
    }
    Ok(())
}

pub fn dilate(input: &str, output: &str, tol: Option<f64>, alpha: f64) -> CmdResult {
    let tol = resolve_tol(tol)?;
    let e = load_measure(input)?;
    let alpha = alpha_sequence(alpha)?;
    let (scaling, delta) = scaling_weights(&e, &alpha).map_err(as_input_error)?;
    let detail =
        decompose_detailed(&e, &scaling, DEFAULT_RANK_CUTOFF).map_err(as_numerical_error)?;
    let dilation =
        build_dilation(&detail.decomposition, &detail.frames).map_err(as_numerical_error)?;

    print_pipeline_summary(&e, &scaling, delta);
    println!("dilation space dimension: {}", dilation.total_dim());
    let report = verify_dilation(&dilation, &e, tol).map_err(as_numerical_error)?;
    println!("{report}");
    write_file(
        Path::new(output),
        &to_json_string(&DilationDocument::from_dilation(&dilation)),
    )?;
    if !report.passed() {
        return Err(numerical_error(format!(
            "dilation verification failed: residual {:.3e}",
            report.identity_residual
        )));
    }
    Ok(())
}

pub fn verify(dilation_path: &str, measure_path: &str, tol: Option<f64>) -> CmdResult {
    let tol = resolve_tol(tol)?;
    let d = load_dilation(dilation_path)?;
    let e = load_measure(measure_path)?;
    let report = verify_dilation(&d, &e, tol).map_err(as_input_error)?;
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(semantic_error(format!(
            "dilation does not verify: residual {:.3e}, rank {}",
            report.identity_residual,
            if report.rank_ok() { "full" } else { "deficient" }
        )))
    }
}

pub fn equiv(first: &str, second: &str, output: Option<&str>, tol: Option<f64>) -> CmdResult {
    let tol = resolve_tol(tol)?;
    let d1 = load_dilation(first)?;
    let d2 = load_dilation(second)?;
    let result = equivalent(&d1, &d2, tol).map_err(as_input_error)?;
    println!(
        "associated decompositions deviate by {:.3e} (tol {:.3e})",
        result.max_part_deviation,
        tol * result.deviation_scale
    );
    if let Some(residual) = result.max_unitarity_residual {
        println!("intertwiner unitarity residual: {residual:.3e}");
    }
    println!(
        "verdict: {}",
        if result.equivalent {
            "equivalent"
        } else {
            "not equivalent"
        }
    );
    if let Some(path) = output {
        write_file(
            Path::new(path),
            &to_json_string(&EquivalenceDocument::from_result(&result)),
        )?;
    }
    if result.equivalent {
        Ok(())
    } else {
        Err(semantic_error("dilations are not unitarily equivalent"))
    }
}

pub struct PhaseDemoArgs {
    pub dim: usize,
    pub arcs: usize,
    pub preset: String,
    pub c_file: Option<String>,
    pub z_values: Vec<String>,
    pub output_dir: String,
    pub seed: u64,
    pub probes: usize,
    pub tol: Option<f64>,
}

fn coefficient_matrix(args: &PhaseDemoArgs) -> Result<CoefficientMatrix, Failure> {
    if let Some(path) = &args.c_file {
        let entries: Vec<Vec<[f64; 2]>> =
            parse_json(&read_file(path)?).map_err(as_input_error)?;
        let rows = entries
            .iter()
            .map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect();
        let matrix = ComplexMatrix::from_rows(rows).map_err(as_input_error)?;
        if matrix.dim() != args.dim {
            return Err(input_error(format!(
                "coefficient matrix is {}x{}, expected {}",
                matrix.dim(),
                matrix.dim(),
                args.dim
            )));
        }
        return CoefficientMatrix::new(matrix).map_err(as_input_error);
    }
    match args.preset.as_str() {
        "identity" => Ok(CoefficientMatrix::identity(args.dim)),
        "all-ones" => Ok(CoefficientMatrix::all_ones(args.dim)),
        other => {
            if let Some(ratio) = other.strip_prefix("toeplitz:") {
                let r: f64 = ratio
                    .parse()
                    .map_err(|_| input_error(format!("invalid toeplitz ratio `{ratio}`")))?;
                CoefficientMatrix::toeplitz(args.dim, r).map_err(as_input_error)
            } else {
                Err(input_error(format!(
                    "unknown preset `{other}` (expected identity, all-ones, or toeplitz:<r>)"
                )))
            }
        }
    }
}

/// Parses complex literals of the forms `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
fn parse_complex(raw: &str) -> Result<Complex64, Failure> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(input_error("empty amplitude"));
    }
    let bad = || input_error(format!("cannot parse complex amplitude `{raw}`"));
    if !s.ends_with('i') {
        return s.parse().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    }
    let body = &s[..s.len() - 1];
    // locate the sign separating the real part from the imaginary part,
    // skipping a leading sign and exponent signs
    let mut split = None;
    for (idx, ch) in body.char_indices().skip(1) {
        if (ch == '+' || ch == '-') && !matches!(&body[idx - 1..idx], "e" | "E") {
            split = Some(idx);
        }
    }
    let (re_part, im_part) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("0", body),
    };
    let re: f64 = re_part.parse().map_err(|_| bad())?;
    let im: f64 = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

pub fn phase_demo(args: PhaseDemoArgs) -> CmdResult {
    let tol = resolve_tol(args.tol)?;
    if args.dim == 0 || args.arcs == 0 {
        return Err(input_error("dim and arcs must both be positive"));
    }
    let cm = coefficient_matrix(&args)?;
    let partition = ArcPartition::uniform(args.arcs).map_err(as_input_error)?;
    let e = phase_sfm(&cm, &partition).map_err(as_numerical_error)?;

    let out_dir = Path::new(&args.output_dir);
    write_file(
        &out_dir.join("measure.json"),
        &to_json_string(&MeasureDocument::from_sfm(&e)),
    )?;
    println!(
        "phase measure: dim {}, {} arcs, written to {}",
        args.dim,
        args.arcs,
        out_dir.join("measure.json").display()
    );

    let block = cm.leading_block_min_eigenvalue(args.dim.min(10));
    match block {
        Ok(min) => println!("leading-block minimum eigenvalue: {min:.6e}"),
        Err(e) => println!("leading-block diagnostic unavailable: {e}"),
    }

    let z_values = if args.z_values.is_empty() {
        vec!["0.5".to_string(), "1".to_string(), "2".to_string()]
    } else {
        args.z_values.clone()
    };
    for (index, raw) in z_values.iter().enumerate() {
        let z = parse_complex(raw)?;
        if z.norm() == 0.0 {
            println!("warning: z = 0 degenerates to the vacuum state");
        }
        let phi = coherent_vector(z, args.dim).map_err(as_input_error)?;
        let report = probabilities(&e, &phi).map_err(as_numerical_error)?;
        let path = out_dir.join(format!("probabilities_z{index}.csv"));
        write_file(&path, &probabilities_csv(&report))?;
        let peak = report
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
            .map(|(j, _)| arc_label(j))
            .unwrap_or_default();
        println!(
            "z = {raw}: mass {:.12}, min value {:.6e}, peak atom {peak}, csv {}",
            report.total.re,
            report.min_real,
            path.display()
        );
    }

    // negativity diagnostics: deterministic grid plus seeded random probes
    let witness = negativity_grid_scan(&e, 64).map_err(as_numerical_error)?;
    let mut min_value = witness.value;
    let mut min_description = format!("{} (grid)", witness.state_description);
    let mut min_atom = witness.atom_label.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for probe in 0..args.probes {
        let state: Vec<Complex64> = (0..args.dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        let state: Vec<Complex64> = state.into_iter().map(|z| z / norm).collect();
        let report = probabilities(&e, &state).map_err(as_numerical_error)?;
        for (label, value) in report.labels.iter().zip(&report.values) {
            if value.re < min_value {
                min_value = value.re;
                min_description = format!("random probe {probe}");
                min_atom = label.clone();
            }
        }
    }
    if min_value < -tol {
        println!(
            "negativity: value {min_value:.6e} at atom {min_atom} with state {min_description}"
        );
        println!("the measure is not positive semidefinite on these probes");
    } else {
        println!("negativity: none found (minimum value {min_value:.6e})");
    }
    Ok(())
}
