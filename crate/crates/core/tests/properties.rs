//! Property tests over randomized measures and matrices.

use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;
use sfmkit_core::decomposition::{decompose, split_symmetric_sfm, verify_decomposition};
use sfmkit_core::doc::{parse_json, to_json_string, MeasureAtom, MeasureDocument, SCHEMA_VERSION};
use sfmkit_core::linalg::{deflate_diagonalize, signed_frame, ComplexMatrix};
use sfmkit_core::sfm::{
    compress, density, form_density, scaling_weights, AlphaSequence, AtomicSfm, SesquiForm,
};
use sfmkit_core::DEFAULT_RANK_CUTOFF;

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    vec(vec(complex_entry(), dim), dim)
        .prop_map(|rows| ComplexMatrix::from_rows(rows).expect("finite entries"))
}

fn any_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..=6).prop_flat_map(matrix)
}

fn sfm(dim: usize, atoms: usize) -> impl Strategy<Value = AtomicSfm> {
    vec(matrix(dim), atoms).prop_map(move |forms| {
        let atoms = forms
            .into_iter()
            .enumerate()
            .map(|(j, m)| (format!("w{j}"), SesquiForm::new(m)))
            .collect();
        AtomicSfm::new(dim, atoms).expect("valid")
    })
}

fn any_sfm() -> impl Strategy<Value = AtomicSfm> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(dim, atoms)| sfm(dim, atoms))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_below_entrywise_l1(a in any_matrix()) {
        let l1 = a.entrywise_l1();
        prop_assert!(a.trace_norm(false) <= l1 + 1e-9 * l1.max(1.0));
        let h = a.symmetrized();
        prop_assert!(h.trace_norm(true) <= h.entrywise_l1() + 1e-9 * l1.max(1.0));
    }

    #[test]
    fn deflation_reconstructs(a in any_matrix()) {
        let h = a.symmetrized();
        let eig = deflate_diagonalize(&h, DEFAULT_RANK_CUTOFF).unwrap();
        let scale = h.trace_norm(true).max(1.0);
        prop_assert!(eig.reconstruct().max_abs_deviation(&h) <= 1e-9 * scale);
        let total: f64 = eig.values.iter().map(|v| v.abs()).sum();
        prop_assert!((total - h.trace_norm(true)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn signed_frame_weight_identity(a in any_matrix()) {
        let h = a.symmetrized();
        let frame = signed_frame(&deflate_diagonalize(&h, DEFAULT_RANK_CUTOFF).unwrap(), DEFAULT_RANK_CUTOFF);
        let scale = h.trace_norm(true).max(1.0);
        prop_assert!((frame.total_weight() - h.trace_norm(true)).abs() <= 1e-9 * scale);
        prop_assert!(frame.reconstruct().max_abs_deviation(&h) <= 1e-9 * scale);
    }

    #[test]
    fn symmetric_split_rebuilds(a in any_matrix()) {
        let phi = SesquiForm::new(a.clone());
        let (re, im) = phi.symmetric_split();
        prop_assert!(re.is_hermitian(1e-15));
        prop_assert!(im.is_hermitian(1e-15));
        let rebuilt = re.matrix().add(&im.matrix().scaled(Complex64::new(0.0, 1.0)));
        prop_assert!(rebuilt.max_abs_deviation(&a) <= 1e-15);
    }

    #[test]
    fn evaluate_is_additive_over_disjoint_sets(e in any_sfm(), seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let labels = e.labels();
        let (first, second): (Vec<&str>, Vec<&str>) =
            labels.iter().partition(|_| rng.gen_bool(0.5));
        let union: Vec<&str> = first.iter().chain(second.iter()).copied().collect();
        let dim = e.dim();
        let phi: Vec<Complex64> = (0..dim).map(|i| Complex64::new(1.0 / (i + 1) as f64, 0.3)).collect();
        let psi: Vec<Complex64> = (0..dim).map(|i| Complex64::new(-0.2, 1.0 / (i + 2) as f64)).collect();
        let a = e.evaluate(&first, &phi, &psi).unwrap();
        let b = e.evaluate(&second, &phi, &psi).unwrap();
        let u = e.evaluate(&union, &phi, &psi).unwrap();
        prop_assert!((a + b - u).norm() <= 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn pipeline_identity_holds(e in any_sfm()) {
        let (scaling, delta) = scaling_weights(&e, &AlphaSequence::default()).unwrap();
        let f = compress(&e, &scaling).unwrap();
        let t = density(&f);
        // bounded variation
        prop_assert!(f.mu_total() <= delta + 1e-12);
        let dim = e.dim();
        for (j, label) in e.labels().iter().enumerate() {
            // E(atom)(De_m, De_n) = F_mn = mu_j T_mn entrywise
            for m in 0..dim {
                for n in 0..dim {
                    let lhs = e
                        .evaluate(&[label], &scaling.scaled_basis_vector(m), &scaling.scaled_basis_vector(n))
                        .unwrap();
                    let mid = f.atoms[j].1.get(m, n);
                    let rhs = t.atoms[j].1.get(m, n) * f.mu[j];
                    prop_assert!((lhs - mid).norm() <= 1e-9 * (1.0 + mid.norm()));
                    prop_assert!((rhs - mid).norm() <= 1e-9 * (1.0 + mid.norm()));
                }
            }
            // and the original coordinates come back through the form density
            let c = form_density(&t, &scaling, j).unwrap();
            let rebuilt = c.matrix().scaled(Complex64::new(f.mu[j], 0.0));
            prop_assert!(rebuilt.max_abs_deviation(e.form(j).matrix()) <= 1e-9 * (1.0 + e.max_entry_magnitude()));
        }
    }

    #[test]
    fn symmetric_split_of_measures_is_positive(e in any_sfm()) {
        // make it symmetric atomwise, then split
        let sym_atoms: Vec<(String, SesquiForm)> = e
            .atoms()
            .iter()
            .map(|(l, f)| (l.clone(), SesquiForm::new(f.matrix().symmetrized())))
            .collect();
        let sym = AtomicSfm::new(e.dim(), sym_atoms).unwrap();
        let (plus, minus) = split_symmetric_sfm(&sym).unwrap();
        let scale = 1.0 + sym.max_entry_magnitude();
        for j in 0..sym.len() {
            let diff = plus.form(j).matrix().sub(minus.form(j).matrix());
            prop_assert!(diff.max_abs_deviation(sym.form(j).matrix()) <= 1e-9 * scale);
            // positivity via eigenvalues
            for part in [&plus, &minus] {
                let eig = deflate_diagonalize(&part.form(j).matrix().symmetrized(), DEFAULT_RANK_CUTOFF).unwrap();
                let min = eig.values.iter().copied().fold(0.0, f64::min);
                prop_assert!(min >= -1e-9 * scale);
            }
        }
    }

    #[test]
    fn compression_preserves_symmetry_and_positivity(e in any_sfm()) {
        let dim = e.dim();
        // symmetric source: every compressed atom is Hermitian
        let sym_atoms: Vec<(String, SesquiForm)> = e
            .atoms()
            .iter()
            .map(|(l, f)| (l.clone(), SesquiForm::new(f.matrix().symmetrized())))
            .collect();
        let sym = AtomicSfm::new(dim, sym_atoms).unwrap();
        let (scaling, _) = scaling_weights(&sym, &AlphaSequence::default()).unwrap();
        let f = compress(&sym, &scaling).unwrap();
        for (_, atom) in &f.atoms {
            prop_assert!(atom.hermitian_deviation() <= 1e-14);
        }
        // positive source: every compressed atom is positive semidefinite
        let psd_atoms: Vec<(String, SesquiForm)> = e
            .atoms()
            .iter()
            .map(|(l, f)| {
                let m = f.matrix();
                (l.clone(), SesquiForm::new(m.mul(&m.adjoint())))
            })
            .collect();
        let psd = AtomicSfm::new(dim, psd_atoms).unwrap();
        let (scaling, _) = scaling_weights(&psd, &AlphaSequence::default()).unwrap();
        let f = compress(&psd, &scaling).unwrap();
        for (_, atom) in &f.atoms {
            let eig = deflate_diagonalize(&atom.symmetrized(), DEFAULT_RANK_CUTOFF).unwrap();
            let min = eig.values.iter().copied().fold(0.0, f64::min);
            prop_assert!(min >= -1e-9 * atom.trace_norm(true).max(1.0));
        }
    }

    #[test]
    fn four_part_decomposition_verifies(e in any_sfm()) {
        let dec = decompose(&e).unwrap();
        let report = verify_decomposition(&e, &dec, 1e-9).unwrap();
        prop_assert!(report.passed(), "{report}");
    }

    #[test]
    fn measure_documents_round_trip(e in any_sfm()) {
        let doc = MeasureDocument::from_sfm(&e);
        let json = to_json_string(&doc);
        let parsed: MeasureDocument = parse_json(&json).unwrap();
        prop_assert_eq!(&doc, &parsed);
        prop_assert_eq!(json, to_json_string(&parsed));
    }

    #[test]
    fn documents_with_raw_bit_patterns_round_trip(bits in vec((any::<u64>(), any::<u64>()), 1..4)) {
        // arbitrary finite doubles, including subnormals and negative zero
        let entries: Vec<[f64; 2]> = bits
            .into_iter()
            .map(|(a, b)| [f64::from_bits(a), f64::from_bits(b)])
            .filter(|[a, b]| a.is_finite() && b.is_finite())
            .collect();
        prop_assume!(!entries.is_empty());
        let dim = entries.len();
        let matrix: Vec<Vec<[f64; 2]>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { entries[i] } else { [0.0, 0.0] }).collect())
            .collect();
        let doc = MeasureDocument {
            schema_version: SCHEMA_VERSION.into(),
            dim,
            atoms: vec![MeasureAtom { label: "a".into(), matrix }],
        };
        let parsed: MeasureDocument = parse_json(&to_json_string(&doc)).unwrap();
        for (row_a, row_b) in doc.atoms[0].matrix.iter().zip(&parsed.atoms[0].matrix) {
            for ([a0, a1], [b0, b1]) in row_a.iter().zip(row_b) {
                prop_assert_eq!(a0.to_bits(), b0.to_bits());
                prop_assert_eq!(a1.to_bits(), b1.to_bits());
            }
        }
    }
}
