//! End-to-end acceptance suite: one test — and one printed pass line —
//! per shipped guarantee.  Run with `--nocapture` to see the lines.

mod common;

use common::*;
use freeseries::circle::{associated_h_circle, cayley, sample_check_circle};
use freeseries::factorization::{minimal_junitary_factorize_line, SubspaceFamily};
use freeseries::fps::FpsTable;
use freeseries::grnode::GrNode;
use freeseries::inner::{balance, balance_disk, schur_agler_sample, unitary_node_check};
use freeseries::kernels::{
    kernel_formal_derivative, kernel_from_node, kernel_from_series, kernel_gram,
    model_realization, KernelTable,
};
use freeseries::line::{associated_h_line, complete_from_ca_line, sample_check_line};
use freeseries::linalg::{cplx, re, CMat, CVec};
use freeseries::minimal::{reduce_to_minimal, similarity_between};
use freeseries::sampling;
use freeseries::words::{words_up_to, Word};

fn pass(criterion: usize, what: &str) {
    println!("criterion {criterion:02} ({what}): PASS");
}

fn three_routes(node: &GrNode, k: usize, degree: usize) -> (KernelTable, f64) {
    let j = scalar_j();
    let cert = associated_h_line(node, &j, None).expect("certificate");
    let from_node = kernel_from_node(node, &cert.h, k, degree).expect("node route");
    let from_series =
        kernel_from_series(&node.expand(2 * degree + 1), &j, k, degree).expect("series route");
    let formal = kernel_formal_derivative(node, &j, k, degree).expect("formal route");
    let spread = from_node
        .max_distance(&from_series)
        .unwrap()
        .max(from_node.max_distance(&formal).unwrap())
        .max(from_series.max_distance(&formal).unwrap());
    (from_node, spread)
}

#[test]
fn criterion_01_product_kernels_agree_and_match_the_pattern() {
    let node = example1_product();
    let (table, spread) = three_routes(&node, 0, 4);
    assert!(spread <= 1.0e-10, "route spread {spread:.3e}");
    for ((w, w2), m) in table.iter() {
        let g1_only =
            w.letters().iter().all(|&l| l == 1) && w2.letters().iter().all(|&l| l == 1);
        let expected = if g1_only {
            2.0 * if (w.len() + w2.len()) % 2 == 0 { 1.0 } else { -1.0 }
        } else {
            0.0
        };
        assert!(
            (m[(0, 0)] - re(expected)).norm() <= 1.0e-10,
            "entry at ({w}, {w2})"
        );
    }
    pass(1, "two-factor product kernels, three routes, closed-form pattern");
}

#[test]
fn criterion_02_two_variable_kernels_coincide() {
    let node = node_e2();
    let j = scalar_j();
    let cert = associated_h_line(&node, &j, None).unwrap();
    let k1 = kernel_from_node(&node, &cert.h, 0, 4).unwrap();
    let k2 = kernel_from_node(&node, &cert.h, 1, 4).unwrap();
    assert!(k1.max_distance(&k2).unwrap() <= 1.0e-12);
    for ((w, w2), m) in k1.iter() {
        let expected = 2.0 * if (w.len() + w2.len()) % 2 == 0 { 1.0 } else { -1.0 };
        assert!((m[(0, 0)] - re(expected)).norm() <= 1.0e-12);
    }
    pass(2, "two-variable kernels equal across components with 2(−1)^{|w|+|w'|} entries");
}

#[test]
fn criterion_03_complex_shifted_example_routes_agree() {
    let raw = psi_node().associated().unwrap().product(&phi_node()).unwrap();
    let (node, _) = reduce_to_minimal(&raw, None).unwrap();
    assert!(node.transfer_distance(&raw, 7).unwrap() <= 1.0e-9);
    for k in 0..2 {
        let (_, spread) = three_routes(&node, k, 3);
        assert!(spread <= 1.0e-9, "component {k} route spread {spread:.3e}");
    }
    pass(3, "complex-shifted example, three kernel routes to 1e-9");
}

#[test]
fn criterion_04_certificate_residuals() {
    let j = scalar_j();
    for (name, node) in [
        ("halfplane scalar", node_e1()),
        ("two-variable", node_e2()),
        ("two-factor product", example1_product()),
    ] {
        let cert = associated_h_line(&node, &j, None).unwrap();
        let max = cert.residuals.max();
        assert!(max <= 1.0e-9, "{name}: residual {max:.3e}");
    }
    for (name, node) in [("shift", shift_node()), ("Blaschke", blaschke_node())] {
        let cert = associated_h_circle(&node, &j, None).unwrap();
        let max = cert.residuals.max();
        assert!(max <= 1.0e-9, "{name}: residual {max:.3e}");
    }
    pass(4, "Lyapunov/Stein certificate residuals ≤ 1e-9 on all five fixtures");
}

#[test]
fn criterion_05_sampled_isometry_defects() {
    let j = scalar_j();
    for (name, node) in [
        ("halfplane scalar", node_e1()),
        ("two-variable", node_e2()),
        ("two-factor product", example1_product()),
    ] {
        for n in 1..=3 {
            let report = sample_check_line(&node, &j, n, 32, 42).unwrap();
            assert!(
                report.max_defect <= 1.0e-8,
                "{name} at size {n}: defect {:.3e}",
                report.max_defect
            );
        }
    }
    for (name, node) in [("shift", shift_node()), ("Blaschke", blaschke_node())] {
        for n in 1..=3 {
            let report = sample_check_circle(&node, &j, n, 32, 42).unwrap();
            assert!(
                report.max_defect <= 1.0e-8,
                "{name} at size {n}: defect {:.3e}",
                report.max_defect
            );
        }
    }
    pass(5, "32-sample isometry defects ≤ 1e-8 at sizes 1..3, both cases");
}

#[test]
fn criterion_06_negative_squares_match_kernel_grams() {
    let j = scalar_j();
    let one = CVec::from_element(1, re(1.0));

    // Positive scalar fixture: ν = [0].
    let node = node_e1();
    let cert = associated_h_line(&node, &j, None).unwrap();
    assert_eq!(cert.h.negative_squares(), vec![0]);
    let table = kernel_from_node(&node, &cert.h, 0, 2).unwrap();
    let pairs: Vec<(Word, CVec)> = words_up_to(1, 2)
        .into_iter()
        .map(|w| (w, one.clone()))
        .collect();
    let gram = kernel_gram(&table, &pairs).unwrap();
    assert_eq!(gram.negative, 0);

    // Its inverse: ν = [1].
    let node = node_e1().associated().unwrap();
    let cert = associated_h_line(&node, &j, None).unwrap();
    assert_eq!(cert.h.negative_squares(), vec![1]);
    let table = kernel_from_node(&node, &cert.h, 0, 2).unwrap();
    let gram = kernel_gram(&table, &pairs).unwrap();
    assert_eq!(gram.negative, 1);

    // Two variables: ν = [0, 0].
    let node = node_e2();
    let cert = associated_h_line(&node, &j, None).unwrap();
    assert_eq!(cert.h.negative_squares(), vec![0, 0]);
    for k in 0..2 {
        let table = kernel_from_node(&node, &cert.h, k, 2).unwrap();
        let pairs: Vec<(Word, CVec)> = words_up_to(2, 2)
            .into_iter()
            .map(|w| (w, one.clone()))
            .collect();
        let gram = kernel_gram(&table, &pairs).unwrap();
        assert_eq!(gram.negative, 0, "component {k}");
    }
    pass(6, "negative squares equal kernel-Gram negative counts exactly");
}

#[test]
fn criterion_07_minimal_factorization_recovers_the_scalar_factors() {
    let node = example1_product();
    let fam = SubspaceFamily::new(vec![CMat::identity(1, 1), CMat::zeros(1, 0)]).unwrap();
    let minus_one = CMat::from_row_slice(1, 1, &[re(-1.0)]);
    let (f1, f2) = minimal_junitary_factorize_line(
        &node,
        &scalar_j(),
        &fam,
        Some((minus_one.clone(), minus_one)),
    )
    .unwrap();
    assert_eq!(f1.dims(), &[1, 0]);
    assert_eq!(f2.dims(), &[0, 1]);
    assert!(f1.transfer_distance(&e1_in_variable(2, 0), 6).unwrap() <= 1.0e-10);
    assert!(f2.transfer_distance(&e1_in_variable(2, 1), 6).unwrap() <= 1.0e-10);
    for f in [&f1, &f2] {
        let report = freeseries::line::is_matrix_j_unitary_line(f, &scalar_j(), None).unwrap();
        assert!(report.holds);
    }
    pass(7, "minimal factorization over the invariant family, dims (1,1) = (1,0)+(0,1)");
}

#[test]
fn criterion_08_cayley_coherence() {
    let line = cayley(&shift_node(), re(1.0)).unwrap();
    let e1 = node_e1();
    assert!((line.a() - e1.a()).norm() <= 1.0e-15);
    assert!((line.b() - e1.b()).norm() <= 1.0e-15);
    assert!((line.c() - e1.c()).norm() <= 1.0e-15);
    assert!((line.d() - e1.d()).norm() <= 1.0e-15);

    let j = scalar_j();
    let h_circle = associated_h_circle(&shift_node(), &j, None).unwrap().h;
    let h_line = associated_h_line(&e1, &j, None).unwrap().h;
    assert!((h_circle.h().block(0)[(0, 0)] - re(1.0)).norm() <= 1.0e-12);
    assert!((h_line.h().block(0)[(0, 0)] - re(1.0)).norm() <= 1.0e-12);
    pass(8, "Cayley at a = 1 maps the shift to the halfplane fixture, H = [1] both sides");
}

#[test]
fn criterion_09_model_realization_round_trip() {
    let f = node_e2().expand(8);
    let (model, h) = model_realization(&f, &scalar_j()).unwrap();
    assert_eq!(model.dims(), &[1, 1]);
    assert!(model.transfer_distance(&node_e2(), 6).unwrap() <= 1.0e-10);

    // Both balanced forms must be linked by a block-unitary similarity.
    let balanced_model = balance(&model, &h).unwrap();
    let e2 = node_e2(); // its certificate is already the identity
    let t = similarity_between(&balanced_model, &e2, None).unwrap();
    for k in 0..2 {
        let block = t.block(k);
        assert!(
            (block.adjoint() * block - CMat::identity(1, 1)).norm() <= 1.0e-9,
            "component {k} link is not unitary"
        );
    }
    pass(9, "model realization of the two-variable fixture, block-unitary link");
}

#[test]
fn criterion_10_reduction_strips_padding() {
    let s = 2.0f64.sqrt();
    let padded = GrNode::new(
        1,
        vec![2],
        CMat::from_row_slice(2, 2, &[re(-1.0), re(0.0), re(0.0), re(0.3)]),
        CMat::from_row_slice(2, 1, &[re(s), re(0.0)]),
        CMat::from_row_slice(1, 2, &[re(s), re(0.0)]),
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
    )
    .unwrap();
    let (reduced, _) = reduce_to_minimal(&padded, None).unwrap();
    assert_eq!(reduced.dims(), &[1]);
    assert!(
        reduced
            .expand(8)
            .max_coefficient_distance(&node_e1().expand(8))
            .unwrap()
            <= 1.0e-12
    );
    pass(10, "minimization strips unreachable/unobservable padding");
}

#[test]
fn criterion_11_schur_agler_sampling() {
    let report = schur_agler_sample(&blaschke_node(), 4, 100, 7).unwrap();
    assert!(
        report.max_norm <= 1.0 + 1.0e-8,
        "Blaschke norm {:.6}",
        report.max_norm
    );
    assert!(report.used >= 90);

    let (balanced, _) = balance_disk(&blaschke_node(), &scalar_j(), None).unwrap();
    assert!(unitary_node_check(&balanced).unwrap());
    let report = schur_agler_sample(&balanced, 4, 100, 8).unwrap();
    assert!(report.max_norm <= 1.0 + 1.0e-8);

    let report = schur_agler_sample(&shift_node(), 4, 100, 9).unwrap();
    assert!(report.max_norm <= 1.0 + 1.0e-8);
    pass(11, "contractive evaluations over 100 strict-contraction tuples, sizes ≤ 4");
}

#[test]
fn criterion_12_randomized_law_spot_checks() {
    let mut rng = sampling::rng_from_seed(0xACCE);

    for _ in 0..16 {
        // Word laws.
        let letters = |rng: &mut rand_chacha::ChaCha12Rng, len: usize| -> Word {
            let ls: Vec<u32> = (0..len)
                .map(|_| 1 + (sampling::ginibre(rng, 1, 1)[(0, 0)].re.abs() * 10.0) as u32 % 3)
                .collect();
            Word::from_letters(&ls, 3).unwrap()
        };
        let u = letters(&mut rng, 3);
        let v = letters(&mut rng, 2);
        let w = letters(&mut rng, 4);
        assert_eq!(u.concat(&v).concat(&w), u.concat(&v.concat(&w)));
        assert_eq!(u.concat(&v).transpose(), v.transpose().concat(&u.transpose()));

        // Series associativity.
        let random_series = |rng: &mut rand_chacha::ChaCha12Rng| {
            FpsTable::from_terms(
                2,
                1,
                1,
                2,
                [
                    (Word::empty(), sampling::ginibre(rng, 1, 1)),
                    (Word::generator(1), sampling::ginibre(rng, 1, 1)),
                    (Word::generator(2), sampling::ginibre(rng, 1, 1)),
                ],
            )
            .unwrap()
        };
        let f = random_series(&mut rng);
        let g = random_series(&mut rng);
        let h = random_series(&mut rng);
        let left = f.mul(&g).unwrap().mul(&h).unwrap();
        let right = f.mul(&g.mul(&h).unwrap()).unwrap();
        assert!(left.max_coefficient_distance(&right).unwrap() <= 1.0e-12);

        // Product homomorphism of nodes.
        let random_node = |rng: &mut rand_chacha::ChaCha12Rng| {
            GrNode::new(
                2,
                vec![1, 1],
                sampling::ginibre(rng, 2, 2),
                sampling::ginibre(rng, 2, 1),
                sampling::ginibre(rng, 1, 2),
                sampling::ginibre(rng, 1, 1) + CMat::identity(1, 1) * cplx(1.5, 0.0),
            )
            .unwrap()
        };
        let n1 = random_node(&mut rng);
        let n2 = random_node(&mut rng);
        let lhs = n1.product(&n2).unwrap().expand(3);
        let rhs = n1.expand(3).mul(&n2.expand(3)).unwrap();
        assert!(lhs.max_coefficient_distance(&rhs).unwrap() <= 1.0e-10);
        let assoc = n1.associated().unwrap().expand(3);
        let inv = n1.expand(3).invert().unwrap();
        assert!(assoc.max_coefficient_distance(&inv).unwrap() <= 1.0e-9);
    }

    // Hermitian symmetry of kernel tables from random certified nodes.
    let mut found = 0;
    for seed in 0..8u64 {
        let mut rng = sampling::rng_from_seed(seed);
        let r = 2;
        let a = sampling::ginibre(&mut rng, r, r) - CMat::identity(r, r) * cplx(0.5, 0.0);
        let c = sampling::ginibre(&mut rng, 1, r);
        let Ok((node, cert)) = complete_from_ca_line(&c, &a, &[r], &scalar_j(), None) else {
            continue;
        };
        let table = kernel_from_node(&node, &cert.h, 0, 2).unwrap();
        assert!(table.hermitian_defect() <= 1.0e-10);
        found += 1;
    }
    assert!(found >= 4, "too few certified draws: {found}");
    pass(12, "seeded law spot-checks across words, series, nodes, kernels");
}
