//! Benchmarks for the hot paths: series expansion and multiplication,
//! minimal compression, the three kernel routes, classification, and the
//! backward-shift model realization.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use freeseries::grnode::GrNode;
use freeseries::kernels::{
    kernel_formal_derivative, kernel_from_node, kernel_from_series, model_realization,
};
use freeseries::line::{associated_h_line, is_matrix_j_unitary_line};
use freeseries::linalg::{re, CMat};
use freeseries::minimal::reduce_to_minimal;

/// One-variable J-unitary node (A=−1, B=C=√2, D=−1) placed in the given
/// variable of an `n_vars`-letter alphabet.
fn e1_in_variable(n_vars: usize, var: usize) -> GrNode {
    let s = re(std::f64::consts::SQRT_2);
    let mut dims = vec![0usize; n_vars];
    dims[var - 1] = 1;
    GrNode::new(
        n_vars,
        dims,
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
        CMat::from_row_slice(1, 1, &[s]),
        CMat::from_row_slice(1, 1, &[s]),
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
    )
    .expect("valid node")
}

/// Product of single-variable factors across all `n_vars` letters.
fn chain_product(n_vars: usize) -> GrNode {
    let mut node = e1_in_variable(n_vars, 1);
    for v in 2..=n_vars {
        node = node.product(&e1_in_variable(n_vars, v)).expect("product");
    }
    node
}

fn scalar_j() -> CMat {
    CMat::identity(1, 1)
}

fn bench_expand(c: &mut Criterion) {
    let node = chain_product(3);
    c.bench_function("expand/3vars/deg6", |b| {
        b.iter(|| black_box(&node).expand(6))
    });
    let two = chain_product(2);
    c.bench_function("expand/2vars/deg10", |b| {
        b.iter(|| black_box(&two).expand(10))
    });
}

fn bench_series_mul(c: &mut Criterion) {
    let f = chain_product(2).expand(7);
    let g = chain_product(2).expand(7);
    c.bench_function("series_mul/2vars/deg7", |b| {
        b.iter(|| black_box(&f).mul(black_box(&g)).expect("product"))
    });
}

fn bench_minimize(c: &mut Criterion) {
    // Pad the last component with two unreachable, unobservable states;
    // the extra rows/columns sit contiguously at the end of the state.
    let node = chain_product(2);
    let r = node.state_dim();
    let mut a = CMat::zeros(r + 2, r + 2);
    a.view_mut((0, 0), (r, r)).copy_from(node.a());
    a[(r, r)] = re(0.25);
    a[(r + 1, r + 1)] = re(0.5);
    let mut bmat = CMat::zeros(r + 2, 1);
    bmat.view_mut((0, 0), (r, 1)).copy_from(node.b());
    let mut cmat = CMat::zeros(1, r + 2);
    cmat.view_mut((0, 0), (1, r)).copy_from(node.c());
    let mut dims = node.dims().to_vec();
    *dims.last_mut().expect("nonempty dims") += 2;
    let padded =
        GrNode::new(2, dims, a, bmat, cmat, node.d().clone()).expect("padded node");
    c.bench_function("minimize/2vars/padded", |b| {
        b.iter(|| reduce_to_minimal(black_box(&padded), None).expect("reduce"))
    });
}

fn bench_kernel_routes(c: &mut Criterion) {
    let node = chain_product(2);
    let j = scalar_j();
    let cert = associated_h_line(&node, &j, None).expect("certificate");
    let f = node.expand(9);
    c.bench_function("kernel/node_route/deg4", |b| {
        b.iter(|| kernel_from_node(black_box(&node), &cert.h, 0, 4).expect("kernel"))
    });
    c.bench_function("kernel/series_route/deg4", |b| {
        b.iter(|| kernel_from_series(black_box(&f), &j, 0, 4).expect("kernel"))
    });
    c.bench_function("kernel/formal_route/deg4", |b| {
        b.iter(|| kernel_formal_derivative(black_box(&node), &j, 0, 4).expect("kernel"))
    });
}

fn bench_classify(c: &mut Criterion) {
    let node = chain_product(3);
    let j = scalar_j();
    c.bench_function("classify/line/3vars", |b| {
        b.iter(|| is_matrix_j_unitary_line(black_box(&node), &j, None).expect("verdict"))
    });
}

fn bench_model(c: &mut Criterion) {
    let f = chain_product(2).expand(8);
    let j = scalar_j();
    c.bench_function("model/2vars/deg8", |b| {
        b.iter(|| model_realization(black_box(&f), &j).expect("model"))
    });
}

criterion_group!(
    benches,
    bench_expand,
    bench_series_mul,
    bench_minimize,
    bench_kernel_routes,
    bench_classify,
    bench_model
);
criterion_main!(benches);
