//! Shared fixtures for the integration suites.

use freeseries::grnode::GrNode;
use freeseries::linalg::{cplx, re, CMat};

pub fn scalar_j() -> CMat {
    CMat::identity(1, 1)
}

/// Line node for `(z+1)⁻¹(z−1)`: `( −1, √2, √2, −1 )`.
pub fn node_e1() -> GrNode {
    let s = 2.0f64.sqrt();
    GrNode::new(
        1,
        vec![1],
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
        CMat::from_row_slice(1, 1, &[re(s)]),
        CMat::from_row_slice(1, 1, &[re(s)]),
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
    )
    .unwrap()
}

/// Two-variable line node for `(z₁+z₂+1)⁻¹(z₁+z₂−1)`.
pub fn node_e2() -> GrNode {
    let s = 2.0f64.sqrt();
    GrNode::new(
        2,
        vec![1, 1],
        CMat::from_row_slice(2, 2, &[re(-1.0), re(-1.0), re(-1.0), re(-1.0)]),
        CMat::from_row_slice(2, 1, &[re(s), re(s)]),
        CMat::from_row_slice(1, 2, &[re(s), re(s)]),
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
    )
    .unwrap()
}

/// The single-variable factor placed in component `var` of an
/// `n_vars`-letter alphabet.
pub fn e1_in_variable(n_vars: usize, var: usize) -> GrNode {
    let s = 2.0f64.sqrt();
    let mut dims = vec![0usize; n_vars];
    dims[var] = 1;
    GrNode::new(
        n_vars,
        dims,
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
        CMat::from_row_slice(1, 1, &[re(s)]),
        CMat::from_row_slice(1, 1, &[re(s)]),
        CMat::from_row_slice(1, 1, &[re(-1.0)]),
    )
    .unwrap()
}

/// Product node for `(z₁+1)⁻¹(z₁−1)·(z₂+1)⁻¹(z₂−1)`.
pub fn example1_product() -> GrNode {
    e1_in_variable(2, 0).product(&e1_in_variable(2, 1)).unwrap()
}

/// Circle node of the coordinate shift `z`.
pub fn shift_node() -> GrNode {
    GrNode::new(
        1,
        vec![1],
        CMat::from_row_slice(1, 1, &[re(0.0)]),
        CMat::from_row_slice(1, 1, &[re(1.0)]),
        CMat::from_row_slice(1, 1, &[re(1.0)]),
        CMat::from_row_slice(1, 1, &[re(0.0)]),
    )
    .unwrap()
}

/// Circle node of the Blaschke factor `(z − 1/2)(1 − z/2)⁻¹`, with
/// associated Hermitian matrix `4/3`.
pub fn blaschke_node() -> GrNode {
    GrNode::new(
        1,
        vec![1],
        CMat::from_row_slice(1, 1, &[re(0.5)]),
        CMat::from_row_slice(1, 1, &[re(0.75)]),
        CMat::from_row_slice(1, 1, &[re(1.0)]),
        CMat::from_row_slice(1, 1, &[re(-0.5)]),
    )
    .unwrap()
}

/// Node for `ψ(z) = (z₂+i)(z₁+1)+1 = (1+i) + i z₁ + z₂ + z₂z₁`.
pub fn psi_node() -> GrNode {
    GrNode::new(
        2,
        vec![1, 1],
        CMat::from_row_slice(2, 2, &[re(0.0), re(0.0), cplx(0.0, -1.0), re(0.0)]),
        CMat::from_row_slice(2, 1, &[cplx(0.0, 1.0), re(1.0)]),
        CMat::from_row_slice(1, 2, &[re(1.0), re(1.0)]),
        CMat::from_row_slice(1, 1, &[cplx(1.0, 1.0)]),
    )
    .unwrap()
}

/// Node for `φ(z) = (z₂+i)(z₁−1)+1 = (1−i) + i z₁ − z₂ + z₂z₁`.
pub fn phi_node() -> GrNode {
    GrNode::new(
        2,
        vec![1, 1],
        CMat::from_row_slice(2, 2, &[re(0.0), re(0.0), cplx(0.0, -1.0), re(0.0)]),
        CMat::from_row_slice(2, 1, &[cplx(0.0, 1.0), re(-1.0)]),
        CMat::from_row_slice(1, 2, &[re(1.0), re(1.0)]),
        CMat::from_row_slice(1, 1, &[cplx(1.0, -1.0)]),
    )
    .unwrap()
}
