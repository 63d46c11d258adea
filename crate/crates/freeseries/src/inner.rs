//! Matrix-J-inner series: J-unitary series whose certificate `H` is
//! positive definite.  This module answers the inner classification on both
//! the line and the disk, produces the balanced (`H = I`) realization,
//! checks unitarity of the colligation matrix, and samples the Schur–Agler
//! contractivity bound on strict-contraction tuples.

use crate::circle::{self, CircleCertificate};
use crate::error::{Error, Result};
use crate::fps::FpsTable;
use crate::grnode::GrNode;
use crate::line::{self, LineCertificate};
use crate::linalg::{self, CMat};
use crate::sampling;
use crate::structured::{BlockDiag, StructuredHermitian, STRUCTURED_RESIDUAL_TOL};

/// Outcome of an inner classification; `C` is the J-unitary certificate
/// type of the corresponding case.
#[derive(Clone, Debug)]
pub struct InnerClassification<C> {
    /// Whether the series is matrix-J-inner (J-unitary with `H ≻ 0`).
    pub holds: bool,
    /// Whether the series is matrix-J-unitary at all.
    pub j_unitary: bool,
    /// The J-unitary certificate when one exists.
    pub certificate: Option<C>,
    /// Explanation when `!holds`.
    pub reason: Option<String>,
}

/// Line-case inner classification: J-unitary on skew-Hermitian tuples with
/// a positive certificate.
pub fn is_j_inner_line(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<InnerClassification<LineCertificate>> {
    let base = line::is_matrix_j_unitary_line(node, j, tol)?;
    if !base.holds {
        return Ok(InnerClassification {
            holds: false,
            j_unitary: false,
            certificate: None,
            reason: base.reason,
        });
    }
    let cert = base.certificate.expect("certificate accompanies a positive answer");
    let positive = cert.h.is_positive_definite();
    Ok(InnerClassification {
        holds: positive,
        j_unitary: true,
        reason: if positive {
            None
        } else {
            Some(format!(
                "certificate is indefinite: negative squares {:?}",
                cert.h.negative_squares()
            ))
        },
        certificate: Some(cert),
    })
}

/// Disk-case inner classification: J-unitary on unitary tuples with a
/// positive certificate.
pub fn is_j_inner_disk(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<InnerClassification<CircleCertificate>> {
    let base = circle::is_matrix_j_unitary_circle(node, j, tol)?;
    if !base.holds {
        return Ok(InnerClassification {
            holds: false,
            j_unitary: false,
            certificate: None,
            reason: base.reason,
        });
    }
    let cert = base.certificate.expect("certificate accompanies a positive answer");
    let positive = cert.h.is_positive_definite();
    Ok(InnerClassification {
        holds: positive,
        j_unitary: true,
        reason: if positive {
            None
        } else {
            Some(format!(
                "certificate is indefinite: negative squares {:?}",
                cert.h.negative_squares()
            ))
        },
        certificate: Some(cert),
    })
}

/// Changes the state basis with `T = H^{-1/2}` so the certificate becomes
/// the identity: returns `(H^{1/2}AH^{-1/2}, H^{1/2}B, CH^{-1/2}, D)`.
///
/// # Errors
/// [`Error::InvalidInput`] when some block of `H` is not positive definite.
pub fn balance(node: &GrNode, h: &StructuredHermitian) -> Result<GrNode> {
    if h.h().dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "certificate splitting does not match the node".into(),
        ));
    }
    if !h.is_positive_definite() {
        return Err(Error::InvalidInput(
            "balancing needs a positive-definite certificate".into(),
        ));
    }
    let blocks: Vec<CMat> = h
        .h()
        .blocks()
        .iter()
        .map(linalg::hermitian_inv_sqrt)
        .collect::<Result<_>>()?;
    node.apply_similarity(&BlockDiag::from_blocks(blocks)?)
}

fn identity_certificate(dims: &[usize]) -> Result<StructuredHermitian> {
    StructuredHermitian::new(BlockDiag::identity(dims))
}

/// Certifies the node as J-inner on the line, balances it, and re-verifies
/// the balanced identities (`A* + A = −C*JC`, `B = −C*JD`) with `H = I`.
///
/// # Errors
/// [`Error::NotInClass`] when the series is not J-inner.
pub fn balance_line(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<(GrNode, LineCertificate)> {
    let report = is_j_inner_line(node, j, tol)?;
    if !report.holds {
        return Err(Error::NotInClass(
            report
                .reason
                .unwrap_or_else(|| "series is not matrix-J-inner on the line".into()),
        ));
    }
    let cert = report.certificate.expect("inner answer carries a certificate");
    let balanced = balance(node, &cert.h)?;
    let eye = BlockDiag::identity(node.dims());
    let residuals = line::line_residuals(&balanced, j, &eye)?;
    if residuals.max() > STRUCTURED_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "balanced identities left residual {:.3e}",
            residuals.max()
        )));
    }
    Ok((
        balanced,
        LineCertificate {
            h: identity_certificate(node.dims())?,
            residuals,
        },
    ))
}

/// Disk analogue of [`balance_line`]: the balanced node has a unitary-like
/// colligation with respect to `diag(I, J)`.
pub fn balance_disk(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<(GrNode, CircleCertificate)> {
    let report = is_j_inner_disk(node, j, tol)?;
    if !report.holds {
        return Err(Error::NotInClass(
            report
                .reason
                .unwrap_or_else(|| "series is not matrix-J-inner on the disk".into()),
        ));
    }
    let cert = report.certificate.expect("inner answer carries a certificate");
    let parameter = cert.cayley_parameter;
    let balanced = balance(node, &cert.h)?;
    let eye = BlockDiag::identity(node.dims());
    let residuals = circle::circle_residuals(&balanced, j, &eye)?;
    if residuals.max() > STRUCTURED_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "balanced identities left residual {:.3e}",
            residuals.max()
        )));
    }
    Ok((
        balanced,
        CircleCertificate {
            h: identity_certificate(node.dims())?,
            residuals,
            cayley_parameter: parameter,
        },
    ))
}

/// Frobenius defect `‖U*U − I‖ / max(1, ‖U‖²)` of the colligation matrix
/// `U = [[A, B], [C, D]]`.
pub fn unitary_colligation_defect(node: &GrNode) -> f64 {
    let r = node.state_dim();
    let (p, q) = (node.output_dim(), node.input_dim());
    let mut u = CMat::zeros(r + p, r + q);
    u.view_mut((0, 0), (r, r)).copy_from(node.a());
    u.view_mut((0, r), (r, q)).copy_from(node.b());
    u.view_mut((r, 0), (p, r)).copy_from(node.c());
    u.view_mut((r, r), (p, q)).copy_from(node.d());
    let defect = (u.adjoint() * &u - CMat::identity(r + q, r + q)).norm();
    defect / (u.norm() * u.norm()).max(1.0)
}

/// `true` when the colligation matrix is unitary to `1e-9` (relative).
///
/// # Errors
/// [`Error::DimensionMismatch`] unless the series is square.
pub fn unitary_node_check(node: &GrNode) -> Result<bool> {
    if node.output_dim() != node.input_dim() {
        return Err(Error::DimensionMismatch(
            "a unitary colligation needs a square series".into(),
        ));
    }
    Ok(unitary_colligation_defect(node) <= 1.0e-9)
}

/// Result of norm sampling.
#[derive(Clone, Copy, Debug)]
pub struct NormSampleReport {
    /// Largest spectral norm observed.
    pub max_norm: f64,
    /// Samples that evaluated successfully.
    pub used: usize,
    /// Samples skipped because the resolvent was singular.
    pub skipped: usize,
}

/// Maximum spectral norm of the transfer series over random
/// strict-contraction tuples (`‖W_k‖ ≤ 0.95`) of sizes `1..=n_max`.
pub fn schur_agler_sample(
    node: &GrNode,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<NormSampleReport> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be ≥ 1".into()));
    }
    let mut rng = sampling::rng_from_seed(seed);
    let mut max_norm: f64 = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for i in 0..samples {
        let n = 1 + (i % n_max);
        let w = sampling::strict_contraction_tuple(&mut rng, node.n_vars(), n, 0.95);
        match node.eval_closed(&w) {
            Ok(f) => {
                used += 1;
                max_norm = max_norm.max(linalg::spectral_norm(&f));
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(NormSampleReport {
        max_norm,
        used,
        skipped,
    })
}

/// Table variant of [`schur_agler_sample`]: evaluates the truncated series,
/// so the result carries the truncation error of the table.
pub fn schur_agler_sample_table(
    f: &FpsTable,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<NormSampleReport> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be ≥ 1".into()));
    }
    let mut rng = sampling::rng_from_seed(seed);
    let mut max_norm: f64 = 0.0;
    let mut used = 0usize;
    for i in 0..samples {
        let n = 1 + (i % n_max);
        let w = sampling::strict_contraction_tuple(&mut rng, f.n_vars(), n, 0.95);
        let value = f.eval(&w)?;
        used += 1;
        max_norm = max_norm.max(linalg::spectral_norm(&value));
    }
    Ok(NormSampleReport {
        max_norm,
        used,
        skipped: 0,
    })
}
