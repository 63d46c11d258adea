//! J-unitarity on the non-commutative line: a square rational series is
//! *matrix-J-unitary on skew-Hermitian tuples* when
//! `F(Z)(J ⊗ I_n)F(Z)* = J ⊗ I_n` for every `n` and every `N`-tuple `Z` of
//! skew-Hermitian `n×n` matrices.  For a minimal realization this is
//! equivalent to the existence of an invertible Hermitian block-diagonal `H`
//! with
//!
//! ```text
//! A*H + HA = −C*JC          (structured Lyapunov identity)
//! B       = −H⁻¹C*JD        (input coupling)
//! ```
//!
//! and dually `AG + GA* = −BJB*`, `C = −DJB*H` with `G = H⁻¹`.  This module
//! computes the certificate `H`, answers the classification question,
//! samples the defining identity, solves the two inverse problems
//! (completing `(C, A)` or `(A, B)` data to a J-unitary series), counts
//! negative squares, and reports the joint-spectrum diagnostics for the
//! matrix-unitary case.

use crate::error::{Error, Result};
use crate::grnode::GrNode;
use crate::linalg::{self, CMat, CVec};
use crate::minimal::{self, capped_degree};
use crate::sampling;
use crate::structured::{
    solve_structured, BlockDiag, StructuredForm, StructuredHermitian, HERMITIAN_ACCEPT_TOL,
    STRUCTURED_RESIDUAL_TOL,
};
use num_complex::Complex64;

/// Relative residuals of the line-case certificate identities.
#[derive(Clone, Copy, Debug)]
pub struct LineResiduals {
    /// `‖DJD* − J‖ / ‖J‖·max(1, ‖D‖²)`.
    pub d_j_unitary: f64,
    /// `‖A*H + HA + C*JC‖ / max(‖C*JC‖, ‖A‖·‖H‖, 1)`.
    pub lyapunov: f64,
    /// `‖B + H⁻¹C*JD‖ / max(‖B‖, 1)`.
    pub input_coupling: f64,
    /// `‖AG + GA* + BJB*‖ / max(‖BJB*‖, ‖A‖·‖G‖, 1)` with `G = H⁻¹`.
    pub dual_lyapunov: f64,
    /// `‖C + DJB*H‖ / max(‖C‖, 1)`.
    pub output_coupling: f64,
}

impl LineResiduals {
    /// Largest of the five residuals.
    pub fn max(&self) -> f64 {
        self.d_j_unitary
            .max(self.lyapunov)
            .max(self.input_coupling)
            .max(self.dual_lyapunov)
            .max(self.output_coupling)
    }
}

/// The certificate produced by a successful line-case classification.
#[derive(Clone, Debug)]
pub struct LineCertificate {
    /// The invertible Hermitian block-diagonal matrix.
    pub h: StructuredHermitian,
    /// Residuals of the identities it satisfies.
    pub residuals: LineResiduals,
}

/// Outcome of [`is_matrix_j_unitary_line`].
#[derive(Clone, Debug)]
pub struct LineClassification {
    /// Whether the series is matrix-J-unitary on skew-Hermitian tuples.
    pub holds: bool,
    /// Certificate when `holds`.
    pub certificate: Option<LineCertificate>,
    /// Failure explanation when `!holds`.
    pub reason: Option<String>,
}

fn check_square_with_j(node: &GrNode, j: &CMat) -> Result<()> {
    linalg::check_signature_matrix(j)?;
    if node.output_dim() != node.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "J-unitarity needs a square series, got {}×{}",
            node.output_dim(),
            node.input_dim()
        )));
    }
    if j.nrows() != node.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "J is {}×{} but the series is {}×{}",
            j.nrows(),
            j.ncols(),
            node.output_dim(),
            node.input_dim()
        )));
    }
    Ok(())
}

fn d_j_unitary_residual(d: &CMat, j: &CMat) -> f64 {
    let defect = (d * j * d.adjoint() - j).norm();
    let scale = j.norm() * (d.norm() * d.norm()).max(1.0);
    defect / scale.max(1.0e-300)
}

/// Computes the five certificate residuals for a candidate `H`.
pub fn line_residuals(node: &GrNode, j: &CMat, h: &BlockDiag) -> Result<LineResiduals> {
    let h_full = h.to_full();
    let g_full = h.inverse()?.to_full();
    let (a, b, c, d) = (node.a(), node.b(), node.c(), node.d());
    let cjc = c.adjoint() * j * c;
    let lyap = (a.adjoint() * &h_full + &h_full * a + &cjc).norm()
        / cjc.norm().max(a.norm() * h_full.norm()).max(1.0);
    let b_pred = -(&g_full * c.adjoint() * j * d);
    let input = (b - b_pred).norm() / b.norm().max(1.0);
    let bjb = b * j * b.adjoint();
    let dual = (a * &g_full + &g_full * a.adjoint() + &bjb).norm()
        / bjb.norm().max(a.norm() * g_full.norm()).max(1.0);
    let c_pred = -(d * j * b.adjoint() * &h_full);
    let output = (c - c_pred).norm() / c.norm().max(1.0);
    Ok(LineResiduals {
        d_j_unitary: d_j_unitary_residual(d, j),
        lyapunov: lyap,
        input_coupling: input,
        dual_lyapunov: dual,
        output_coupling: output,
    })
}

/// Node `(−A*, C*J, −JB*, JD*J)`, which realizes the inverse series exactly
/// when the original series is matrix-J-unitary on the line.
fn j_flipped_adjoint(node: &GrNode, j: &CMat) -> Result<GrNode> {
    GrNode::new(
        node.n_vars(),
        node.dims().to_vec(),
        -node.a().adjoint(),
        node.c().adjoint() * j,
        -(j * node.b().adjoint()),
        j * node.d().adjoint() * j,
    )
}

/// Associated structured Hermitian matrix of a minimal realization of a
/// matrix-J-unitary series on the line.
///
/// `H = −T` where `T` is the unique block-diagonal similarity carrying the
/// node realizing the inverse series onto `(−A*, C*J, −JB*, JD*J)`; the
/// Lyapunov and coupling identities are then verified as independent
/// residual checks.
///
/// # Errors
/// [`Error::NotMinimal`] if the node fails the rank test;
/// [`Error::NotInClass`] when the series is not matrix-J-unitary (D not
/// J-unitary, inverse-series realizations differ, `T` not Hermitian, or a
/// residual above tolerance).
pub fn associated_h_line(node: &GrNode, j: &CMat, tol: Option<f64>) -> Result<LineCertificate> {
    check_square_with_j(node, j)?;
    if !minimal::is_minimal(node, tol)? {
        return Err(Error::NotMinimal(
            "associated Hermitian matrix needs a minimal realization".into(),
        ));
    }
    let d_res = d_j_unitary_residual(node.d(), j);
    if d_res > STRUCTURED_RESIDUAL_TOL {
        return Err(Error::NotInClass(format!(
            "constant coefficient is not J-unitary (defect {d_res:.3e})"
        )));
    }
    let h = if node.state_dim() == 0 {
        BlockDiag::from_blocks(node.dims().iter().map(|&d| CMat::zeros(d, d)).collect())?
    } else {
        let assoc = node
            .associated()
            .map_err(|e| Error::Numerical(format!("inverse realization: {e}")))?;
        let flipped = j_flipped_adjoint(node, j)?;
        // If F is matrix-J-unitary these two nodes realize the same series
        // (the inverse of F); if the expansions differ, F is not in the
        // class and there is nothing to certify.
        let r = node.state_dim();
        let (p, q) = (node.output_dim(), node.input_dim());
        let deg = capped_degree(node.n_vars(), p * r + r * q);
        let dist = assoc.transfer_distance(&flipped, deg)?;
        let scale = assoc.expand(deg).max_coefficient_norm().max(1.0);
        if dist > 1.0e-9 * scale {
            return Err(Error::NotInClass(format!(
                "the inverse series is not the J-flipped adjoint (distance {dist:.3e} \
                 through degree {deg})"
            )));
        }
        let t = minimal::similarity_between(&assoc, &flipped, tol)?;
        let minus_t = t.negate();
        if !minus_t.is_hermitian_within(HERMITIAN_ACCEPT_TOL) {
            return Err(Error::NotInClass(
                "the certifying similarity is not Hermitian".into(),
            ));
        }
        minus_t.hermitian_part()
    };
    for (k, blk) in h.blocks().iter().enumerate() {
        if linalg::checked_inverse(blk).is_err() {
            return Err(Error::NotInClass(format!(
                "certificate block {} is numerically singular",
                k + 1
            )));
        }
    }
    let residuals = line_residuals(node, j, &h)?;
    if residuals.max() > STRUCTURED_RESIDUAL_TOL {
        return Err(Error::NotInClass(format!(
            "certificate residual {:.3e} above {STRUCTURED_RESIDUAL_TOL:.1e}",
            residuals.max()
        )));
    }
    Ok(LineCertificate {
        h: StructuredHermitian::new(h)?,
        residuals,
    })
}

/// Classification with certificate: true iff `D` is J-unitary and the
/// associated Hermitian matrix exists.
///
/// # Errors
/// Hard failures only (non-minimal node, dimension problems); a series that
/// is simply not in the class yields `holds: false`.
pub fn is_matrix_j_unitary_line(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<LineClassification> {
    match associated_h_line(node, j, tol) {
        Ok(certificate) => Ok(LineClassification {
            holds: true,
            certificate: Some(certificate),
            reason: None,
        }),
        Err(Error::NotInClass(reason)) => Ok(LineClassification {
            holds: false,
            certificate: None,
            reason: Some(reason),
        }),
        Err(e) => Err(e),
    }
}

/// Result of sampling a defining identity on random tuples.
#[derive(Clone, Copy, Debug)]
pub struct SampleReport {
    /// Largest Frobenius defect observed.
    pub max_defect: f64,
    /// Samples that evaluated successfully.
    pub used: usize,
    /// Samples skipped because the resolvent was singular.
    pub skipped: usize,
}

/// Maximum of `‖F(Z)(J⊗I)F(Z)* − J⊗I‖` over random skew-Hermitian tuples
/// of size `n` inside the evaluation domain.
pub fn sample_check_line(
    node: &GrNode,
    j: &CMat,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<SampleReport> {
    check_square_with_j(node, j)?;
    if n == 0 {
        return Err(Error::InvalidInput("evaluation size n must be ≥ 1".into()));
    }
    let a_norm = linalg::spectral_norm(node.a());
    let eps = if a_norm == 0.0 { 1.0 } else { 1.0 / a_norm };
    let mut rng = sampling::rng_from_seed(seed);
    let j_big = linalg::kron(j, &CMat::identity(n, n));
    let mut max_defect: f64 = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for _ in 0..samples {
        let z = sampling::skew_hermitian_tuple(&mut rng, node.n_vars(), n, eps);
        match node.eval_closed(&z) {
            Ok(f) => {
                used += 1;
                max_defect = max_defect.max((&f * &j_big * f.adjoint() - &j_big).norm());
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(SampleReport {
        max_defect,
        used,
        skipped,
    })
}

/// Completes observable output data `(C, A)` to a minimal matrix-J-unitary
/// series on the line with the canonical choice `D = I_q`,
/// `B = −H⁻¹C*J`, where `H` solves the structured Lyapunov identity
/// `A*H + HA = −C*JC`.
///
/// # Errors
/// [`Error::NotMinimal`] if `(C, A)` is not observable;
/// [`Error::Numerical`] when the Lyapunov identity has no structured
/// Hermitian solution within tolerance or only singular ones.
pub fn complete_from_ca_line(
    c: &CMat,
    a: &CMat,
    dims: &[usize],
    j: &CMat,
    tol: Option<f64>,
) -> Result<(GrNode, LineCertificate)> {
    linalg::check_signature_matrix(j)?;
    let q = j.nrows();
    let n_vars = dims.len();
    let r: usize = dims.iter().sum();
    let probe = GrNode::new(
        n_vars,
        dims.to_vec(),
        a.clone(),
        CMat::zeros(r, q),
        c.clone(),
        CMat::identity(q, q),
    )?;
    let obs_ranks = minimal::observability_ranks(&probe, tol)?;
    if obs_ranks.iter().zip(dims).any(|(rk, d)| rk != d) {
        return Err(Error::NotMinimal(format!(
            "(C, A) is not observable: ranks {obs_ranks:?} vs dims {dims:?}"
        )));
    }
    let rhs = -(c.adjoint() * j * c);
    let solution = solve_structured(StructuredForm::Sylvester, a, &rhs, dims).map_err(|e| {
        Error::Numerical(format!(
            "no structured Hermitian solution of the Lyapunov identity: {e}"
        ))
    })?;
    let h_inv = solution.h.inverse().map_err(|_| {
        Error::Numerical("the structured Lyapunov solution is singular".into())
    })?;
    let b = -(h_inv.to_full() * c.adjoint() * j);
    let node = GrNode::new(
        n_vars,
        dims.to_vec(),
        a.clone(),
        b,
        c.clone(),
        CMat::identity(q, q),
    )?;
    let certificate = associated_h_line(&node, j, tol)?;
    Ok((node, certificate))
}

/// Completes controllable input data `(A, B)` to a minimal matrix-J-unitary
/// series on the line with `D = I_q`, `C = −JB*G⁻¹`, where `G` solves the
/// dual identity `AG + GA* = −BJB*` (the certificate is `H = G⁻¹`).
///
/// # Errors
/// Dual of [`complete_from_ca_line`].
pub fn complete_from_ab_line(
    a: &CMat,
    b: &CMat,
    dims: &[usize],
    j: &CMat,
    tol: Option<f64>,
) -> Result<(GrNode, LineCertificate)> {
    linalg::check_signature_matrix(j)?;
    let q = j.nrows();
    if b.ncols() != q {
        return Err(Error::DimensionMismatch(format!(
            "B has {} columns but J is {}×{}",
            b.ncols(),
            q,
            q
        )));
    }
    let n_vars = dims.len();
    let r: usize = dims.iter().sum();
    let probe = GrNode::new(
        n_vars,
        dims.to_vec(),
        a.clone(),
        b.clone(),
        CMat::zeros(q, r),
        CMat::identity(q, q),
    )?;
    let ctrl_ranks = minimal::controllability_ranks(&probe, tol)?;
    if ctrl_ranks.iter().zip(dims).any(|(rk, d)| rk != d) {
        return Err(Error::NotMinimal(format!(
            "(A, B) is not controllable: ranks {ctrl_ranks:?} vs dims {dims:?}"
        )));
    }
    let rhs = -(b * j * b.adjoint());
    let solution =
        solve_structured(StructuredForm::SylvesterDual, a, &rhs, dims).map_err(|e| {
            Error::Numerical(format!(
                "no structured Hermitian solution of the dual Lyapunov identity: {e}"
            ))
        })?;
    let g_inv = solution.h.inverse().map_err(|_| {
        Error::Numerical("the structured dual Lyapunov solution is singular".into())
    })?;
    let c = -(j * b.adjoint() * g_inv.to_full());
    let node = GrNode::new(
        n_vars,
        dims.to_vec(),
        a.clone(),
        b.clone(),
        c,
        CMat::identity(q, q),
    )?;
    let certificate = associated_h_line(&node, j, tol)?;
    Ok((node, certificate))
}

/// A common eigenvector of the compressed tuple `Ā_k = A·P_k` together
/// with its eigenvalue tuple and whether it satisfies the necessary
/// condition for matrix-unitarity.
#[derive(Clone, Debug)]
pub struct JointEigenvector {
    /// Unit common eigenvector in the full state space.
    pub vector: CVec,
    /// Per-component eigenvalues `λ_k` with `Ā_k x = λ_k x`.
    pub eigenvalues: Vec<Complex64>,
    /// Index `j` (0-based) witnessing the necessary condition, if any.
    pub witness: Option<usize>,
}

/// Joint-spectrum diagnostics for a matrix-unitary candidate.
#[derive(Clone, Debug)]
pub struct JointSpectrumReport {
    /// Common eigenvectors found (probabilistic search).
    pub eigenvectors: Vec<JointEigenvector>,
    /// `true` when some common eigenvector violates the necessary
    /// condition, ruling out matrix-unitarity.
    pub condition_violated: bool,
}

/// Searches for common eigenvectors of `Ā_k = A·P_k` (the `k`-th block
/// column of `A` padded with zeros) and checks the necessary condition for
/// matrix-unitarity: for each common eigenvector `x` there must be a `j`
/// with `Re λ_j ≠ 0` (line case) or `|λ_j| ≠ 1` (circle case) *and*
/// `(P_jx)* H_j (P_jx) ≠ 0`.
///
/// The search evaluates eigenvectors of a random linear combination of the
/// `Ā_k` and keeps those that are simultaneous eigenvectors; it is a
/// probabilistic witness, not a certificate.
pub fn joint_spectrum_report(
    node: &GrNode,
    h: &StructuredHermitian,
    circle_case: bool,
    seed: u64,
) -> Result<JointSpectrumReport> {
    let r = node.state_dim();
    if h.h().dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "certificate splitting does not match the node".into(),
        ));
    }
    if r == 0 {
        return Ok(JointSpectrumReport {
            eigenvectors: Vec::new(),
            condition_violated: false,
        });
    }
    let n = node.n_vars();
    // Ā_k = A·P_k: the k-th block column of A, all other columns zero.
    let mut bars: Vec<CMat> = Vec::with_capacity(n);
    for k in 0..n {
        let mut m = CMat::zeros(r, r);
        m.view_mut((0, node.offset(k)), (r, node.dims()[k]))
            .copy_from(&node.a().columns(node.offset(k), node.dims()[k]));
        bars.push(m);
    }
    let mut rng = sampling::rng_from_seed(seed);
    let mut combo = CMat::zeros(r, r);
    for bar in &bars {
        combo += bar * sampling::complex_gaussian(&mut rng);
    }
    let eigs = linalg::eigenvalues(&combo)?;
    // Cluster nearby eigenvalues so a defective pair is handled once.
    let scale = eigs.iter().fold(0.0f64, |a, l| a.max(l.norm())).max(1.0);
    let mut representatives: Vec<Complex64> = Vec::new();
    for l in eigs {
        if !representatives.iter().any(|r0| (l - r0).norm() <= 1.0e-8 * scale) {
            representatives.push(l);
        }
    }
    let a_scale = node.a().norm().max(1.0);
    let mut found: Vec<JointEigenvector> = Vec::new();
    let mut violated = false;
    for mu in representatives {
        let shifted = &combo - CMat::identity(r, r) * mu;
        let basis = linalg::null_space_basis(&shifted, Some(1.0e-8 * a_scale));
        for col in 0..basis.ncols() {
            let x: CVec = basis.column(col).into_owned();
            // Simultaneous-eigenvector test for every component.
            let mut lambdas = Vec::with_capacity(n);
            let mut joint = true;
            for bar in &bars {
                let bx = bar * &x;
                let lambda = x.dotc(&bx); // x* (Ā_k x), x is unit
                if (bx - &x * lambda).norm() > 1.0e-7 * a_scale {
                    joint = false;
                    break;
                }
                lambdas.push(lambda);
            }
            if !joint {
                continue;
            }
            let mut witness = None;
            for jdx in 0..n {
                let off = node.offset(jdx);
                let dim = node.dims()[jdx];
                let px: CVec = x.rows(off, dim).into_owned();
                let spectral_part = if circle_case {
                    (lambdas[jdx].norm() - 1.0).abs()
                } else {
                    lambdas[jdx].re.abs()
                };
                let pairing = px.dotc(&(h.h().block(jdx) * &px)).norm();
                if spectral_part > 1.0e-8 * (1.0 + lambdas[jdx].norm())
                    && pairing > 1.0e-8 * h.h().block(jdx).norm().max(1.0)
                {
                    witness = Some(jdx);
                    break;
                }
            }
            if witness.is_none() {
                violated = true;
            }
            found.push(JointEigenvector {
                vector: x,
                eigenvalues: lambdas,
                witness,
            });
        }
    }
    Ok(JointSpectrumReport {
        eigenvectors: found,
        condition_violated: violated,
    })
}

/// Line-case wrapper of [`joint_spectrum_report`] (`Re λ_j ≠ 0` test).
pub fn unitary_line_diagnostics(
    node: &GrNode,
    h: &StructuredHermitian,
    seed: u64,
) -> Result<JointSpectrumReport> {
    joint_spectrum_report(node, h, false, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use approx::assert_relative_eq;

    fn j_scalar() -> CMat {
        CMat::identity(1, 1)
    }

    fn node_e1() -> GrNode {
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

    fn node_e2() -> GrNode {
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

    #[test]
    fn scalar_fixture_certificate() {
        let cert = associated_h_line(&node_e1(), &j_scalar(), None).unwrap();
        assert_relative_eq!(cert.h.h().block(0)[(0, 0)].re, 1.0, epsilon = 1.0e-10);
        assert!(cert.residuals.max() <= 1.0e-9);
        assert_eq!(cert.h.negative_squares(), vec![0]);
    }

    #[test]
    fn two_variable_fixture_certificate() {
        let cert = associated_h_line(&node_e2(), &j_scalar(), None).unwrap();
        for k in 0..2 {
            assert_relative_eq!(cert.h.h().block(k)[(0, 0)].re, 1.0, epsilon = 1.0e-10);
        }
        assert!(cert.residuals.max() <= 1.0e-9);
        assert_eq!(cert.h.negative_squares(), vec![0, 0]);
    }

    #[test]
    fn inverse_series_flips_signature() {
        let assoc = node_e1().associated().unwrap();
        let cert = associated_h_line(&assoc, &j_scalar(), None).unwrap();
        assert_relative_eq!(cert.h.h().block(0)[(0, 0)].re, -1.0, epsilon = 1.0e-10);
        assert_eq!(cert.h.negative_squares(), vec![1]);
    }

    #[test]
    fn coupling_failure_is_classified_false() {
        // Lyapunov alone is solvable (H = 1/2) but the input coupling fails,
        // so the series is not matrix-J-unitary.
        let node = GrNode::new(
            1,
            vec![1],
            CMat::from_row_slice(1, 1, &[re(-1.0)]),
            CMat::from_row_slice(1, 1, &[re(1.0)]),
            CMat::from_row_slice(1, 1, &[re(1.0)]),
            CMat::from_row_slice(1, 1, &[re(1.0)]),
        )
        .unwrap();
        let out = is_matrix_j_unitary_line(&node, &j_scalar(), None).unwrap();
        assert!(!out.holds);
        assert!(out.reason.is_some());
    }

    #[test]
    fn constant_node_with_j_unitary_d() {
        let node = GrNode::new(
            1,
            vec![0],
            CMat::zeros(0, 0),
            CMat::zeros(0, 1),
            CMat::zeros(1, 0),
            CMat::from_row_slice(1, 1, &[re(-1.0)]),
        )
        .unwrap();
        let out = is_matrix_j_unitary_line(&node, &j_scalar(), None).unwrap();
        assert!(out.holds);
        let cert = out.certificate.unwrap();
        assert_eq!(cert.h.h().total_dim(), 0);
    }

    #[test]
    fn constant_node_with_non_unitary_d() {
        let node = GrNode::new(
            1,
            vec![0],
            CMat::zeros(0, 0),
            CMat::zeros(0, 1),
            CMat::zeros(1, 0),
            CMat::from_row_slice(1, 1, &[re(2.0)]),
        )
        .unwrap();
        let out = is_matrix_j_unitary_line(&node, &j_scalar(), None).unwrap();
        assert!(!out.holds);
    }

    #[test]
    fn non_minimal_input_is_a_hard_error() {
        let s = 2.0f64.sqrt();
        let padded = GrNode::new(
            1,
            vec![2],
            CMat::from_row_slice(2, 2, &[re(-1.0), re(0.0), re(0.0), re(5.0)]),
            CMat::from_row_slice(2, 1, &[re(s), re(0.0)]),
            CMat::from_row_slice(1, 2, &[re(s), re(0.0)]),
            CMat::from_row_slice(1, 1, &[re(-1.0)]),
        )
        .unwrap();
        assert!(matches!(
            associated_h_line(&padded, &j_scalar(), None),
            Err(Error::NotMinimal(_))
        ));
    }

    #[test]
    fn sampling_confirms_the_identity() {
        let report = sample_check_line(&node_e1(), &j_scalar(), 2, 8, 42).unwrap();
        assert!(report.max_defect <= 1.0e-10, "defect {}", report.max_defect);
        let report = sample_check_line(&node_e2(), &j_scalar(), 2, 8, 43).unwrap();
        assert!(report.max_defect <= 1.0e-10, "defect {}", report.max_defect);
    }

    #[test]
    fn sampling_flags_constant_two() {
        let node = GrNode::new(
            1,
            vec![0],
            CMat::zeros(0, 0),
            CMat::zeros(0, 1),
            CMat::zeros(1, 0),
            CMat::from_row_slice(1, 1, &[re(2.0)]),
        )
        .unwrap();
        let report = sample_check_line(&node, &j_scalar(), 1, 4, 1).unwrap();
        assert_relative_eq!(report.max_defect, 3.0, epsilon = 1.0e-12);
    }

    #[test]
    fn completion_from_output_data() {
        let s = 2.0f64.sqrt();
        let (node, cert) = complete_from_ca_line(
            &CMat::from_row_slice(1, 1, &[re(s)]),
            &CMat::from_row_slice(1, 1, &[re(-1.0)]),
            &[1],
            &j_scalar(),
            None,
        )
        .unwrap();
        assert_relative_eq!(cert.h.h().block(0)[(0, 0)].re, 1.0, epsilon = 1.0e-10);
        assert_relative_eq!(node.b()[(0, 0)].re, -s, epsilon = 1.0e-10);
        assert_relative_eq!(node.d()[(0, 0)].re, 1.0);
    }

    #[test]
    fn completion_from_output_data_two_vars() {
        let s = 2.0f64.sqrt();
        let (node, cert) = complete_from_ca_line(
            &CMat::from_row_slice(1, 2, &[re(s), re(s)]),
            &CMat::from_row_slice(2, 2, &[re(-1.0), re(-1.0), re(-1.0), re(-1.0)]),
            &[1, 1],
            &j_scalar(),
            None,
        )
        .unwrap();
        for k in 0..2 {
            assert_relative_eq!(cert.h.h().block(k)[(0, 0)].re, 1.0, epsilon = 1.0e-10);
            assert_relative_eq!(node.b()[(k, 0)].re, -s, epsilon = 1.0e-10);
        }
    }

    #[test]
    fn completion_rejects_unobservable_data() {
        let err = complete_from_ca_line(
            &CMat::zeros(1, 1),
            &CMat::from_row_slice(1, 1, &[re(-1.0)]),
            &[1],
            &j_scalar(),
            None,
        );
        assert!(matches!(err, Err(Error::NotMinimal(_))));
    }

    #[test]
    fn completion_from_input_data() {
        let s = 2.0f64.sqrt();
        let (node, cert) = complete_from_ab_line(
            &CMat::from_row_slice(1, 1, &[re(-1.0)]),
            &CMat::from_row_slice(1, 1, &[re(s)]),
            &[1],
            &j_scalar(),
            None,
        )
        .unwrap();
        // G solves AG + GA* = −BJB*: −2G = −2 so G = 1, C = −JB*G⁻¹ = −√2.
        assert_relative_eq!(node.c()[(0, 0)].re, -s, epsilon = 1.0e-10);
        assert_relative_eq!(cert.h.h().block(0)[(0, 0)].re, 1.0, epsilon = 1.0e-10);
    }

    #[test]
    fn joint_spectrum_of_fixtures() {
        let cert = associated_h_line(&node_e2(), &j_scalar(), None).unwrap();
        let report = unitary_line_diagnostics(&node_e2(), &cert.h, 7).unwrap();
        assert!(!report.condition_violated);
        assert_eq!(report.eigenvectors.len(), 1);
        let ev = &report.eigenvectors[0];
        // Joint eigenvector ∝ (1,1) with λ = (−1, −1).
        assert_relative_eq!(ev.eigenvalues[0].re, -1.0, epsilon = 1.0e-8);
        assert_relative_eq!(ev.eigenvalues[1].re, -1.0, epsilon = 1.0e-8);
        assert!(ev.witness.is_some());
        assert_relative_eq!(
            (ev.vector[0] - ev.vector[1]).norm(),
            0.0,
            epsilon = 1.0e-8
        );
    }

    #[test]
    fn purely_imaginary_joint_eigenvalue_is_flagged() {
        // A = i: the only joint eigenvalue is i ∈ iR, which the necessary
        // condition forbids for matrix-unitary series.
        let node = GrNode::new(
            1,
            vec![1],
            CMat::from_row_slice(1, 1, &[Complex64::i()]),
            CMat::from_row_slice(1, 1, &[re(1.0)]),
            CMat::from_row_slice(1, 1, &[re(1.0)]),
            CMat::from_row_slice(1, 1, &[re(1.0)]),
        )
        .unwrap();
        let h = StructuredHermitian::new(
            BlockDiag::from_blocks(vec![CMat::identity(1, 1)]).unwrap(),
        )
        .unwrap();
        let report = joint_spectrum_report(&node, &h, false, 3).unwrap();
        assert!(report.condition_violated);
    }
}
