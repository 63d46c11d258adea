//! Matrix-selfadjoint rational series on skew-Hermitian and on unitary
//! tuples.  Everything routes through one device: `Φ` is selfadjoint
//! exactly when the doubled series `F = [[I, iΦ], [0, I]]` is
//! matrix-J₁-unitary for the flip signature `J₁ = [[0, I], [I, 0]]`, so
//! the well-tested certificate engines of the line and circle cases do
//! the heavy lifting, and the direct identities serve as residual checks.

use num_complex::Complex64;

use crate::circle;
use crate::error::{Error, Result};
use crate::factorization::{self, SubspaceFamily};
use crate::grnode::GrNode;
use crate::line;
use crate::linalg::{self, CMat};
use crate::minimal;
use crate::structured::{BlockDiag, StructuredHermitian, STRUCTURED_RESIDUAL_TOL};

/// The flip signature `[[0, I_q], [I_q, 0]]`.
pub fn j1_matrix(q: usize) -> CMat {
    let mut j = CMat::zeros(2 * q, 2 * q);
    j.view_mut((0, q), (q, q)).copy_from(&CMat::identity(q, q));
    j.view_mut((q, 0), (q, q)).copy_from(&CMat::identity(q, q));
    j
}

/// Doubles a square series `Φ` into `F = [[I_q, iΦ], [0, I_q]]`, realized
/// on the same state space: `(A, [0 B], [iC; 0], [[I, iD], [0, I]])`.
/// The result is minimal exactly when the input is.
pub fn embed_j1(node: &GrNode) -> Result<GrNode> {
    let q = node.input_dim();
    if node.output_dim() != q {
        return Err(Error::DimensionMismatch(
            "selfadjointness needs a square series".into(),
        ));
    }
    let r = node.state_dim();
    let i = Complex64::new(0.0, 1.0);

    let mut b = CMat::zeros(r, 2 * q);
    b.view_mut((0, q), (r, q)).copy_from(node.b());

    let mut c = CMat::zeros(2 * q, r);
    c.view_mut((0, 0), (q, r)).copy_from(&(node.c() * i));

    let mut d = CMat::identity(2 * q, 2 * q);
    d.view_mut((0, q), (q, q)).copy_from(&(node.d() * i));

    GrNode::new(node.n_vars(), node.dims().to_vec(), node.a().clone(), b, c, d)
}

/// Residuals of the direct line-case identities.
#[derive(Clone, Copy, Debug)]
pub struct SaLineResiduals {
    /// `‖D − D*‖` (relative).
    pub d_hermitian: f64,
    /// `‖A*H + HA‖` (relative).
    pub lyapunov: f64,
    /// `‖C − iB*H‖` (relative).
    pub coupling: f64,
}

impl SaLineResiduals {
    /// Largest of the three residuals.
    pub fn max(&self) -> f64 {
        self.d_hermitian.max(self.lyapunov).max(self.coupling)
    }
}

/// Residuals of the direct circle-case identities.
#[derive(Clone, Copy, Debug)]
pub struct SaCircleResiduals {
    /// `‖H − A*HA‖` (relative).
    pub stein: f64,
    /// `‖(D − D*) − iB*HB‖` (relative).
    pub d_identity: f64,
    /// `‖C − iB*HA‖` (relative).
    pub coupling: f64,
}

impl SaCircleResiduals {
    /// Largest of the three residuals.
    pub fn max(&self) -> f64 {
        self.stein.max(self.d_identity).max(self.coupling)
    }
}

/// Outcome of a selfadjoint classification.
#[derive(Clone, Debug)]
pub struct SelfadjointClassification<R> {
    /// Whether the series is matrix-selfadjoint on the respective set.
    pub holds: bool,
    /// The associated structured Hermitian matrix when `holds`.
    pub h: Option<StructuredHermitian>,
    /// Residuals of the direct identities when `holds`.
    pub residuals: Option<R>,
    /// Explanation when `!holds`.
    pub reason: Option<String>,
}

fn sa_line_residuals(node: &GrNode, h: &BlockDiag) -> SaLineResiduals {
    let hf = h.to_full();
    let i = Complex64::new(0.0, 1.0);
    let a_scale = (node.a().norm() * hf.norm()).max(1.0);
    let lyapunov = (node.a().adjoint() * &hf + &hf * node.a()).norm() / a_scale;
    let coupling = (node.c() - (node.b().adjoint() * &hf) * i).norm()
        / node.c().norm().max(1.0);
    let d_hermitian =
        (node.d() - node.d().adjoint()).norm() / node.d().norm().max(1.0);
    SaLineResiduals {
        d_hermitian,
        lyapunov,
        coupling,
    }
}

fn sa_circle_residuals(node: &GrNode, h: &BlockDiag) -> SaCircleResiduals {
    let hf = h.to_full();
    let i = Complex64::new(0.0, 1.0);
    let scale = (node.a().norm() * hf.norm()).max(hf.norm()).max(1.0);
    let stein = (&hf - node.a().adjoint() * &hf * node.a()).norm() / scale;
    let bh = node.b().adjoint() * &hf;
    let d_identity = ((node.d() - node.d().adjoint()) - (&bh * node.b()) * i).norm()
        / node.d().norm().max(1.0);
    let coupling = (node.c() - (&bh * node.a()) * i).norm() / node.c().norm().max(1.0);
    SaCircleResiduals {
        stein,
        d_identity,
        coupling,
    }
}

/// Classifies a minimal node as matrix-selfadjoint on skew-Hermitian
/// tuples: `D = D*` plus a Hermitian invertible structured `H` with
/// `A*H + HA = 0` and `C = iB*H`, found through the doubled series.
pub fn is_matrix_selfadjoint_line(
    node: &GrNode,
    tol: Option<f64>,
) -> Result<SelfadjointClassification<SaLineResiduals>> {
    let doubled = embed_j1(node)?;
    if !minimal::is_minimal(node, tol)? {
        return Err(Error::NotMinimal(
            "selfadjoint classification needs a minimal realization".into(),
        ));
    }
    let j1 = j1_matrix(node.input_dim());
    let verdict = line::is_matrix_j_unitary_line(&doubled, &j1, tol)?;
    if !verdict.holds {
        return Ok(SelfadjointClassification {
            holds: false,
            h: None,
            residuals: None,
            reason: verdict.reason,
        });
    }
    let cert = verdict.certificate.expect("positive answer carries a certificate");
    let residuals = sa_line_residuals(node, cert.h.h());
    if residuals.max() > STRUCTURED_RESIDUAL_TOL {
        return Ok(SelfadjointClassification {
            holds: false,
            h: None,
            residuals: Some(residuals),
            reason: Some(format!(
                "direct identities left residual {:.3e}",
                residuals.max()
            )),
        });
    }
    Ok(SelfadjointClassification {
        holds: true,
        h: Some(cert.h),
        residuals: Some(residuals),
        reason: None,
    })
}

/// Classifies a minimal node as matrix-selfadjoint on unitary tuples:
/// a Hermitian invertible structured `H` with `A*HA = H`,
/// `D − D* = iB*HB` and `C = iB*HA`, found through the doubled series.
pub fn is_matrix_selfadjoint_circle(
    node: &GrNode,
    tol: Option<f64>,
) -> Result<SelfadjointClassification<SaCircleResiduals>> {
    let doubled = embed_j1(node)?;
    if !minimal::is_minimal(node, tol)? {
        return Err(Error::NotMinimal(
            "selfadjoint classification needs a minimal realization".into(),
        ));
    }
    let j1 = j1_matrix(node.input_dim());
    let verdict = circle::is_matrix_j_unitary_circle(&doubled, &j1, tol)?;
    if !verdict.holds {
        return Ok(SelfadjointClassification {
            holds: false,
            h: None,
            residuals: None,
            reason: verdict.reason,
        });
    }
    let cert = verdict.certificate.expect("positive answer carries a certificate");
    let residuals = sa_circle_residuals(node, cert.h.h());
    if residuals.max() > STRUCTURED_RESIDUAL_TOL {
        return Ok(SelfadjointClassification {
            holds: false,
            h: None,
            residuals: Some(residuals),
            reason: Some(format!(
                "direct identities left residual {:.3e}",
                residuals.max()
            )),
        });
    }
    Ok(SelfadjointClassification {
        holds: true,
        h: Some(cert.h),
        residuals: Some(residuals),
        reason: None,
    })
}

fn is_hermitian(m: &CMat) -> bool {
    (m - m.adjoint()).norm() <= 1.0e-9 * m.norm().max(1.0)
}

/// Splits the node additively along an A-invariant, H-nondegenerate
/// family: the first summand lives on `col(M)` (kernel of the supporting
/// projection `Π`), the second on its `[·,·]_H`-companion, realizing
/// `Φ1 = D1 + C(I−ΔA)^{-1}Δ(I−Π)B` and `Φ2 = D2 + CΠ(I−ΔA)^{-1}ΔB`.
fn additive_split(
    node: &GrNode,
    h: &StructuredHermitian,
    fam: &SubspaceFamily,
    d1: &CMat,
    d2: &CMat,
) -> Result<(GrNode, GrNode)> {
    if h.h().dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "Hermitian matrix splitting does not match the node".into(),
        ));
    }
    if !factorization::is_block_a_invariant(node, fam)? {
        return Err(Error::InvalidSubspace(
            "family is not invariant under the state matrix".into(),
        ));
    }
    if !factorization::is_nondegenerate(fam, h.h())? {
        return Err(Error::InvalidSubspace(
            "family is degenerate in the associated inner product".into(),
        ));
    }
    let famperp = factorization::h_orthogonal_complement(fam, h.h())?;
    let pi = factorization::supporting_projection(fam, &famperp)?;
    let n = node.n_vars();
    let dims = node.dims();

    // First summand on col(M).
    let a1 = factorization::compress_state(node.a(), dims, fam)?;
    let mut b1_rows = Vec::with_capacity(n);
    for k in 0..n {
        let eye = CMat::identity(dims[k], dims[k]);
        let image = (eye - pi.block(k)) * node.b_block(k);
        b1_rows.push(factorization::coords_in(fam.basis(k), &image)?);
    }
    let first = GrNode::new(
        n,
        fam.dims(),
        a1,
        linalg::vcat(&b1_rows),
        factorization::restrict_output(node, fam),
        d1.clone(),
    )?;

    // Second summand on the companion family.
    let offsets = factorization::block_offsets(dims);
    let mp_dims = famperp.dims();
    let mp_offsets = factorization::block_offsets(&mp_dims);
    let total: usize = mp_dims.iter().sum();
    let mut a2 = CMat::zeros(total, total);
    for k in 0..n {
        for j in 0..n {
            if mp_dims[k] == 0 || mp_dims[j] == 0 {
                continue;
            }
            let a_kj = node.a().view((offsets[k], offsets[j]), (dims[k], dims[j]));
            let image = pi.block(k) * a_kj * famperp.basis(j);
            let x = factorization::coords_in(famperp.basis(k), &image)?;
            a2.view_mut((mp_offsets[k], mp_offsets[j]), (mp_dims[k], mp_dims[j]))
                .copy_from(&x);
        }
    }
    let mut b2_rows = Vec::with_capacity(n);
    for k in 0..n {
        let image = pi.block(k) * node.b_block(k);
        b2_rows.push(factorization::coords_in(famperp.basis(k), &image)?);
    }
    let second = GrNode::new(
        n,
        mp_dims,
        a2,
        linalg::vcat(&b2_rows),
        factorization::restrict_output(node, &famperp),
        d2.clone(),
    )?;

    // The sum must reproduce the node's series coefficientwise.
    let degree = minimal::capped_degree(
        n,
        node.state_dim() * (node.output_dim() + node.input_dim()) + 1,
    );
    let total_series = first.expand(degree).add(&second.expand(degree))?;
    let dist = node.expand(degree).sub(&total_series)?.max_coefficient_norm();
    let scale = node
        .expand(degree)
        .terms()
        .map(|(_, m)| m.norm())
        .fold(1.0f64, f64::max);
    if dist > 1.0e-12 * scale {
        return Err(Error::Numerical(format!(
            "summand series deviate from the node by {dist:.3e}"
        )));
    }
    Ok((first, second))
}

/// Minimal selfadjoint additive decomposition on skew-Hermitian tuples.
/// `d_split = (D1, D2)` must be Hermitian with `D1 + D2 = D`; both
/// summands are re-certified as matrix-selfadjoint.
pub fn selfadjoint_decompose(
    node: &GrNode,
    h: &StructuredHermitian,
    fam: &SubspaceFamily,
    d_split: (CMat, CMat),
) -> Result<(GrNode, GrNode)> {
    let (d1, d2) = d_split;
    let d_scale = node.d().norm().max(1.0);
    if (&d1 + &d2 - node.d()).norm() > 1.0e-9 * d_scale {
        return Err(Error::InvalidInput(
            "constant parts must add up to the node constant".into(),
        ));
    }
    if !is_hermitian(&d1) || !is_hermitian(&d2) {
        return Err(Error::InvalidInput(
            "both constant parts must be Hermitian".into(),
        ));
    }
    let (first, second) = additive_split(node, h, fam, &d1, &d2)?;
    for part in [&first, &second] {
        let verdict = is_matrix_selfadjoint_line(part, None)?;
        if !verdict.holds {
            return Err(Error::Numerical(
                "constructed summand failed the selfadjoint certification".into(),
            ));
        }
    }
    Ok((first, second))
}

/// Minimal selfadjoint additive decomposition on unitary tuples.  The
/// first constant is prescribed as `D1 = (i/2)·B*P_M H P_M B + S` with
/// `P_M` the componentwise orthogonal projection onto the family and `S`
/// an arbitrary Hermitian matrix (default `0`); `D2 = D − D1`.
pub fn circle_selfadjoint_decompose(
    node: &GrNode,
    h: &StructuredHermitian,
    fam: &SubspaceFamily,
    s: Option<CMat>,
) -> Result<(GrNode, GrNode)> {
    let q = node.input_dim();
    let s = s.unwrap_or_else(|| CMat::zeros(q, q));
    if s.nrows() != q || s.ncols() != q {
        return Err(Error::DimensionMismatch(
            "free Hermitian parameter has the wrong size".into(),
        ));
    }
    if !is_hermitian(&s) {
        return Err(Error::InvalidInput(
            "the free parameter must be Hermitian".into(),
        ));
    }
    if fam.ambient_dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "family ambient dimensions do not match the node".into(),
        ));
    }
    let half_i = Complex64::new(0.0, 0.5);
    let mut d1 = s.clone();
    for k in 0..node.n_vars() {
        let p = fam.orthogonal_projector(k);
        let pb = &p * node.b_block(k);
        d1 += (pb.adjoint() * h.h().block(k) * &pb) * half_i;
    }
    let d2 = node.d() - &d1;
    let (first, second) = additive_split(node, h, fam, &d1, &d2)?;
    for part in [&first, &second] {
        let verdict = is_matrix_selfadjoint_circle(part, None)?;
        if !verdict.holds {
            return Err(Error::Numerical(
                "constructed summand failed the selfadjoint certification".into(),
            ));
        }
    }
    Ok((first, second))
}
