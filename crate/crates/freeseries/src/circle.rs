//! J-unitarity on the non-commutative circle: a square rational series is
//! *matrix-J-unitary on unitary tuples* when
//! `F(W)(J ⊗ I_n)F(W)* = J ⊗ I_n` for every `n` and every `N`-tuple `W` of
//! unitary `n×n` matrices.  For a minimal realization this is equivalent to
//! an invertible Hermitian block-diagonal `H` making the colligation
//! `U = [[A, B], [C, D]]` a `diag(H, J)`-isometry:
//!
//! ```text
//! U* diag(H, J) U = diag(H, J)
//! ```
//!
//! equivalently the Stein identity `H − A*HA = C*JC` together with
//! `D*JC = −B*HA` and `J − D*JD = B*HB`.  The certificate is computed by a
//! Cayley transform to the line case with a unimodular parameter kept away
//! from the spectrum of `A`; the Stein identities are then verified
//! independently.

use crate::error::{Error, Result};
use crate::grnode::GrNode;
use crate::line::{self, LineCertificate, SampleReport};
use crate::linalg::{self, CMat};
use crate::minimal;
use crate::sampling;
use crate::structured::{
    solve_structured, BlockDiag, StructuredForm, StructuredHermitian, STRUCTURED_RESIDUAL_TOL,
};
use num_complex::Complex64;

/// Relative residuals of the circle-case certificate identities.
#[derive(Clone, Copy, Debug)]
pub struct CircleResiduals {
    /// `‖U*·diag(H,J)·U − diag(H,J)‖` (relative), `U = [[A,B],[C,D]]`.
    pub colligation: f64,
    /// Same with `U·diag(H⁻¹,J)·U* − diag(H⁻¹,J)`.
    pub dual_colligation: f64,
    /// `‖H − A*HA − C*JC‖` (relative).
    pub stein: f64,
    /// `‖D*JC + B*HA‖` (relative).
    pub coupling: f64,
    /// `‖J − D*JD − B*HB‖` (relative).
    pub d_identity: f64,
}

impl CircleResiduals {
    /// Largest of the five residuals.
    pub fn max(&self) -> f64 {
        self.colligation
            .max(self.dual_colligation)
            .max(self.stein)
            .max(self.coupling)
            .max(self.d_identity)
    }
}

/// The certificate produced by a successful circle-case classification.
#[derive(Clone, Debug)]
pub struct CircleCertificate {
    /// The invertible Hermitian block-diagonal matrix.
    pub h: StructuredHermitian,
    /// Residuals of the identities it satisfies.
    pub residuals: CircleResiduals,
    /// Unimodular Cayley parameter used for the computation (absent for
    /// constant series).
    pub cayley_parameter: Option<Complex64>,
}

/// Outcome of [`is_matrix_j_unitary_circle`].
#[derive(Clone, Debug)]
pub struct CircleClassification {
    /// Whether the series is matrix-J-unitary on unitary tuples.
    pub holds: bool,
    /// Certificate when `holds`.
    pub certificate: Option<CircleCertificate>,
    /// Failure explanation when `!holds`.
    pub reason: Option<String>,
}

/// Cayley transform with unimodular parameter `a`:
/// `(A_a, B_a, C_a, D_a) = ((aA−I)(aA+I)⁻¹, √2(aA+I)⁻¹aB, √2C(aA+I)⁻¹,
/// D − C(aA+I)⁻¹aB)`.  It carries circle-case nodes to line-case nodes with
/// the same certificate `H`, preserves minimality, and is inverted by the
/// transform with parameter `ā` up to the built-in sign conventions.
///
/// # Errors
/// [`Error::InvalidInput`] unless `|a| = 1`;
/// [`Error::Singular`] when `aA + I` is singular (`−ā ∈ σ(A)`).
pub fn cayley(node: &GrNode, a: Complex64) -> Result<GrNode> {
    if (a.norm() - 1.0).abs() > 1.0e-12 {
        return Err(Error::InvalidInput(format!(
            "Cayley parameter must be unimodular, |a| = {}",
            a.norm()
        )));
    }
    let r = node.state_dim();
    let shifted = node.a() * a + CMat::identity(r, r);
    let inv = linalg::checked_inverse(&shifted)
        .map_err(|_| Error::Singular("aA + I is singular (−ā is in the spectrum)".into()))?;
    let s = linalg::cplx(2.0f64.sqrt(), 0.0);
    Ok(GrNode::new(
        node.n_vars(),
        node.dims().to_vec(),
        (node.a() * a - CMat::identity(r, r)) * &inv,
        &inv * node.b() * (a * s),
        node.c() * &inv * s,
        node.d() - node.c() * &inv * node.b() * a,
    )?)
}

/// Picks a unimodular `a` such that the avoided point `to_avoid(a)` stays
/// as far as possible from the given spectrum: scans the 16th roots of
/// unity, falls back to 64 seeded random unimodular samples.
pub(crate) fn best_unimodular<F: Fn(Complex64) -> Complex64>(
    spectrum: &[Complex64],
    to_avoid: F,
) -> Result<Complex64> {
    if spectrum.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let scale = spectrum
        .iter()
        .fold(0.0f64, |m, l| m.max(l.norm()))
        .max(1.0);
    let min_dist = |a: Complex64| -> f64 {
        let pt = to_avoid(a);
        spectrum
            .iter()
            .fold(f64::INFINITY, |m, l| m.min((pt - l).norm()))
    };
    let mut best: Option<(Complex64, f64)> = None;
    for m in 0..16 {
        let theta = std::f64::consts::TAU * (m as f64) / 16.0;
        let a = Complex64::new(theta.cos(), theta.sin());
        let d = min_dist(a);
        if best.map_or(true, |(_, bd)| d > bd) {
            best = Some((a, d));
        }
    }
    if let Some((a, d)) = best {
        if d > 1.0e-8 * scale {
            return Ok(a);
        }
    }
    let mut rng = sampling::rng_from_seed(0xA5A5);
    for _ in 0..64 {
        let a = sampling::random_unimodular(&mut rng);
        if min_dist(a) > 1.0e-8 * scale {
            return Ok(a);
        }
    }
    Err(Error::NoAdmissibleParameter(
        "every scanned unimodular parameter came too close to the spectrum".into(),
    ))
}

/// Unimodular Cayley parameter for a node: keeps `−ā` away from `σ(A)`.
pub fn choose_cayley_parameter(node: &GrNode) -> Result<Complex64> {
    let spectrum = linalg::eigenvalues(node.a())?;
    best_unimodular(&spectrum, |a| -a.conj())
}

/// Computes the five certificate residuals for a candidate `H`.
pub fn circle_residuals(node: &GrNode, j: &CMat, h: &BlockDiag) -> Result<CircleResiduals> {
    let h_full = h.to_full();
    let g_full = h.inverse()?.to_full();
    let (a, b, c, d) = (node.a(), node.b(), node.c(), node.d());
    let r = node.state_dim();
    let q = node.input_dim();
    let mut u = CMat::zeros(r + q, r + q);
    u.view_mut((0, 0), (r, r)).copy_from(a);
    u.view_mut((0, r), (r, q)).copy_from(b);
    u.view_mut((r, 0), (q, r)).copy_from(c);
    u.view_mut((r, r), (q, q)).copy_from(d);
    let s = linalg::block_diag(&[h_full.clone(), j.clone()]);
    let s_dual = linalg::block_diag(&[g_full.clone(), j.clone()]);
    let u_norm_sq = (u.norm() * u.norm()).max(1.0);
    let colligation = (u.adjoint() * &s * &u - &s).norm() / (s.norm() * u_norm_sq).max(1.0);
    let dual_colligation =
        (&u * &s_dual * u.adjoint() - &s_dual).norm() / (s_dual.norm() * u_norm_sq).max(1.0);
    let cjc = c.adjoint() * j * c;
    let stein = (&h_full - a.adjoint() * &h_full * a - &cjc).norm()
        / h_full.norm().max(cjc.norm()).max(1.0);
    let coupling = (d.adjoint() * j * c + b.adjoint() * &h_full * a).norm()
        / (d.norm() * c.norm() + b.norm() * h_full.norm() * a.norm()).max(1.0);
    let djd = d.adjoint() * j * d;
    let d_identity =
        (j - &djd - b.adjoint() * &h_full * b).norm() / j.norm().max(djd.norm()).max(1.0);
    Ok(CircleResiduals {
        colligation,
        dual_colligation,
        stein,
        coupling,
        d_identity,
    })
}

fn check_square_with_j(node: &GrNode, j: &CMat) -> Result<()> {
    linalg::check_signature_matrix(j)?;
    if node.output_dim() != node.input_dim() || j.nrows() != node.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "J-unitarity needs a square series matching J, got {}×{} with J {}×{}",
            node.output_dim(),
            node.input_dim(),
            j.nrows(),
            j.ncols()
        )));
    }
    Ok(())
}

/// Associated structured Hermitian matrix of a minimal realization of a
/// matrix-J-unitary series on the circle, computed through the Cayley
/// transform (the line-case certificate of the transformed node is the same
/// matrix) and certified by the Stein/colligation residuals.
///
/// # Errors
/// [`Error::NotMinimal`] on non-minimal input;
/// [`Error::NotInClass`] when the series is not matrix-J-unitary on the
/// circle; [`Error::NoAdmissibleParameter`] when no usable Cayley parameter
/// exists.
pub fn associated_h_circle(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<CircleCertificate> {
    check_square_with_j(node, j)?;
    if !minimal::is_minimal(node, tol)? {
        return Err(Error::NotMinimal(
            "associated Hermitian matrix needs a minimal realization".into(),
        ));
    }
    let (h, parameter) = if node.state_dim() == 0 {
        (
            BlockDiag::from_blocks(node.dims().iter().map(|&d| CMat::zeros(d, d)).collect())?,
            None,
        )
    } else {
        let a = choose_cayley_parameter(node)?;
        let transformed = cayley(node, a)?;
        let line_cert: LineCertificate = line::associated_h_line(&transformed, j, tol)?;
        (line_cert.h.h().clone(), Some(a))
    };
    let residuals = circle_residuals(node, j, &h)?;
    if residuals.max() > STRUCTURED_RESIDUAL_TOL {
        return Err(Error::NotInClass(format!(
            "circle certificate residual {:.3e} above {STRUCTURED_RESIDUAL_TOL:.1e}",
            residuals.max()
        )));
    }
    Ok(CircleCertificate {
        h: StructuredHermitian::new(h)?,
        residuals,
        cayley_parameter: parameter,
    })
}

/// Classification with certificate, the circle analogue of
/// [`line::is_matrix_j_unitary_line`].
pub fn is_matrix_j_unitary_circle(
    node: &GrNode,
    j: &CMat,
    tol: Option<f64>,
) -> Result<CircleClassification> {
    match associated_h_circle(node, j, tol) {
        Ok(certificate) => Ok(CircleClassification {
            holds: true,
            certificate: Some(certificate),
            reason: None,
        }),
        Err(Error::NotInClass(reason)) => Ok(CircleClassification {
            holds: false,
            certificate: None,
            reason: Some(reason),
        }),
        Err(e) => Err(e),
    }
}

/// Maximum of `‖F(W)(J⊗I)F(W)* − J⊗I‖` over random unitary tuples of size
/// `n`.
pub fn sample_check_circle(
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
    let mut rng = sampling::rng_from_seed(seed);
    let j_big = linalg::kron(j, &CMat::identity(n, n));
    let mut max_defect: f64 = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for _ in 0..samples {
        let w = sampling::unitary_tuple(&mut rng, node.n_vars(), n);
        match node.eval_closed(&w) {
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

/// For a circle-J-unitary node with invertible `D`, the state matrix is
/// invertible with `A⁻¹ = H⁻¹(A − BD⁻¹C)*H`; returns that matrix after
/// asserting it inverts `A`.
///
/// # Errors
/// [`Error::Singular`] if `D` is singular; [`Error::Numerical`] if the
/// asserted identity fails.
pub fn a_inverse_identity(node: &GrNode, h: &StructuredHermitian) -> Result<CMat> {
    let r = node.state_dim();
    if r == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let assoc = node.associated()?; // fails on singular D
    let h_full = h.h().to_full();
    let h_inv = h.inverse()?.to_full();
    let candidate = h_inv * assoc.a().adjoint() * h_full;
    let defect = (&candidate * node.a() - CMat::identity(r, r)).norm();
    let scale = (candidate.norm() * node.a().norm()).max(1.0);
    if defect > 1.0e-9 * scale {
        return Err(Error::Numerical(format!(
            "certified inverse identity for A left defect {defect:.3e}"
        )));
    }
    Ok(candidate)
}

/// Completes observable output data `(C, A)` with invertible `A` to a
/// minimal matrix-J-unitary series on the circle:
/// `H` solves the Stein identity `H − A*HA = C*JC`, and with a unimodular
/// `a ∉ σ(A)` (chosen automatically when not supplied)
///
/// ```text
/// D_a = I − C H⁻¹ (I − aA*)⁻¹ C* J,    B_a = −H⁻¹ A⁻* C* J D_a.
/// ```
///
/// # Errors
/// [`Error::NotMinimal`] if `(C, A)` is not observable;
/// [`Error::Singular`] if `A` is singular; [`Error::Numerical`] when the
/// Stein identity has no invertible structured Hermitian solution;
/// [`Error::NoAdmissibleParameter`] when no usable `a` exists.
pub fn complete_from_ca_circle(
    c: &CMat,
    a_mat: &CMat,
    dims: &[usize],
    j: &CMat,
    a_param: Option<Complex64>,
    tol: Option<f64>,
) -> Result<(GrNode, CircleCertificate)> {
    linalg::check_signature_matrix(j)?;
    let q = j.nrows();
    let n_vars = dims.len();
    let r: usize = dims.iter().sum();
    let a_inv = linalg::checked_inverse(a_mat)
        .map_err(|_| Error::Singular("the completion needs an invertible A".into()))?;
    let probe = GrNode::new(
        n_vars,
        dims.to_vec(),
        a_mat.clone(),
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
    let rhs = c.adjoint() * j * c;
    let solution = solve_structured(StructuredForm::Stein, a_mat, &rhs, dims).map_err(|e| {
        Error::Numerical(format!(
            "no structured Hermitian solution of the Stein identity: {e}"
        ))
    })?;
    let h_inv = solution
        .h
        .inverse()
        .map_err(|_| Error::Numerical("the structured Stein solution is singular".into()))?;
    let spectrum = linalg::eigenvalues(a_mat)?;
    let a = match a_param {
        Some(a) => {
            if (a.norm() - 1.0).abs() > 1.0e-12 {
                return Err(Error::InvalidInput("parameter a must be unimodular".into()));
            }
            let dist = spectrum
                .iter()
                .fold(f64::INFINITY, |m, l| m.min((a - l).norm()));
            if dist <= 1.0e-10 {
                return Err(Error::NoAdmissibleParameter(
                    "the supplied a lies in the spectrum of A".into(),
                ));
            }
            a
        }
        None => best_unimodular(&spectrum, |a| a)?,
    };
    let resolvent = linalg::checked_inverse(
        &(CMat::identity(r, r) - a_mat.adjoint() * a),
    )
    .map_err(|_| Error::NoAdmissibleParameter("I − aA* is singular".into()))?;
    let d_a = CMat::identity(q, q) - c * h_inv.to_full() * &resolvent * c.adjoint() * j;
    let b_a = -(h_inv.to_full() * a_inv.adjoint() * c.adjoint() * j * &d_a);
    let node = GrNode::new(n_vars, dims.to_vec(), a_mat.clone(), b_a, c.clone(), d_a)?;
    let certificate = associated_h_circle(&node, j, tol)?;
    let h_dist = (certificate.h.h().to_full() - solution.h.to_full()).norm();
    if h_dist > 1.0e-8 * solution.h.norm().max(1.0) {
        return Err(Error::Numerical(
            "certificate disagrees with the Stein solution used for the completion".into(),
        ));
    }
    Ok((node, certificate))
}

/// Completes controllable input data `(A, B)` with invertible `A` to a
/// minimal matrix-J-unitary series on the circle (dual of
/// [`complete_from_ca_circle`], computed on the adjoint data: the dual
/// Stein identity `G − AGA* = BJB*` is solved through the pair `(B*, A*)`
/// and the resulting node is adjoint-flipped back).  The parameter `a`,
/// when given, must be unimodular and avoid `σ(A)`.
pub fn complete_from_ab_circle(
    a_mat: &CMat,
    b: &CMat,
    dims: &[usize],
    j: &CMat,
    a_param: Option<Complex64>,
    tol: Option<f64>,
) -> Result<(GrNode, CircleCertificate)> {
    // σ(A*) is the conjugate of σ(A), so the adjoint route needs ā.
    let (beta, _) = complete_from_ca_circle(
        &b.adjoint(),
        &a_mat.adjoint(),
        dims,
        j,
        a_param.map(|a| a.conj()),
        tol,
    )
    .map_err(|e| match e {
        Error::NotMinimal(_) => {
            Error::NotMinimal(format!("(A, B) is not controllable: dims {dims:?}"))
        }
        other => other,
    })?;
    let node = beta.adjoint();
    let certificate = associated_h_circle(&node, j, tol)?;
    Ok((node, certificate))
}
