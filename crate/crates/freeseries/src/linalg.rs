//! Dense complex linear-algebra helpers.
//!
//! Thin, contract-bearing wrappers around `nalgebra` for the operations the
//! rest of the crate needs: numerical rank with a single shared tolerance
//! rule, pseudo-inverses, orthonormal column/null space bases, Hermitian
//! eigenwork, and least-squares solves.  Keeping them here means every rank
//! decision in the crate uses the same threshold.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

/// Shorthand for a complex scalar.
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real scalar as a complex number.
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.norm()
}

/// Spectral norm (largest singular value); 0 for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values()[0]
}

/// Default rank tolerance: `max(rows, cols) · ε · σ_max`.
///
/// This is the standard SVD-based threshold; every rank decision in the
/// crate goes through it unless the caller overrides the tolerance.
pub fn rank_tolerance(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sigma_max = spectral_norm(m);
    (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * sigma_max
}

/// Numerical rank via singular values.
///
/// `tol_override`, if given, replaces the default [`rank_tolerance`].
pub fn numerical_rank(m: &CMat, tol_override: Option<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let tol = tol_override.unwrap_or_else(|| rank_tolerance(m));
    sv.iter().filter(|&&s| s > tol).count()
}

/// Moore–Penrose pseudo-inverse via SVD with the shared rank tolerance.
pub fn pseudo_inverse(m: &CMat, tol_override: Option<f64>) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMat::zeros(cols, rows);
    }
    let tol = tol_override.unwrap_or_else(|| rank_tolerance(m));
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    // Thin SVD: u is rows×k, vt is k×cols with k = min(rows, cols).
    let k = svd.singular_values.len();
    let mut sinv = CMat::zeros(k, k);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            sinv[(i, i)] = re(1.0 / s);
        }
    }
    vt.adjoint() * sinv * u.adjoint()
}

/// Orthonormal basis of the column space (left singular vectors above the
/// rank tolerance).  Returns an `m.nrows() × rank` matrix.
pub fn column_space_basis(m: &CMat, tol_override: Option<f64>) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let tol = tol_override.unwrap_or_else(|| rank_tolerance(m));
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    u.columns(0, rank).into_owned()
}

/// Orthonormal basis of the (right) null space.  Returns an
/// `m.ncols() × (ncols − rank)` matrix.
pub fn null_space_basis(m: &CMat, tol_override: Option<f64>) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(cols, cols);
    }
    let tol = tol_override.unwrap_or_else(|| rank_tolerance(m));
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if vt.nrows() == cols {
        vt.rows(rank, cols - rank).adjoint().into_owned()
    } else {
        // Wide matrix: the thin SVD only returns min(rows, cols) right
        // singular vectors, so build the null space as the orthogonal
        // complement of the row space via the projector I − m⁺m (whose
        // singular values are exactly 0 and 1).
        let proj = pseudo_inverse(m, Some(tol)) * m;
        let complement = CMat::identity(cols, cols) - proj;
        column_space_basis(&complement, Some(0.5))
    }
}

/// `true` if `‖m − m*‖_F ≤ rel_tol · max(‖m‖_F, floor)`.
pub fn is_hermitian_within(m: &CMat, rel_tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let defect = (m - m.adjoint()).norm();
    defect <= rel_tol * m.norm().max(1.0e-300)
}

/// Hermitian part `(m + m*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with `m = V diag(λ) V*`.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), CMat::zeros(0, 0));
    }
    let se = nalgebra::SymmetricEigen::new(m.clone());
    // Sort ascending for determinism.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (new_col, &old_col) in idx.iter().enumerate() {
        vecs.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    (vals, vecs)
}

/// Signature `(n_plus, n_minus, n_zero)` of a Hermitian matrix, counting
/// eigenvalues against `tol` (default: `dim · ε · max |λ|`).
pub fn signature(m: &CMat, tol_override: Option<f64>) -> (usize, usize, usize) {
    let (vals, _) = hermitian_eigen(&hermitian_part(m));
    let max_abs = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let tol =
        tol_override.unwrap_or_else(|| (m.nrows().max(1) as f64) * f64::EPSILON * max_abs);
    let plus = vals.iter().filter(|&&v| v > tol).count();
    let minus = vals.iter().filter(|&&v| v < -tol).count();
    (plus, minus, vals.len() - plus - minus)
}

/// Hermitian square root of a positive semidefinite matrix.
///
/// # Errors
/// Fails if an eigenvalue is below `-tol` with `tol = dim·ε·max|λ|·16`.
pub fn hermitian_sqrt(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(m);
    let max_abs = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let tol = (m.nrows().max(1) as f64) * f64::EPSILON * max_abs * 16.0;
    let mut d = CMat::zeros(vals.len(), vals.len());
    for (i, &v) in vals.iter().enumerate() {
        if v < -tol {
            return Err(Error::Numerical(format!(
                "matrix is not positive semidefinite (eigenvalue {v:.3e})"
            )));
        }
        d[(i, i)] = re(v.max(0.0).sqrt());
    }
    Ok(&vecs * d * vecs.adjoint())
}

/// Inverse of the Hermitian square root of a positive definite matrix.
///
/// # Errors
/// Fails unless all eigenvalues satisfy `λ_min > 1e-10 · λ_max` (the crate's
/// positive-definiteness threshold).
pub fn hermitian_inv_sqrt(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(m);
    let max = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut d = CMat::zeros(vals.len(), vals.len());
    for (i, &v) in vals.iter().enumerate() {
        if v <= 1.0e-10 * max || v <= 0.0 {
            return Err(Error::Numerical(format!(
                "matrix is not numerically positive definite (eigenvalue {v:.3e})"
            )));
        }
        d[(i, i)] = re(1.0 / v.sqrt());
    }
    Ok(&vecs * d * vecs.adjoint())
}

/// `true` if the Hermitian matrix is numerically positive definite
/// (`λ_min > 1e-10 · λ_max`, and strictly positive).
pub fn is_positive_definite(m: &CMat) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    let (vals, _) = hermitian_eigen(m);
    let max = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    vals.iter().all(|&v| v > 1.0e-10 * max && v > 0.0)
}

/// Matrix inverse with a relative singularity check
/// (`σ_min ≥ 1e-12 · σ_max`).
///
/// # Errors
/// [`Error::Singular`] when the matrix fails the check or is not square.
pub fn checked_inverse(m: &CMat) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of a {}×{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let sv = m.clone().singular_values();
    let smax = sv[0];
    let smin = sv[sv.len() - 1];
    if smax == 0.0 || smin < 1.0e-12 * smax {
        return Err(Error::Singular(format!(
            "σ_min/σ_max = {:.3e}",
            if smax == 0.0 { 0.0 } else { smin / smax }
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("LU inversion failed".into()))
}

/// Least-squares solve `argmin ‖a x − b‖` via the pseudo-inverse (minimum
/// norm solution among minimizers); `x` has shape `a.ncols() × b.ncols()`.
pub fn lstsq(a: &CMat, b: &CMat) -> CMat {
    pseudo_inverse(a, None) * b
}

/// Minimum-norm least-squares solution of a *real* system.
pub fn min_norm_lstsq_real(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let tol = (a.nrows().max(a.ncols()) as f64) * f64::EPSILON * svd.singular_values[0];
    svd.solve(b, tol).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigenvalues of a general complex square matrix.
///
/// # Errors
/// [`Error::Numerical`] if the QR iteration fails to converge.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}×{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(1.0e-14, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let t = schur.unpack().1;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Builds a block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all blocks must share a row count.
pub fn hcat(blocks: &[CMat]) -> CMat {
    if blocks.is_empty() {
        return CMat::zeros(0, 0);
    }
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hcat row mismatch");
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks must share a column count.
pub fn vcat(blocks: &[CMat]) -> CMat {
    if blocks.is_empty() {
        return CMat::zeros(0, 0);
    }
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vcat column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Checks that `j` is a signature matrix: Hermitian with `j² = I`.
pub fn check_signature_matrix(j: &CMat) -> Result<()> {
    if j.nrows() != j.ncols() {
        return Err(Error::InvalidSignature("not square".into()));
    }
    if j.nrows() == 0 {
        return Ok(());
    }
    let herm = (j - j.adjoint()).norm();
    let invol = (j * j - CMat::identity(j.nrows(), j.ncols())).norm();
    let scale = j.norm().max(1.0);
    if herm > 1.0e-12 * scale || invol > 1.0e-12 * scale.powi(2) {
        return Err(Error::InvalidSignature(format!(
            "‖J−J*‖={herm:.3e}, ‖J²−I‖={invol:.3e}"
        )));
    }
    Ok(())
}
