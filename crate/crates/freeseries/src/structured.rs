//! Block-diagonal matrices respecting the state-space splitting, and the
//! structured Hermitian solvers built on them.
//!
//! A node's state space splits as `C^r = ⊕_k C^{r_k}`; similarity
//! transforms, the associated Hermitian certificates `H = diag(H_1,…,H_N)`,
//! and supporting projections all live in the algebra of block-diagonal
//! matrices for that splitting.  [`BlockDiag`] carries the blocks plus the
//! splitting so the structure can be validated once and trusted thereafter.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative tolerance for accepting a computed certificate as Hermitian:
/// `‖H − H*‖ ≤ 1e-8 · ‖H‖`.
pub const HERMITIAN_ACCEPT_TOL: f64 = 1.0e-8;

/// Relative residual at which structured Lyapunov/Stein identities are
/// accepted.
pub const STRUCTURED_RESIDUAL_TOL: f64 = 1.0e-9;

/// A block-diagonal matrix `diag(M_1, …, M_N)` with square blocks sized by
/// the state splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiag {
    blocks: Vec<CMat>,
}

impl BlockDiag {
    /// Wraps square blocks; block `k` acts on the `k`-th state component.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] if any block is not square.
    pub fn from_blocks(blocks: Vec<CMat>) -> Result<Self> {
        for (k, b) in blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "block {} is {}×{}, expected square",
                    k + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(BlockDiag { blocks })
    }

    /// Identity with the given splitting.
    pub fn identity(dims: &[usize]) -> Self {
        BlockDiag {
            blocks: dims.iter().map(|&d| CMat::identity(d, d)).collect(),
        }
    }

    /// Zero matrix with the given splitting.
    pub fn zeros(dims: &[usize]) -> Self {
        BlockDiag {
            blocks: dims.iter().map(|&d| CMat::zeros(d, d)).collect(),
        }
    }

    /// Number of components.
    pub fn n_components(&self) -> usize {
        self.blocks.len()
    }

    /// Block sizes per component.
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    /// Total size.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    /// The `k`-th block (0-based component index).
    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    /// All blocks.
    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// Assembles the full matrix.
    pub fn to_full(&self) -> CMat {
        linalg::block_diag(&self.blocks)
    }

    /// Blockwise adjoint.
    pub fn adjoint(&self) -> BlockDiag {
        BlockDiag {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// Blockwise negation.
    pub fn negate(&self) -> BlockDiag {
        BlockDiag {
            blocks: self.blocks.iter().map(|b| -b).collect(),
        }
    }

    /// Blockwise Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> BlockDiag {
        BlockDiag {
            blocks: self.blocks.iter().map(linalg::hermitian_part).collect(),
        }
    }

    /// Blockwise inverse.
    ///
    /// # Errors
    /// [`Error::Singular`] if any block fails the singularity check.
    pub fn inverse(&self) -> Result<BlockDiag> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            blocks.push(
                linalg::checked_inverse(b)
                    .map_err(|e| Error::Singular(format!("block {}: {e}", k + 1)))?,
            );
        }
        Ok(BlockDiag { blocks })
    }

    /// Blockwise product `self · other`.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] if the splittings differ.
    pub fn mul(&self, other: &BlockDiag) -> Result<BlockDiag> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(
                "block-diagonal product with different splittings".into(),
            ));
        }
        Ok(BlockDiag {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Frobenius norm of the whole matrix.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `true` if every block is Hermitian within the given relative
    /// tolerance (measured on the whole matrix).
    pub fn is_hermitian_within(&self, rel_tol: f64) -> bool {
        let defect: f64 = self
            .blocks
            .iter()
            .map(|b| (b - b.adjoint()).norm_squared())
            .sum::<f64>()
            .sqrt();
        defect <= rel_tol * self.norm().max(1.0e-300)
    }

    /// Splits a full matrix into the block-diagonal part for `dims`,
    /// discarding off-diagonal blocks.  Used to read back solutions from
    /// full-matrix computations that are known to be block-diagonal.
    pub fn diagonal_part_of(full: &CMat, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if full.nrows() != total || full.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "expected {total}×{total} matrix for splitting {dims:?}"
            )));
        }
        let mut blocks = Vec::with_capacity(dims.len());
        let mut off = 0;
        for &d in dims {
            blocks.push(full.view((off, off), (d, d)).into_owned());
            off += d;
        }
        Ok(BlockDiag { blocks })
    }

    /// Largest off-block-diagonal entry norm of a full matrix relative to
    /// its Frobenius norm; 0 means the matrix is exactly block-diagonal.
    pub fn off_diagonal_defect(full: &CMat, dims: &[usize]) -> f64 {
        let diag = match Self::diagonal_part_of(full, dims) {
            Ok(d) => d.to_full(),
            Err(_) => return f64::INFINITY,
        };
        (full - diag).norm() / full.norm().max(1.0e-300)
    }
}

/// Number of negative eigenvalues of each Hermitian block: the per-component
/// signature invariant of a classification certificate.
pub fn negative_squares(h: &BlockDiag) -> Vec<usize> {
    h.blocks()
        .iter()
        .map(|b| linalg::signature(b, None).1)
        .collect()
}

/// A block-diagonal Hermitian matrix together with its per-block signature —
/// the certificate attached to the classifications in this crate.
#[derive(Clone, Debug)]
pub struct StructuredHermitian {
    h: BlockDiag,
    signature: Vec<(usize, usize)>,
}

impl StructuredHermitian {
    /// Wraps a block-diagonal matrix after checking each block is Hermitian
    /// to `1e-10` relative; the (tiny) anti-Hermitian residue is dropped and
    /// per-block signatures are recorded.
    ///
    /// # Errors
    /// [`Error::Numerical`] if some block is not Hermitian within tolerance.
    pub fn new(h: BlockDiag) -> Result<Self> {
        let mut blocks = Vec::with_capacity(h.n_components());
        let mut signature = Vec::with_capacity(h.n_components());
        for (k, b) in h.blocks().iter().enumerate() {
            if !linalg::is_hermitian_within(b, 1.0e-10) {
                return Err(Error::Numerical(format!(
                    "component {} of a structured Hermitian matrix is not Hermitian",
                    k + 1
                )));
            }
            let sym = linalg::hermitian_part(b);
            let (plus, minus, _zero) = linalg::signature(&sym, None);
            signature.push((plus, minus));
            blocks.push(sym);
        }
        Ok(StructuredHermitian {
            h: BlockDiag::from_blocks(blocks)?,
            signature,
        })
    }

    /// The underlying block-diagonal matrix.
    pub fn h(&self) -> &BlockDiag {
        &self.h
    }

    /// Per-block `(n_plus, n_minus)` signature.
    pub fn signature(&self) -> &[(usize, usize)] {
        &self.signature
    }

    /// Number of negative eigenvalues of each block.
    pub fn negative_squares(&self) -> Vec<usize> {
        self.signature.iter().map(|&(_, m)| m).collect()
    }

    /// `true` when every block is invertible at the shared rank threshold.
    pub fn is_invertible(&self) -> bool {
        self.h.inverse().is_ok()
    }

    /// Blockwise inverse.
    ///
    /// # Errors
    /// [`Error::Singular`] when a block is numerically singular.
    pub fn inverse(&self) -> Result<BlockDiag> {
        self.h.inverse()
    }

    /// `true` when every block is positive definite
    /// (`λ_min > 1e-10 · λ_max`).
    pub fn is_positive_definite(&self) -> bool {
        self.h.blocks().iter().all(|b| linalg::is_positive_definite(b))
    }

    /// Dense form of the certificate.
    pub fn to_full(&self) -> CMat {
        self.h.to_full()
    }
}

/// The linear forms a structured Hermitian solve can target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuredForm {
    /// `A*H + HA = rhs` (continuous/line form).
    Sylvester,
    /// `H − A*HA = rhs` (discrete/circle form).
    Stein,
    /// `AG + GA* = rhs` (dual continuous form).
    SylvesterDual,
    /// `G − AGA* = rhs` (dual discrete form).
    SteinDual,
}

/// Applies the chosen form to a full Hermitian candidate.
fn apply_form(form: StructuredForm, a: &CMat, h: &CMat) -> CMat {
    match form {
        StructuredForm::Sylvester => a.adjoint() * h + h * a,
        StructuredForm::Stein => h - a.adjoint() * h * a,
        StructuredForm::SylvesterDual => a * h + h * a.adjoint(),
        StructuredForm::SteinDual => h - a * h * a.adjoint(),
    }
}

/// Real-parameter basis of the Hermitian block-diagonal matrices for a given
/// splitting: diagonal units, symmetric pairs, and antisymmetric-imaginary
/// pairs, component by component.
fn hermitian_basis(dims: &[usize]) -> Vec<BlockDiag> {
    let mut basis = Vec::new();
    for (k, &d) in dims.iter().enumerate() {
        for i in 0..d {
            for j in i..d {
                let mut with = |val_ij: Complex64, val_ji: Complex64| {
                    let mut blocks: Vec<CMat> =
                        dims.iter().map(|&m| CMat::zeros(m, m)).collect();
                    blocks[k][(i, j)] = val_ij;
                    if i != j {
                        blocks[k][(j, i)] = val_ji;
                    }
                    basis.push(BlockDiag { blocks });
                };
                if i == j {
                    with(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
                } else {
                    with(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
                    with(Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0));
                }
            }
        }
    }
    basis
}

/// Flattens a complex matrix into a real vector (re/im interleaved).
fn realify(m: &CMat) -> DVector<f64> {
    let mut v = DVector::zeros(2 * m.len());
    for (idx, z) in m.iter().enumerate() {
        v[2 * idx] = z.re;
        v[2 * idx + 1] = z.im;
    }
    v
}

/// Result of a structured Hermitian solve.
#[derive(Clone, Debug)]
pub struct StructuredSolution {
    /// The Hermitian block-diagonal solution.
    pub h: BlockDiag,
    /// Relative residual `‖L(H) − rhs‖ / scale` actually achieved.
    pub relative_residual: f64,
}

/// Solves a structured Lyapunov/Stein equation `L(H) = rhs` for a Hermitian
/// block-diagonal `H` with the splitting `dims`, taking the minimum-norm
/// least-squares solution over the Hermitian block-diagonal class.
///
/// The solution is accepted when the relative residual (against
/// `max(‖rhs‖, ‖A‖·‖H‖)`) is at most [`STRUCTURED_RESIDUAL_TOL`]; callers
/// that additionally need invertibility check it themselves.
///
/// # Errors
/// [`Error::Numerical`] if no Hermitian block-diagonal matrix satisfies the
/// equation at the required residual.
pub fn solve_structured(
    form: StructuredForm,
    a: &CMat,
    rhs: &CMat,
    dims: &[usize],
) -> Result<StructuredSolution> {
    let total: usize = dims.iter().sum();
    if a.nrows() != total || a.ncols() != total || rhs.nrows() != total || rhs.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "structured solve needs {total}×{total} matrices"
        )));
    }
    if total == 0 {
        return Ok(StructuredSolution {
            h: BlockDiag::from_blocks(dims.iter().map(|&d| CMat::zeros(d, d)).collect())?,
            relative_residual: 0.0,
        });
    }
    let basis = hermitian_basis(dims);
    let mut mat = DMatrix::zeros(2 * total * total, basis.len());
    for (col, e) in basis.iter().enumerate() {
        let image = apply_form(form, a, &e.to_full());
        mat.set_column(col, &realify(&image));
    }
    let rhs_vec = realify(rhs);
    let coeffs = linalg::min_norm_lstsq_real(&mat, &rhs_vec);

    let mut blocks: Vec<CMat> = dims.iter().map(|&d| CMat::zeros(d, d)).collect();
    for (c, e) in coeffs.iter().zip(&basis) {
        for (k, b) in e.blocks.iter().enumerate() {
            blocks[k] += b.scale(*c);
        }
    }
    let h = BlockDiag { blocks };
    let full = h.to_full();
    let residual = (apply_form(form, a, &full) - rhs).norm();
    let scale = rhs.norm().max(a.norm() * full.norm()).max(1.0e-300);
    let relative_residual = residual / scale;
    if relative_residual > STRUCTURED_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "structured solve left relative residual {relative_residual:.3e}"
        )));
    }
    Ok(StructuredSolution {
        h,
        relative_residual,
    })
}
