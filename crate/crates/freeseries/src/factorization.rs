//! Minimal factorization of rational series through invariant subspace
//! families: componentwise subspaces, skew projections supported on them,
//! compression of a node to a factor pair, and the J-unitary minimal
//! factorizations on the line and the circle.

use num_complex::Complex64;

use crate::circle::{self};
use crate::error::{Error, Result};
use crate::grnode::GrNode;
use crate::line::{self};
use crate::linalg::{self, CMat};
use crate::minimal;
use crate::structured::{BlockDiag, StructuredHermitian};

/// Tolerance for block-invariance residuals (relative to the data scale).
pub const INVARIANCE_TOL: f64 = 1.0e-10;

/// One subspace `M_k ⊆ C^{r_k}` per component, each given by a basis
/// matrix of full column rank.
#[derive(Clone, Debug)]
pub struct SubspaceFamily {
    bases: Vec<CMat>,
}

impl SubspaceFamily {
    /// Wraps per-component basis matrices; each must have full column rank.
    pub fn new(bases: Vec<CMat>) -> Result<Self> {
        for m in &bases {
            if m.ncols() > m.nrows() {
                return Err(Error::InvalidSubspace(
                    "more basis columns than ambient dimensions".into(),
                ));
            }
            if m.ncols() > 0 && linalg::numerical_rank(m, None) < m.ncols() {
                return Err(Error::InvalidSubspace(
                    "basis matrix is column-rank deficient".into(),
                ));
            }
        }
        Ok(Self { bases })
    }

    /// The zero family `M_k = {0}`.
    pub fn zero(dims: &[usize]) -> Self {
        Self {
            bases: dims.iter().map(|&r| CMat::zeros(r, 0)).collect(),
        }
    }

    /// The full family `M_k = C^{r_k}`.
    pub fn full(dims: &[usize]) -> Self {
        Self {
            bases: dims.iter().map(|&r| CMat::identity(r, r)).collect(),
        }
    }

    /// Number of components.
    pub fn n_components(&self) -> usize {
        self.bases.len()
    }

    /// Per-component subspace dimensions `m_k`.
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(CMat::ncols).collect()
    }

    /// Per-component ambient dimensions `r_k`.
    pub fn ambient_dims(&self) -> Vec<usize> {
        self.bases.iter().map(CMat::nrows).collect()
    }

    /// Total subspace dimension `Σ m_k`.
    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(CMat::ncols).sum()
    }

    /// Basis matrix of component `k` (0-based).
    pub fn basis(&self, k: usize) -> &CMat {
        &self.bases[k]
    }

    /// All basis matrices.
    pub fn bases(&self) -> &[CMat] {
        &self.bases
    }

    /// Orthogonal projector onto component `k` in the standard metric.
    pub fn orthogonal_projector(&self, k: usize) -> CMat {
        let m = &self.bases[k];
        if m.ncols() == 0 {
            return CMat::zeros(m.nrows(), m.nrows());
        }
        let q = linalg::column_space_basis(m, None);
        &q * q.adjoint()
    }
}

fn check_family_against(node: &GrNode, fam: &SubspaceFamily) -> Result<()> {
    if fam.ambient_dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "family ambient dimensions do not match the node".into(),
        ));
    }
    Ok(())
}

/// Invariance of a family under the block structure of a state matrix:
/// `A_{kj} col(M_j) ⊆ col(M_k)` for all `k, j`.
fn family_invariant_under(a: &CMat, dims: &[usize], fam: &SubspaceFamily) -> bool {
    let scale = a.norm().max(1.0);
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0usize, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let projectors: Vec<CMat> = (0..dims.len())
        .map(|k| fam.orthogonal_projector(k))
        .collect();
    for k in 0..dims.len() {
        for j in 0..dims.len() {
            if fam.basis(j).ncols() == 0 || dims[k] == 0 {
                continue;
            }
            let a_kj = a.view((offsets[k], offsets[j]), (dims[k], dims[j]));
            let image = a_kj * fam.basis(j);
            let defect = (&image - &projectors[k] * &image).norm();
            if defect > INVARIANCE_TOL * scale {
                return false;
            }
        }
    }
    true
}

/// `true` when `A_{kj} col(M_j) ⊆ col(M_k)` for all components, with the
/// residual after orthogonal projection at most `1e-10` times the scale.
pub fn is_block_a_invariant(node: &GrNode, fam: &SubspaceFamily) -> Result<bool> {
    check_family_against(node, fam)?;
    Ok(family_invariant_under(node.a(), node.dims(), fam))
}

/// Componentwise `H`-orthogonal companion: `M^{[⊥]}_k = ker(M_k* H_k)`.
pub fn h_orthogonal_complement(
    fam: &SubspaceFamily,
    h: &BlockDiag,
) -> Result<SubspaceFamily> {
    if fam.ambient_dims() != h.dims() {
        return Err(Error::DimensionMismatch(
            "family does not match the Hermitian matrix splitting".into(),
        ));
    }
    let mut bases = Vec::with_capacity(fam.n_components());
    for k in 0..fam.n_components() {
        let m = fam.basis(k);
        if m.ncols() == 0 {
            bases.push(CMat::identity(m.nrows(), m.nrows()));
        } else {
            bases.push(linalg::null_space_basis(&(m.adjoint() * h.block(k)), None));
        }
    }
    SubspaceFamily::new(bases)
}

/// `true` when every compressed Gram matrix `M_k* H_k M_k` is invertible.
pub fn is_nondegenerate(fam: &SubspaceFamily, h: &BlockDiag) -> Result<bool> {
    if fam.ambient_dims() != h.dims() {
        return Err(Error::DimensionMismatch(
            "family does not match the Hermitian matrix splitting".into(),
        ));
    }
    for k in 0..fam.n_components() {
        let m = fam.basis(k);
        let gram = m.adjoint() * h.block(k) * m;
        if linalg::checked_inverse(&gram).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The block projection with `ker Π_k = col(M_k)` and
/// `ran Π_k = col(Mperp_k)`; generally non-orthogonal.
///
/// # Errors
/// [`Error::InvalidSubspace`] unless the two families split every
/// component space into a direct sum.
pub fn supporting_projection(
    fam: &SubspaceFamily,
    famperp: &SubspaceFamily,
) -> Result<BlockDiag> {
    if fam.ambient_dims() != famperp.ambient_dims() {
        return Err(Error::DimensionMismatch(
            "families live in different ambient spaces".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(fam.n_components());
    for k in 0..fam.n_components() {
        let m = fam.basis(k);
        let mp = famperp.basis(k);
        let r = m.nrows();
        if m.ncols() + mp.ncols() != r {
            return Err(Error::InvalidSubspace(
                "family dimensions do not add up to the ambient dimension".into(),
            ));
        }
        let s = linalg::hcat(&[m.clone(), mp.clone()]);
        let s_inv = linalg::checked_inverse(&s).map_err(|_| {
            Error::InvalidSubspace("the two families do not span a direct sum".into())
        })?;
        let ranonly = linalg::hcat(&[CMat::zeros(r, m.ncols()), mp.clone()]);
        let pi = &ranonly * &s_inv;
        let defect = (&pi * &pi - &pi).norm();
        if defect > 1.0e-9 * (1.0 + pi.norm() * pi.norm()) {
            return Err(Error::Numerical(format!(
                "projection is not idempotent: defect {defect:.3e}"
            )));
        }
        blocks.push(pi);
    }
    BlockDiag::from_blocks(blocks)
}

/// Coordinates of the columns of `y` in the given basis (least squares;
/// callers guarantee the columns lie in the span).
pub(crate) fn coords_in(basis: &CMat, y: &CMat) -> Result<CMat> {
    if basis.ncols() == 0 {
        return Ok(CMat::zeros(0, y.ncols()));
    }
    Ok(linalg::lstsq(basis, y))
}

pub(crate) fn block_offsets(dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .scan(0usize, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect()
}

/// Compresses `A` blockwise onto the family (valid when the family is
/// block-A-invariant): entry block `(k, j)` is `coords_{M_k}(A_{kj} M_j)`.
pub(crate) fn compress_state(a: &CMat, dims: &[usize], fam: &SubspaceFamily) -> Result<CMat> {
    let offsets = block_offsets(dims);
    let m_dims = fam.dims();
    let m_offsets = block_offsets(&m_dims);
    let total: usize = m_dims.iter().sum();
    let mut out = CMat::zeros(total, total);
    for k in 0..dims.len() {
        for j in 0..dims.len() {
            if m_dims[k] == 0 || m_dims[j] == 0 {
                continue;
            }
            let a_kj = a.view((offsets[k], offsets[j]), (dims[k], dims[j]));
            let x = coords_in(fam.basis(k), &(a_kj * fam.basis(j)))?;
            out.view_mut((m_offsets[k], m_offsets[j]), (m_dims[k], m_dims[j]))
                .copy_from(&x);
        }
    }
    Ok(out)
}

/// Row `[C_1 M_1, …, C_N M_N]` of the output map restricted to the family.
pub(crate) fn restrict_output(node: &GrNode, fam: &SubspaceFamily) -> CMat {
    let pieces: Vec<CMat> = (0..node.n_vars())
        .map(|j| node.c_block(j) * fam.basis(j))
        .collect();
    linalg::hcat(&pieces)
}

/// Splits a node into two factors along a supporting projection pair:
/// the first factor lives on `col(M)` (the kernel of `Π`), the second on
/// `col(Mperp)` (its range), and `D = D1 · D2`.
///
/// The factors realize `D1 + C(I−ΔA)^{-1}Δ(I−Π)B D2^{-1}` and
/// `D2 + D1^{-1} C Π (I−ΔA)^{-1} Δ B`; their product is verified against
/// the node's expansion.
pub fn project_factors(
    node: &GrNode,
    fam: &SubspaceFamily,
    famperp: &SubspaceFamily,
    d1: &CMat,
    d2: &CMat,
) -> Result<(GrNode, GrNode)> {
    check_family_against(node, fam)?;
    check_family_against(node, famperp)?;
    let (p, q) = (node.output_dim(), node.input_dim());
    if p != q {
        return Err(Error::DimensionMismatch(
            "factorization needs a square series".into(),
        ));
    }
    if d1.nrows() != p || d1.ncols() != p || d2.nrows() != p || d2.ncols() != p {
        return Err(Error::DimensionMismatch(
            "constant factors must be square of the output size".into(),
        ));
    }
    let d_scale = node.d().norm().max(1.0);
    if (d1 * d2 - node.d()).norm() > 1.0e-9 * d_scale {
        return Err(Error::InvalidInput(
            "constant factors do not multiply to the node constant".into(),
        ));
    }
    let d1_inv = linalg::checked_inverse(d1)?;
    let d2_inv = linalg::checked_inverse(d2)?;

    // The pair must be supporting: kernel family invariant under A, range
    // family invariant under the state matrix of the inverse.
    if !family_invariant_under(node.a(), node.dims(), fam) {
        return Err(Error::InvalidSubspace(
            "kernel family is not invariant under the state matrix".into(),
        ));
    }
    let associated = node.associated()?;
    if !family_invariant_under(associated.a(), node.dims(), famperp) {
        return Err(Error::InvalidSubspace(
            "range family is not invariant under the inverse state matrix".into(),
        ));
    }
    let pi = supporting_projection(fam, famperp)?;
    let n = node.n_vars();

    // First factor: restriction to col(M).
    let a1 = compress_state(node.a(), node.dims(), fam)?;
    let m_dims = fam.dims();
    let mut b1_rows = Vec::with_capacity(n);
    for k in 0..n {
        let eye = CMat::identity(node.dims()[k], node.dims()[k]);
        let complement = (eye - pi.block(k)) * node.b_block(k) * &d2_inv;
        b1_rows.push(coords_in(fam.basis(k), &complement)?);
    }
    let b1 = linalg::vcat(&b1_rows);
    let c1 = restrict_output(node, fam);
    let first = GrNode::new(n, m_dims, a1, b1, c1, d1.clone())?;

    // Second factor: compression of Π·A to col(Mperp).
    let offsets = block_offsets(node.dims());
    let mp_dims = famperp.dims();
    let mp_offsets = block_offsets(&mp_dims);
    let total: usize = mp_dims.iter().sum();
    let mut a2 = CMat::zeros(total, total);
    for k in 0..n {
        for j in 0..n {
            if mp_dims[k] == 0 || mp_dims[j] == 0 {
                continue;
            }
            let a_kj = node
                .a()
                .view((offsets[k], offsets[j]), (node.dims()[k], node.dims()[j]));
            let image = pi.block(k) * a_kj * famperp.basis(j);
            let x = coords_in(famperp.basis(k), &image)?;
            a2.view_mut((mp_offsets[k], mp_offsets[j]), (mp_dims[k], mp_dims[j]))
                .copy_from(&x);
        }
    }
    let mut b2_rows = Vec::with_capacity(n);
    for k in 0..n {
        let image = pi.block(k) * node.b_block(k);
        b2_rows.push(coords_in(famperp.basis(k), &image)?);
    }
    let b2 = linalg::vcat(&b2_rows);
    let c2_pieces: Vec<CMat> = (0..n)
        .map(|j| &d1_inv * node.c_block(j) * famperp.basis(j))
        .collect();
    let c2 = linalg::hcat(&c2_pieces);
    let second = GrNode::new(n, mp_dims, a2, b2, c2, d2.clone())?;

    // The product must reproduce the node's series.
    let product = first.product(&second)?;
    let degree = minimal::capped_degree(
        n,
        node.state_dim() * (p + q) + 1,
    );
    let dist = node.transfer_distance(&product, degree)?;
    let scale = coefficient_scale(node, degree);
    if dist > 1.0e-9 * scale {
        return Err(Error::Numerical(format!(
            "factor product deviates from the series by {dist:.3e}"
        )));
    }
    Ok((first, second))
}

fn coefficient_scale(node: &GrNode, degree: usize) -> f64 {
    node.expand(degree)
        .terms()
        .map(|(_, m)| m.norm())
        .fold(1.0f64, f64::max)
}

fn constant_is_j_unitary(d: &CMat, j: &CMat) -> bool {
    (d * j * d.adjoint() - j).norm() <= 1.0e-9 * j.norm().max(1.0)
}

/// Minimal J-unitary factorization on the line over an A-invariant,
/// H-nondegenerate family.  `d_split` defaults to `(D, I)`; both parts
/// must be J-unitary constants.
///
/// Both factors are re-certified as matrix-J-unitary on the line.
pub fn minimal_junitary_factorize_line(
    node: &GrNode,
    j: &CMat,
    fam: &SubspaceFamily,
    d_split: Option<(CMat, CMat)>,
) -> Result<(GrNode, GrNode)> {
    check_family_against(node, fam)?;
    let cert = line::associated_h_line(node, j, None)?;
    if !is_block_a_invariant(node, fam)? {
        return Err(Error::InvalidSubspace(
            "family is not invariant under the state matrix".into(),
        ));
    }
    if !is_nondegenerate(fam, cert.h.h())? {
        return Err(Error::InvalidSubspace(
            "family is degenerate in the associated inner product".into(),
        ));
    }
    let famperp = h_orthogonal_complement(fam, cert.h.h())?;
    let (d1, d2) = d_split.unwrap_or_else(|| {
        (
            node.d().clone(),
            CMat::identity(node.input_dim(), node.input_dim()),
        )
    });
    if !constant_is_j_unitary(&d1, j) || !constant_is_j_unitary(&d2, j) {
        return Err(Error::InvalidInput(
            "constant factors must be J-unitary".into(),
        ));
    }
    let (first, second) = project_factors(node, fam, &famperp, &d1, &d2)?;
    for factor in [&first, &second] {
        let verdict = line::is_matrix_j_unitary_line(factor, j, None)?;
        if !verdict.holds {
            return Err(Error::Numerical(
                "constructed factor failed the line certification".into(),
            ));
        }
    }
    Ok((first, second))
}

/// Minimal J-unitary factorization on the circle.  The first constant is
/// `D1 = I − C1 H1^{-1} (I − a A1*)^{-1} C1* J` built from the restriction
/// `(C1, A1, H1)` of the data to the family, with `a` unimodular in the
/// resolvent set of `A1` (chosen automatically when not supplied);
/// `D2 = D1^{-1} D`.
pub fn minimal_junitary_factorize_circle(
    node: &GrNode,
    j: &CMat,
    fam: &SubspaceFamily,
    a_param: Option<Complex64>,
) -> Result<(GrNode, GrNode)> {
    check_family_against(node, fam)?;
    let cert = circle::associated_h_circle(node, j, None)?;
    linalg::checked_inverse(node.d())?;
    if !is_block_a_invariant(node, fam)? {
        return Err(Error::InvalidSubspace(
            "family is not invariant under the state matrix".into(),
        ));
    }
    if !is_nondegenerate(fam, cert.h.h())? {
        return Err(Error::InvalidSubspace(
            "family is degenerate in the associated inner product".into(),
        ));
    }
    let famperp = h_orthogonal_complement(fam, cert.h.h())?;

    // Restricted data on the family: A1 (compressed state), C1, H1.
    let a1 = compress_state(node.a(), node.dims(), fam)?;
    let c1 = restrict_output(node, fam);
    let h1_blocks: Vec<CMat> = (0..node.n_vars())
        .map(|k| fam.basis(k).adjoint() * cert.h.h().block(k) * fam.basis(k))
        .collect();
    let h1 = BlockDiag::from_blocks(h1_blocks)?;
    let h1_inv = h1.inverse()?;

    let q = node.input_dim();
    let d1 = if fam.total_dim() == 0 {
        CMat::identity(q, q)
    } else {
        let spectrum = linalg::eigenvalues(&a1)?;
        let a = match a_param {
            Some(a) => {
                if (a.norm() - 1.0).abs() > 1.0e-12 {
                    return Err(Error::InvalidInput(
                        "the circle parameter must be unimodular".into(),
                    ));
                }
                let scale = spectrum.iter().fold(1.0f64, |m, l| m.max(l.norm()));
                if spectrum.iter().any(|l| (a - l).norm() <= 1.0e-10 * scale) {
                    return Err(Error::NoAdmissibleParameter(
                        "the circle parameter lies in the spectrum of the restricted state"
                            .into(),
                    ));
                }
                a
            }
            None => circle::best_unimodular(&spectrum, |a| a)?,
        };
        let m = fam.total_dim();
        let resolvent = linalg::checked_inverse(
            &(CMat::identity(m, m) - a1.adjoint() * a),
        )
        .map_err(|_| {
            Error::NoAdmissibleParameter(
                "the chosen parameter makes the restricted resolvent singular".into(),
            )
        })?;
        CMat::identity(q, q) - &c1 * h1_inv.to_full() * resolvent * c1.adjoint() * j
    };
    let d1_inv = linalg::checked_inverse(&d1)?;
    let d2 = &d1_inv * node.d();

    let (first, second) = project_factors(node, fam, &famperp, &d1, &d2)?;
    for factor in [&first, &second] {
        let verdict = circle::is_matrix_j_unitary_circle(factor, j, None)?;
        if !verdict.holds {
            return Err(Error::Numerical(
                "constructed factor failed the circle certification".into(),
            ));
        }
    }
    Ok((first, second))
}

/// A candidate family together with its degeneracy tag.
#[derive(Clone, Debug)]
pub struct TaggedFamily {
    /// The invariant family.
    pub family: SubspaceFamily,
    /// Whether all compressed Gram matrices are invertible.
    pub nondegenerate: bool,
}

const ENUMERATION_BUDGET: usize = 4096;
const ENUMERATION_SEED: u64 = 0x1234;

fn subsets_of(r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r >= usize::BITS as usize {
        return out;
    }
    for mask in 0usize..(1 << r) {
        out.push((0..r).filter(|i| mask & (1 << i) != 0).collect());
    }
    out.sort_by_key(Vec::len);
    out
}

fn coordinate_basis(r: usize, cols: &[usize]) -> CMat {
    let mut m = CMat::zeros(r, cols.len());
    for (idx, &c) in cols.iter().enumerate() {
        m[(c, idx)] = linalg::re(1.0);
    }
    m
}

fn family_projector_stack(fam: &SubspaceFamily) -> Vec<CMat> {
    (0..fam.n_components())
        .map(|k| fam.orthogonal_projector(k))
        .collect()
}

fn same_family(a: &[CMat], b: &[CMat]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() <= 1.0e-8 * (1.0 + x.norm()))
}

/// Heuristic search for block-A-invariant families: all coordinate
/// families (within a fixed budget) plus families spanned by joint
/// eigenvectors of the maps `A·P_k`.  Every returned family passes
/// [`is_block_a_invariant`]; each is tagged (non)degenerate w.r.t. `H`.
pub fn enumerate_invariant_families(
    node: &GrNode,
    h: &StructuredHermitian,
    max_results: usize,
) -> Result<Vec<TaggedFamily>> {
    if h.h().dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "certificate splitting does not match the node".into(),
        ));
    }
    let dims = node.dims().to_vec();
    let mut found: Vec<(Vec<CMat>, SubspaceFamily)> = Vec::new();
    let consider = |fam: SubspaceFamily,
                    found: &mut Vec<(Vec<CMat>, SubspaceFamily)>|
     -> Result<()> {
        if found.len() >= max_results {
            return Ok(());
        }
        if !is_block_a_invariant(node, &fam)? {
            return Ok(());
        }
        let stack = family_projector_stack(&fam);
        if found.iter().any(|(s, _)| same_family(s, &stack)) {
            return Ok(());
        }
        found.push((stack, fam));
        Ok(())
    };

    // (i) Coordinate families, graded by total dimension.
    let per_component: Vec<Vec<Vec<usize>>> = dims.iter().map(|&r| subsets_of(r)).collect();
    let total: usize = per_component
        .iter()
        .map(Vec::len)
        .try_fold(1usize, |acc, l| acc.checked_mul(l))
        .unwrap_or(usize::MAX);
    if total <= ENUMERATION_BUDGET {
        let mut all: Vec<Vec<&Vec<usize>>> = vec![Vec::new()];
        for options in &per_component {
            let mut next = Vec::with_capacity(all.len() * options.len());
            for prefix in &all {
                for opt in options {
                    let mut row = prefix.clone();
                    row.push(opt);
                    next.push(row);
                }
            }
            all = next;
        }
        all.sort_by_key(|row| row.iter().map(|cols| cols.len()).sum::<usize>());
        for row in all {
            let bases: Vec<CMat> = row
                .iter()
                .zip(&dims)
                .map(|(cols, &r)| coordinate_basis(r, cols))
                .collect();
            consider(SubspaceFamily::new(bases)?, &mut found)?;
        }
    } else {
        // Too many subsets: keep only the two trivial families.
        consider(SubspaceFamily::zero(&dims), &mut found)?;
        consider(SubspaceFamily::full(&dims), &mut found)?;
    }

    // (ii) Families spanned by joint eigenvectors of the maps A·P_k.
    if node.state_dim() > 0 {
        let report = line::joint_spectrum_report(node, h, false, ENUMERATION_SEED)?;
        let offsets = block_offsets(&dims);
        for ev in &report.eigenvectors {
            let mut bases = Vec::with_capacity(dims.len());
            for k in 0..dims.len() {
                let piece = ev.vector.rows(offsets[k], dims[k]).into_owned();
                if piece.norm() > 1.0e-10 {
                    bases.push(CMat::from_column_slice(
                        dims[k],
                        1,
                        piece.as_slice(),
                    ));
                } else {
                    bases.push(CMat::zeros(dims[k], 0));
                }
            }
            consider(SubspaceFamily::new(bases)?, &mut found)?;
        }
    }

    let mut out = Vec::with_capacity(found.len());
    for (_, fam) in found {
        let nondegenerate = is_nondegenerate(&fam, h.h())?;
        out.push(TaggedFamily {
            family: fam,
            nondegenerate,
        });
    }
    Ok(out)
}
