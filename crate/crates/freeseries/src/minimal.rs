//! Minimality analysis for structured realizations: truncated
//! observability/controllability stacks, Hankel matrices of a series,
//! structured reduction to a minimal node, uniqueness of the state-space
//! similarity between minimal nodes, and a sampling-based observability
//! witness.

use crate::error::{Error, Result};
use crate::fps::FpsTable;
use crate::grnode::GrNode;
use crate::linalg::{self, CMat};
use crate::sampling;
use crate::structured::BlockDiag;
use crate::words::{count_words_up_to, words_up_to, Word};

/// Hard cap on the number of words enumerated for a truncated stack or a
/// Hankel matrix, to keep accidental blow-ups (`N^{p·r}` growth) from
/// exhausting memory.
pub const WORD_BUDGET: usize = 200_000;

/// Relative residual accepted when certifying an intertwining similarity.
pub const SIMILARITY_RESIDUAL_TOL: f64 = 1.0e-9;

fn budgeted_words(n_vars: usize, max_len: usize) -> Result<Vec<Word>> {
    let count = count_words_up_to(n_vars, max_len);
    if count > WORD_BUDGET {
        return Err(Error::Numerical(format!(
            "word enumeration up to length {max_len} over {n_vars} letters needs \
             {count} words, above the budget of {WORD_BUDGET}"
        )));
    }
    Ok(words_up_to(n_vars, max_len))
}

/// Truncated observability stack for component `k` (0-based): the rows
/// `(C♭A)^{w g_{k+1}}` over all `|w| < p·r` in graded order, a
/// `(#words·p) × r_k` matrix.  Its rank equals the rank of the full
/// (infinite) observability map.
pub fn truncated_observability(node: &GrNode, k: usize) -> Result<CMat> {
    let bound = node.output_dim() * node.state_dim();
    let words = if bound == 0 {
        Vec::new()
    } else {
        budgeted_words(node.n_vars(), bound - 1)?
    };
    let blocks: Vec<CMat> = words.iter().map(|w| node.obs_chain(w, k)).collect();
    if blocks.is_empty() {
        return Ok(CMat::zeros(0, node.dims()[k]));
    }
    Ok(linalg::vcat(&blocks))
}

/// Truncated controllability row for component `k` (0-based): the columns
/// `(A♯B)^{g_{k+1} w^T}` over all `|w| < r·q` in graded order, an
/// `r_k × (#words·q)` matrix.
pub fn truncated_controllability(node: &GrNode, k: usize) -> Result<CMat> {
    let bound = node.state_dim() * node.input_dim();
    let words = if bound == 0 {
        Vec::new()
    } else {
        budgeted_words(node.n_vars(), bound - 1)?
    };
    let blocks: Vec<CMat> = words.iter().map(|w| node.ctrl_chain(k, w)).collect();
    if blocks.is_empty() {
        return Ok(CMat::zeros(node.dims()[k], 0));
    }
    Ok(linalg::hcat(&blocks))
}

/// Per-component ranks of the truncated observability stacks.
pub fn observability_ranks(node: &GrNode, tol: Option<f64>) -> Result<Vec<usize>> {
    (0..node.n_vars())
        .map(|k| Ok(linalg::numerical_rank(&truncated_observability(node, k)?, tol)))
        .collect()
}

/// Per-component ranks of the truncated controllability rows.
pub fn controllability_ranks(node: &GrNode, tol: Option<f64>) -> Result<Vec<usize>> {
    (0..node.n_vars())
        .map(|k| Ok(linalg::numerical_rank(&truncated_controllability(node, k)?, tol)))
        .collect()
}

/// Outcome of the minimality rank tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityReport {
    pub dims: Vec<usize>,
    pub observability_ranks: Vec<usize>,
    pub controllability_ranks: Vec<usize>,
    pub observable: bool,
    pub controllable: bool,
    pub minimal: bool,
}

/// Runs both rank tests: observable iff every observability rank equals the
/// component dimension, controllable dually, minimal iff both.
pub fn minimality_report(node: &GrNode, tol: Option<f64>) -> Result<MinimalityReport> {
    let obs = observability_ranks(node, tol)?;
    let ctrl = controllability_ranks(node, tol)?;
    let dims = node.dims().to_vec();
    let observable = obs.iter().zip(&dims).all(|(r, d)| r == d);
    let controllable = ctrl.iter().zip(&dims).all(|(r, d)| r == d);
    Ok(MinimalityReport {
        dims,
        observability_ranks: obs,
        controllability_ranks: ctrl,
        observable,
        controllable,
        minimal: observable && controllable,
    })
}

/// True iff every truncated observability stack has full column rank.
pub fn is_observable(node: &GrNode, tol: Option<f64>) -> Result<bool> {
    Ok(minimality_report(node, tol)?.observable)
}

/// True iff every truncated controllability row has full row rank.
pub fn is_controllable(node: &GrNode, tol: Option<f64>) -> Result<bool> {
    Ok(minimality_report(node, tol)?.controllable)
}

/// True iff the node is both observable and controllable.
pub fn is_minimal(node: &GrNode, tol: Option<f64>) -> Result<bool> {
    Ok(minimality_report(node, tol)?.minimal)
}

/// `k`-th Hankel matrix of a series (`k` 0-based): block rows indexed by
/// words `|w| ≤ row_deg`, block columns by `|w'| ≤ col_deg`, block entry
/// `f_{w g_{k+1} w'^T}`.  For a rational series its rank is the `k`-th
/// state dimension of any minimal realization.
///
/// # Errors
/// [`Error::InsufficientDegree`] unless `row_deg + 1 + col_deg ≤ deg f`.
pub fn hankel(f: &FpsTable, k: usize, row_deg: usize, col_deg: usize) -> Result<CMat> {
    if row_deg + 1 + col_deg > f.degree() {
        return Err(Error::InsufficientDegree(format!(
            "Hankel block degrees ({row_deg}, {col_deg}) need series degree ≥ {}, have {}",
            row_deg + 1 + col_deg,
            f.degree()
        )));
    }
    if k >= f.n_vars() {
        return Err(Error::InvalidWord(format!(
            "component {} of a series in {} letters",
            k + 1,
            f.n_vars()
        )));
    }
    let rows = budgeted_words(f.n_vars(), row_deg)?;
    let cols = budgeted_words(f.n_vars(), col_deg)?;
    if rows.len().saturating_mul(cols.len()) > WORD_BUDGET {
        return Err(Error::Numerical(format!(
            "Hankel matrix would have {}×{} blocks, above the budget",
            rows.len(),
            cols.len()
        )));
    }
    let (p, q) = (f.rows(), f.cols());
    let g = Word::generator(k as u32 + 1);
    let mut h = CMat::zeros(rows.len() * p, cols.len() * q);
    for (i, w) in rows.iter().enumerate() {
        let wg = w.concat(&g);
        for (j, w2) in cols.iter().enumerate() {
            let word = wg.concat(&w2.transpose());
            h.view_mut((i * p, j * q), (p, q))
                .copy_from(&f.coefficient(&word));
        }
    }
    Ok(h)
}

/// Ranks of the `N` Hankel matrices at the largest row/column degrees the
/// table supports (`row_deg = col_deg = (deg−1)/2`).  For a series expanded
/// far enough from a minimal node these are the minimal component
/// dimensions.
pub fn hankel_ranks(f: &FpsTable, tol: Option<f64>) -> Result<Vec<usize>> {
    if f.degree() == 0 {
        return Err(Error::InsufficientDegree(
            "Hankel ranks need a series of degree ≥ 1".into(),
        ));
    }
    let side = (f.degree() - 1) / 2;
    (0..f.n_vars())
        .map(|k| Ok(linalg::numerical_rank(&hankel(f, k, side, side)?, tol)))
        .collect()
}

/// Per-component change-of-basis data returned by [`reduce_to_minimal`]:
/// the reduced node is `(left·A·right, left·B, C·right, D)` blockwise,
/// with `left_k = right_k*` and `right_k` an isometric embedding of the
/// reduced component into the original one.
#[derive(Clone, Debug)]
pub struct CompressionMaps {
    pub left: Vec<CMat>,
    pub right: Vec<CMat>,
}

fn compress_by(node: &GrNode, bases: &[CMat]) -> Result<GrNode> {
    let n = node.n_vars();
    let dims: Vec<usize> = bases.iter().map(|q| q.ncols()).collect();
    let mut a_blocks: Vec<Vec<CMat>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(bases[k].adjoint() * node.a_block(k, j) * &bases[j]);
        }
        a_blocks.push(row);
    }
    let a = assemble_blocks(&dims, &a_blocks);
    let b = linalg::vcat(
        &(0..n)
            .map(|k| bases[k].adjoint() * node.b_block(k))
            .collect::<Vec<_>>(),
    );
    let c = linalg::hcat(
        &(0..n)
            .map(|j| node.c_block(j) * &bases[j])
            .collect::<Vec<_>>(),
    );
    GrNode::new(n, dims, a, b, c, node.d().clone())
}

fn assemble_blocks(dims: &[usize], blocks: &[Vec<CMat>]) -> CMat {
    let r: usize = dims.iter().sum();
    let mut a = CMat::zeros(r, r);
    let offset = |k: usize| -> usize { dims[..k].iter().sum() };
    for (k, row) in blocks.iter().enumerate() {
        for (j, blk) in row.iter().enumerate() {
            a.view_mut((offset(k), offset(j)), (dims[k], dims[j])).copy_from(blk);
        }
    }
    a
}

/// Residual of the invariance `span(Q_k)` ⊇ `A_{kj}·span(Q_j)` (and of the
/// anchor columns), used to validate each compression stage.
fn invariance_defect(node: &GrNode, bases: &[CMat], reachable_side: bool) -> f64 {
    let n = node.n_vars();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let proj = CMat::identity(node.dims()[k], node.dims()[k])
            - &bases[k] * bases[k].adjoint();
        if reachable_side {
            // A_{kj}·span(Q_j) ⊆ span(Q_k) and columns of B_k ⊆ span(Q_k).
            for j in 0..n {
                worst = worst.max((&proj * node.a_block(k, j) * &bases[j]).norm());
            }
            worst = worst.max((&proj * node.b_block(k)).norm());
        } else {
            // Dually on the row side: span(Q_k) ⊇ A*_{jk}·span(Q_j) and
            // the rows of C_k, i.e. the unobservable family is invariant.
            for j in 0..n {
                worst = worst.max((&proj * node.a_block(j, k).adjoint() * &bases[j]).norm());
            }
            worst = worst.max((&proj * node.c_block(k).adjoint()).norm());
        }
    }
    worst
}

fn scale_of(node: &GrNode) -> f64 {
    node.a()
        .norm()
        .max(node.b().norm())
        .max(node.c().norm())
        .max(1.0)
}

/// Compresses a node to a minimal one with the same transfer series.
///
/// Stage 1 restricts each component to the column span of its truncated
/// controllability row (the reachable family, which is block-invariant);
/// stage 2 then quotients the kernel of the truncated observability stack
/// (the unobservable family, also block-invariant) by restricting to its
/// orthogonal complement.  Both invariances are checked numerically and the
/// result is certified minimal.
///
/// Returns the reduced node together with the accumulated left/right
/// compression maps.
pub fn reduce_to_minimal(node: &GrNode, tol: Option<f64>) -> Result<(GrNode, CompressionMaps)> {
    let mut current = node.clone();
    let mut right: Vec<CMat> = node
        .dims()
        .iter()
        .map(|&d| CMat::identity(d, d))
        .collect();
    for _pass in 0..4 {
        // Stage 1: reachable restriction.
        let ctrl_bases: Vec<CMat> = (0..current.n_vars())
            .map(|k| {
                Ok(linalg::column_space_basis(
                    &truncated_controllability(&current, k)?,
                    tol,
                ))
            })
            .collect::<Result<_>>()?;
        let defect = invariance_defect(&current, &ctrl_bases, true);
        let allowed = 1.0e-7 * scale_of(&current);
        if defect > allowed {
            return Err(Error::Numerical(format!(
                "reachable family failed block-invariance: defect {defect:.3e} > {allowed:.3e}"
            )));
        }
        let reduced = compress_by(&current, &ctrl_bases)?;
        // Stage 2: observable quotient (restrict to the row space of the
        // observability stack).
        let obs_bases: Vec<CMat> = (0..reduced.n_vars())
            .map(|k| {
                Ok(linalg::column_space_basis(
                    &truncated_observability(&reduced, k)?.adjoint(),
                    tol,
                ))
            })
            .collect::<Result<_>>()?;
        let defect = invariance_defect(&reduced, &obs_bases, false);
        let allowed = 1.0e-7 * scale_of(&reduced);
        if defect > allowed {
            return Err(Error::Numerical(format!(
                "unobservable family failed block-invariance: defect {defect:.3e} > {allowed:.3e}"
            )));
        }
        let out = compress_by(&reduced, &obs_bases)?;
        right = (0..out.n_vars())
            .map(|k| &right[k] * &ctrl_bases[k] * &obs_bases[k])
            .collect();
        if minimality_report(&out, tol)?.minimal {
            let left: Vec<CMat> = right.iter().map(CMat::adjoint).collect();
            return Ok((out, CompressionMaps { left, right }));
        }
        current = out;
    }
    Err(Error::Numerical(
        "structured reduction did not reach a minimal node in 4 passes".into(),
    ))
}

/// Unique block-diagonal similarity between two minimal nodes with the same
/// transfer series: returns `T` with `A¹ = T^{-1}A²T`, `B¹ = T^{-1}B²`,
/// `C¹ = C²T`, computed per component as `T_k = (Õ_k²)⁺ Õ_k¹` and certified
/// by its intertwining residuals.
///
/// # Errors
/// [`Error::NotMinimal`] if either node fails the rank test;
/// [`Error::DimensionMismatch`] on incompatible shapes;
/// [`Error::Numerical`] when the transfer series differ or the residual is
/// above [`SIMILARITY_RESIDUAL_TOL`].
pub fn similarity_between(node1: &GrNode, node2: &GrNode, tol: Option<f64>) -> Result<BlockDiag> {
    if node1.n_vars() != node2.n_vars()
        || node1.dims() != node2.dims()
        || node1.output_dim() != node2.output_dim()
        || node1.input_dim() != node2.input_dim()
    {
        return Err(Error::DimensionMismatch(
            "similarity requires equal alphabets, dims and coefficient shapes".into(),
        ));
    }
    if !is_minimal(node1, tol)? {
        return Err(Error::NotMinimal("first node fails the rank test".into()));
    }
    if !is_minimal(node2, tol)? {
        return Err(Error::NotMinimal("second node fails the rank test".into()));
    }
    let r = node1.state_dim();
    let (p, q) = (node1.output_dim(), node1.input_dim());
    let match_degree = capped_degree(node1.n_vars(), p * r + r * q);
    let dist = node1.transfer_distance(node2, match_degree)?;
    let coeff_scale = node1.expand(match_degree).max_coefficient_norm().max(1.0);
    if dist > 1.0e-9 * coeff_scale {
        return Err(Error::Numerical(format!(
            "transfer series differ: distance {dist:.3e} through degree {match_degree}"
        )));
    }
    let mut blocks = Vec::with_capacity(node1.n_vars());
    for k in 0..node1.n_vars() {
        let o1 = truncated_observability(node1, k)?;
        let o2 = truncated_observability(node2, k)?;
        blocks.push(linalg::pseudo_inverse(&o2, tol) * o1);
    }
    let t = BlockDiag::from_blocks(blocks)?;
    let t_full = t.to_full();
    for blk in t.blocks() {
        linalg::checked_inverse(blk).map_err(|_| {
            Error::Numerical("similarity block is numerically singular".into())
        })?;
    }
    // Certify T A¹ = A² T, T B¹ = B², C¹ = C² T.
    let scale = |x: f64, y: f64| x.max(y).max(1.0);
    let ra = (&t_full * node1.a() - node2.a() * &t_full).norm()
        / scale(node1.a().norm() * t_full.norm(), node2.a().norm() * t_full.norm());
    let rb = (&t_full * node1.b() - node2.b()).norm()
        / scale(node1.b().norm() * t_full.norm(), node2.b().norm());
    let rc = (node1.c() - node2.c() * &t_full).norm()
        / scale(node1.c().norm(), node2.c().norm() * t_full.norm());
    let worst = ra.max(rb).max(rc);
    if worst > SIMILARITY_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "similarity intertwining residual {worst:.3e} above {SIMILARITY_RESIDUAL_TOL:.1e}"
        )));
    }
    Ok(t)
}

/// Largest degree `d ≤ target` whose word count stays within the
/// enumeration budget.
pub(crate) fn capped_degree(n_vars: usize, target: usize) -> usize {
    let mut count = 1usize; // the empty word
    let mut pow = 1usize;
    let mut d = 0usize;
    while d < target {
        pow = pow.saturating_mul(n_vars.max(1));
        count = count.saturating_add(pow);
        if count > WORD_BUDGET {
            break;
        }
        d += 1;
    }
    d
}

/// Sampling-based observability witness: draws `sample_count` tuples of
/// `n×n` matrices inside the evaluation domain, stacks the component-`k`
/// slices of `C(I − Δ(Z)A)^{-1}`, and returns an orthonormal basis of their
/// common kernel in `C^{r_k·n}`.  An empty basis is evidence that component
/// `k` is observable; the deterministic certificate remains the truncated
/// rank test.
pub fn obs_kernel_sample(
    node: &GrNode,
    k: usize,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> Result<CMat> {
    if n == 0 {
        return Err(Error::InvalidInput("evaluation size n must be ≥ 1".into()));
    }
    if k >= node.n_vars() {
        return Err(Error::InvalidInput(format!(
            "component {} of a node over {} letters",
            k + 1,
            node.n_vars()
        )));
    }
    let dim = node.dims()[k] * n;
    if dim == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let a_norm = linalg::spectral_norm(node.a());
    let eps = if a_norm == 0.0 { 1.0 } else { 1.0 / a_norm };
    let mut rng = sampling::rng_from_seed(seed);
    let mut slices: Vec<CMat> = Vec::with_capacity(sample_count);
    let mut attempts = 0usize;
    while slices.len() < sample_count && attempts < 10 * sample_count.max(1) {
        attempts += 1;
        let z = sampling::tuple_in_domain(&mut rng, node.n_vars(), n, eps);
        match node.obs_resolvent_slice(&z, k) {
            Ok(slice) => slices.push(slice),
            Err(_) => continue, // singular resolvent: draw another point
        }
    }
    if slices.is_empty() {
        return Err(Error::Numerical(
            "every sampled tuple made the resolvent singular".into(),
        ));
    }
    let stacked = linalg::vcat(&slices);
    Ok(linalg::null_space_basis(&stacked, None))
}
