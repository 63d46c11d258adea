//! Reproducing-kernel side of the theory: backward shifts, the
//! coefficient kernels attached to a J-unitary series (computed by three
//! independent routes — realization chains, series coefficients, and a
//! formal-derivative pencil), Gram/signature reports, and the model
//! realization acting by backward shifts on kernel spaces.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fps::FpsTable;
use crate::grnode::GrNode;
use crate::line;
use crate::linalg::{self, CMat, CVec};
use crate::minimal::{self, WORD_BUDGET};
use crate::structured::{BlockDiag, StructuredHermitian};
use crate::words::{count_words_up_to, words_of_length, words_up_to, Word};

/// Coefficient table of a kernel `K^{F,k}`: one `q×q` matrix per word
/// pair `(w, w')` with `|w|, |w'| ≤ degree`, Hermitian-symmetric in the
/// sense `K_{w,w'} = (K_{w',w})*`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    component: usize,
    degree: usize,
    rows: usize,
    entries: BTreeMap<(Word, Word), CMat>,
}

impl KernelTable {
    /// Wraps computed entries, validating sizes and Hermitian symmetry
    /// (`1e-10` relative — a table that fails this does not come from a
    /// J-unitary series).
    pub fn new(
        component: usize,
        degree: usize,
        rows: usize,
        entries: BTreeMap<(Word, Word), CMat>,
    ) -> Result<Self> {
        let mut scale: f64 = 1.0;
        for ((w, w2), m) in &entries {
            if m.nrows() != rows || m.ncols() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "kernel entry at ({w}, {w2}) is {}×{}, expected {rows}×{rows}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            scale = scale.max(m.norm());
        }
        let table = Self {
            component,
            degree,
            rows,
            entries,
        };
        let defect = table.hermitian_defect();
        if defect > 1.0e-10 * scale {
            return Err(Error::Numerical(format!(
                "kernel table is not Hermitian-symmetric: defect {defect:.3e}"
            )));
        }
        Ok(table)
    }

    /// 0-based component index `k`.
    pub fn component(&self) -> usize {
        self.component
    }

    /// Largest word length covered.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Size of each coefficient matrix.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Entry `K_{w,w'}` (zero when absent from the table).
    pub fn entry(&self, w: &Word, w2: &Word) -> CMat {
        self.entries
            .get(&(w.clone(), w2.clone()))
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.rows, self.rows))
    }

    /// Iterates over the stored entries in graded order.
    pub fn iter(&self) -> impl Iterator<Item = (&(Word, Word), &CMat)> {
        self.entries.iter()
    }

    /// `max ‖K_{w,w'} − (K_{w',w})*‖` over stored pairs.
    pub fn hermitian_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for ((w, w2), m) in &self.entries {
            let mirror = self.entry(w2, w);
            defect = defect.max((m - mirror.adjoint()).norm());
        }
        defect
    }

    /// Largest entrywise distance to another table over the union of
    /// stored pairs.
    pub fn max_distance(&self, other: &KernelTable) -> Result<f64> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(
                "kernel tables have different coefficient sizes".into(),
            ));
        }
        let mut dist: f64 = 0.0;
        for ((w, w2), m) in &self.entries {
            dist = dist.max((m - other.entry(w, w2)).norm());
        }
        for ((w, w2), m) in &other.entries {
            if !self.entries.contains_key(&(w.clone(), w2.clone())) {
                dist = dist.max(m.norm());
            }
        }
        Ok(dist)
    }
}

fn kernel_pair_budget(n_vars: usize, degree: usize) -> Result<Vec<Word>> {
    let count = count_words_up_to(n_vars, degree);
    if count.checked_mul(count).is_none_or(|c| c > WORD_BUDGET) {
        return Err(Error::InvalidInput(format!(
            "kernel table to degree {degree} over {n_vars} letters needs {count}² \
             entries, above the budget of {WORD_BUDGET}"
        )));
    }
    Ok(words_up_to(n_vars, degree))
}

/// Backward shift `(R_k f)_w = f_{w g_k}` (0-based `k`); the degree drops
/// by one.
pub fn backward_shift(f: &FpsTable, k: usize) -> Result<FpsTable> {
    if k >= f.n_vars() {
        return Err(Error::InvalidInput(format!(
            "component {k} outside 0..{}",
            f.n_vars()
        )));
    }
    let letter = k as u32 + 1;
    let degree = f.degree().saturating_sub(1);
    let mut out = FpsTable::zero(f.n_vars(), f.rows(), f.cols(), degree);
    for (w, m) in f.terms() {
        if let Some((&last, head)) = w.letters().split_last() {
            if last == letter {
                out.set_coefficient(
                    Word::from_letters_unchecked(head.to_vec()),
                    m.clone(),
                )?;
            }
        }
    }
    Ok(out)
}

/// Kernel coefficients from a realization with its certificate:
/// `K_{w,w'} = (C♭A)^{w g_k} H_k^{-1} [(C♭A)^{w' g_k}]*`.
pub fn kernel_from_node(
    node: &GrNode,
    h: &StructuredHermitian,
    k: usize,
    degree: usize,
) -> Result<KernelTable> {
    if k >= node.n_vars() {
        return Err(Error::InvalidInput(format!(
            "component {k} outside 0..{}",
            node.n_vars()
        )));
    }
    if h.h().dims() != node.dims() {
        return Err(Error::DimensionMismatch(
            "certificate splitting does not match the node".into(),
        ));
    }
    let words = kernel_pair_budget(node.n_vars(), degree)?;
    let p = node.output_dim();
    let mut entries = BTreeMap::new();
    if node.dims()[k] == 0 {
        for w in &words {
            for w2 in &words {
                entries.insert((w.clone(), w2.clone()), CMat::zeros(p, p));
            }
        }
        return KernelTable::new(k, degree, p, entries);
    }
    let h_inv = linalg::checked_inverse(h.h().block(k))?;
    let chains: Vec<CMat> = words.iter().map(|w| node.obs_chain(w, k)).collect();
    for (i, w) in words.iter().enumerate() {
        for (j, w2) in words.iter().enumerate() {
            entries.insert(
                (w.clone(), w2.clone()),
                &chains[i] * &h_inv * chains[j].adjoint(),
            );
        }
    }
    KernelTable::new(k, degree, p, entries)
}

/// One kernel coefficient straight from the series:
/// `K_{w,w'} = Σ_{v v' = w'} (−1)^{|v'|+1} F_{w g_k v'^T} · J · (F_v)*`.
fn series_kernel_entry(f: &FpsTable, j: &CMat, k: usize, w: &Word, w2: &Word) -> CMat {
    let g = Word::generator(k as u32 + 1);
    let mut acc = CMat::zeros(f.rows(), f.rows());
    for (v, vprime) in w2.splits() {
        let sign = if vprime.len() % 2 == 0 { -1.0 } else { 1.0 };
        let word = w.concat(&g).concat(&vprime.transpose());
        acc += (f.coefficient(&word) * j * f.coefficient(&v).adjoint()) * linalg::re(sign);
    }
    acc
}

/// Realization-free kernel coefficients from the series itself.
///
/// # Errors
/// [`Error::InsufficientDegree`] unless `deg f ≥ 2·degree + 1`.
pub fn kernel_from_series(
    f: &FpsTable,
    j: &CMat,
    k: usize,
    degree: usize,
) -> Result<KernelTable> {
    if f.rows() != f.cols() {
        return Err(Error::DimensionMismatch(
            "kernels need a square series".into(),
        ));
    }
    if j.nrows() != f.rows() || j.ncols() != f.rows() {
        return Err(Error::DimensionMismatch(
            "signature matrix does not match the series".into(),
        ));
    }
    if k >= f.n_vars() {
        return Err(Error::InvalidInput(format!(
            "component {k} outside 0..{}",
            f.n_vars()
        )));
    }
    if f.degree() < 2 * degree + 1 {
        return Err(Error::InsufficientDegree(format!(
            "kernel to degree {degree} needs series coefficients to degree {}, \
             have {}",
            2 * degree + 1,
            f.degree()
        )));
    }
    let words = kernel_pair_budget(f.n_vars(), degree)?;
    let mut entries = BTreeMap::new();
    for w in &words {
        for w2 in &words {
            entries.insert((w.clone(), w2.clone()), series_kernel_entry(f, j, k, w, w2));
        }
    }
    KernelTable::new(k, degree, f.rows(), entries)
}

/// 2×2 weights of the formal pencil: the substitution sends `z_j` to
/// `[[x_j, 0], [0, −y_j]]` away from component `k` and to
/// `[[λ + x_k, λ], [λ, λ − y_k]]` at component `k`.
#[derive(Clone, Copy)]
enum PencilLetter {
    X(usize),
    Y(usize),
    Lambda,
}

fn pencil_weight(letter: PencilLetter) -> nalgebra::Matrix2<Complex64> {
    let one = linalg::re(1.0);
    match letter {
        PencilLetter::X(_) => nalgebra::Matrix2::new(
            one,
            linalg::re(0.0),
            linalg::re(0.0),
            linalg::re(0.0),
        ),
        PencilLetter::Y(_) => nalgebra::Matrix2::new(
            linalg::re(0.0),
            linalg::re(0.0),
            linalg::re(0.0),
            -one,
        ),
        PencilLetter::Lambda => nalgebra::Matrix2::new(one, one, one, one),
    }
}

struct PencilDfs<'a> {
    node: &'a GrNode,
    k: usize,
    degree: usize,
    /// λ-linear part of the (1,2) block: (x-word, y-word) → p×q matrix.
    g1: BTreeMap<(Word, Word), CMat>,
}

impl PencilDfs<'_> {
    /// Extends the chain by one pencil letter and recurses.  `acc` is the
    /// partial product `C_{j_1}A_{j_1 j_2}⋯A_{·, cur}` of the underlying
    /// node, `weight` the running 2×2 pencil factor.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        acc: &CMat,
        cur: usize,
        weight: &nalgebra::Matrix2<Complex64>,
        xword: &Word,
        yword: &Word,
        lambdas: usize,
        len: usize,
    ) {
        if lambdas == 1 {
            let w12 = weight[(0, 1)];
            if w12.norm() > 0.0 {
                let t = acc * self.node.b_block(cur) * w12;
                let key = (xword.clone(), yword.clone());
                match self.g1.get_mut(&key) {
                    Some(existing) => *existing += t,
                    None => {
                        self.g1.insert(key, t);
                    }
                }
            }
        }
        if len >= 2 * self.degree + 1 {
            return;
        }
        let n = self.node.n_vars();
        let step = |letter: PencilLetter, var: usize, me: &mut Self| {
            let w = pencil_weight(letter);
            let new_weight = weight * w;
            if new_weight.norm() == 0.0 {
                return;
            }
            let new_lambdas = lambdas + matches!(letter, PencilLetter::Lambda) as usize;
            if new_lambdas > 1 {
                return;
            }
            let (new_x, new_y) = match letter {
                PencilLetter::X(v) => (xword.append(v as u32 + 1), yword.clone()),
                PencilLetter::Y(v) => (xword.clone(), yword.append(v as u32 + 1)),
                PencilLetter::Lambda => (xword.clone(), yword.clone()),
            };
            if new_x.len() > me.degree || new_y.len() > me.degree {
                return;
            }
            let new_acc = acc * me.node.a_block(cur, var);
            if new_acc.ncols() == 0 {
                return;
            }
            me.walk(
                &new_acc,
                var,
                &new_weight,
                &new_x,
                &new_y,
                new_lambdas,
                len + 1,
            );
        };
        for v in 0..n {
            step(PencilLetter::X(v), v, self);
            step(PencilLetter::Y(v), v, self);
        }
        step(PencilLetter::Lambda, self.k, self);
    }

    fn run(&mut self) {
        let n = self.node.n_vars();
        let start = |letter: PencilLetter, var: usize, me: &mut Self| {
            let weight = pencil_weight(letter);
            let lambdas = matches!(letter, PencilLetter::Lambda) as usize;
            let (xword, yword) = match letter {
                PencilLetter::X(v) => (Word::generator(v as u32 + 1), Word::empty()),
                PencilLetter::Y(v) => (Word::empty(), Word::generator(v as u32 + 1)),
                PencilLetter::Lambda => (Word::empty(), Word::empty()),
            };
            let acc = me.node.c_block(var);
            if acc.ncols() == 0 {
                return;
            }
            me.walk(&acc, var, &weight, &xword, &yword, lambdas, 1);
        };
        for v in 0..n {
            start(PencilLetter::X(v), v, self);
            start(PencilLetter::Y(v), v, self);
        }
        start(PencilLetter::Lambda, self.k, self);
    }
}

/// Kernel coefficients by formal differentiation: the node is expanded on
/// the doubled-and-λ-augmented alphabet through the pencil substitution,
/// the λ-linear part of the (1,2) block is extracted, and the result is
/// multiplied by `J·F(z')*` with the transpose bookkeeping of series
/// products in the primed letters.  Final sign: `K = −G1·J·F(z')*`.
pub fn kernel_formal_derivative(
    node: &GrNode,
    j: &CMat,
    k: usize,
    degree: usize,
) -> Result<KernelTable> {
    let p = node.output_dim();
    if p != node.input_dim() {
        return Err(Error::DimensionMismatch(
            "kernels need a square series".into(),
        ));
    }
    if j.nrows() != p || j.ncols() != p {
        return Err(Error::DimensionMismatch(
            "signature matrix does not match the series".into(),
        ));
    }
    if k >= node.n_vars() {
        return Err(Error::InvalidInput(format!(
            "component {k} outside 0..{}",
            node.n_vars()
        )));
    }
    let words = kernel_pair_budget(node.n_vars(), degree)?;

    let mut dfs = PencilDfs {
        node,
        k,
        degree,
        g1: BTreeMap::new(),
    };
    // The empty extended word contributes D ⊗ I₂, which has no λ part;
    // start from length-1 prefixes.
    dfs.run();
    let g1 = dfs.g1;

    // F(z')* as a series in the primed letters: coefficient of y^t is
    // (F_{t^T})*.
    let mut fstar: BTreeMap<Word, CMat> = BTreeMap::new();
    for t in &words {
        fstar.insert(
            t.clone(),
            node.transfer_coefficient(&t.transpose())?.adjoint(),
        );
    }

    let mut entries = BTreeMap::new();
    for w in &words {
        for w2 in &words {
            let wt = w2.transpose();
            let mut acc = CMat::zeros(p, p);
            for (v, t) in wt.splits() {
                if let Some(g) = g1.get(&(w.clone(), v)) {
                    acc += g * j * &fstar[&t];
                }
            }
            entries.insert((w.clone(), w2.clone()), -acc);
        }
    }
    KernelTable::new(k, degree, p, entries)
}

/// Gram matrix of kernel columns with its eigenvalue signature.
#[derive(Clone, Debug)]
pub struct GramReport {
    /// The Hermitian Gram matrix `G_{ij} = c_i* K_{w_i, w_j} c_j`.
    pub matrix: CMat,
    /// Eigenvalues above the rank tolerance.
    pub positive: usize,
    /// Eigenvalues below the negative rank tolerance.
    pub negative: usize,
    /// Eigenvalues within tolerance of zero.
    pub zero: usize,
}

/// Gram/signature report for the columns `K_{·,w_i} c_i`.
pub fn kernel_gram(table: &KernelTable, pairs: &[(Word, CVec)]) -> Result<GramReport> {
    for (_, c) in pairs {
        if c.nrows() != table.rows() {
            return Err(Error::DimensionMismatch(
                "column vector does not match the kernel coefficient size".into(),
            ));
        }
    }
    let n = pairs.len();
    let mut g = CMat::zeros(n, n);
    for (i, (wi, ci)) in pairs.iter().enumerate() {
        for (jj, (wj, cj)) in pairs.iter().enumerate() {
            g[(i, jj)] = (ci.adjoint() * table.entry(wi, wj) * cj)[(0, 0)];
        }
    }
    let g = linalg::hermitian_part(&g);
    let (positive, negative, zero) = linalg::signature(&g, None);
    Ok(GramReport {
        matrix: g,
        positive,
        negative,
        zero,
    })
}

/// Greedily selects a maximal independent subset of candidate columns
/// (modified Gram–Schmidt with a relative acceptance threshold), stopping
/// at `target`.  Returns the indices of the accepted candidates.
fn greedy_column_basis(columns: &[CVec], target: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut ortho: Vec<CVec> = Vec::new();
    let mut scale: f64 = 0.0;
    for (idx, col) in columns.iter().enumerate() {
        if chosen.len() == target {
            break;
        }
        scale = scale.max(col.norm());
        let mut residual = col.clone();
        for q in &ortho {
            let coeff = (q.adjoint() * &residual)[(0, 0)];
            residual -= q * coeff;
        }
        let norm = residual.norm();
        if norm > 1.0e-8 * scale.max(1.0e-300) {
            ortho.push(residual / linalg::re(norm));
            chosen.push(idx);
        }
    }
    chosen
}

/// Minimal realization of a matrix-J-unitary series on its kernel spaces:
/// the state components are spanned by kernel columns, the state maps are
/// the backward shifts, `C` evaluates the constant coefficient, `D = F_∅`,
/// and the associated Hermitian matrix is the Gram matrix of the chosen
/// kernel-column basis (verified against the certificate of the output).
///
/// # Errors
/// - [`Error::InsufficientDegree`] when the table is too short to span
///   the kernel spaces;
/// - [`Error::NotInClass`] when the series is not matrix-J-unitary;
/// - [`Error::Numerical`] when ranks do not stabilize.
pub fn model_realization(f: &FpsTable, j: &CMat) -> Result<(GrNode, StructuredHermitian)> {
    let q = f.rows();
    if f.cols() != q {
        return Err(Error::DimensionMismatch(
            "model realization needs a square series".into(),
        ));
    }
    if j.nrows() != q || j.ncols() != q {
        return Err(Error::DimensionMismatch(
            "signature matrix does not match the series".into(),
        ));
    }
    let n = f.n_vars();
    let d_const = f.coefficient(&Word::empty());
    let j_defect = (&d_const * j * d_const.adjoint() - j).norm();

    // Constant series: the model is the constant node.
    let gamma = if f.degree() == 0 {
        vec![0; n]
    } else {
        minimal::hankel_ranks(f, None)?
    };
    let gamma_sum: usize = gamma.iter().sum();
    if gamma_sum == 0 {
        if j_defect > 1.0e-9 * j.norm() {
            return Err(Error::NotInClass(
                "the constant term is not J-unitary".into(),
            ));
        }
        let node = GrNode::new(
            n,
            vec![0; n],
            CMat::zeros(0, 0),
            CMat::zeros(0, q),
            CMat::zeros(q, 0),
            d_const,
        )?;
        let h = StructuredHermitian::new(BlockDiag::identity(&vec![0; n]))?;
        return Ok((node, h));
    }

    // Functions are represented by their coefficients up to degree q·γ.
    let trunc = q * gamma_sum;
    if f.degree() < trunc + 1 {
        return Err(Error::InsufficientDegree(format!(
            "model realization needs series coefficients to degree {}, have {}",
            trunc + 1,
            f.degree()
        )));
    }
    let rep_words = kernel_pair_budget(n, trunc)?;
    let word_index: BTreeMap<Word, usize> = rep_words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let rep_rows = rep_words.len() * q;
    let short_words = words_up_to(n, trunc.saturating_sub(1));
    let short_rows = short_words.len() * q;

    // Per component: scan kernel columns K_{·,w'} e_i in graded order
    // until γ_k independent ones are found.
    struct ComponentBasis {
        labels: Vec<(Word, usize)>,
        matrix: CMat,
    }
    let mut bases: Vec<ComponentBasis> = Vec::with_capacity(n);
    for k in 0..n {
        let mut candidates: Vec<CVec> = Vec::new();
        let mut labels: Vec<(Word, usize)> = Vec::new();
        let mut scan_len = 0usize;
        let chosen = loop {
            if scan_len > trunc {
                return Err(Error::Numerical(format!(
                    "kernel-column rank for component {k} did not stabilize at \
                     {} within degree {trunc}",
                    gamma[k]
                )));
            }
            if f.degree() < trunc + 1 + scan_len {
                return Err(Error::InsufficientDegree(format!(
                    "kernel-column scan needs series coefficients to degree {}, \
                     have {}",
                    trunc + 1 + scan_len,
                    f.degree()
                )));
            }
            for w2 in words_of_length(n, scan_len) {
                // One kernel entry per row word serves q candidate columns.
                let mut block = CMat::zeros(rep_rows, q);
                for (row_i, w) in rep_words.iter().enumerate() {
                    block
                        .view_mut((row_i * q, 0), (q, q))
                        .copy_from(&series_kernel_entry(f, j, k, w, &w2));
                }
                for i in 0..q {
                    candidates.push(block.column(i).clone_owned());
                    labels.push((w2.clone(), i));
                }
            }
            let chosen = greedy_column_basis(&candidates, gamma[k]);
            if chosen.len() == gamma[k] {
                break chosen;
            }
            scan_len += 1;
        };
        let mut matrix = CMat::zeros(rep_rows, gamma[k]);
        let mut kept = Vec::with_capacity(gamma[k]);
        for (col, &idx) in chosen.iter().enumerate() {
            matrix.set_column(col, &candidates[idx]);
            kept.push(labels[idx].clone());
        }
        bases.push(ComponentBasis {
            labels: kept,
            matrix,
        });
    }

    // Associated Hermitian matrix: Gram of the basis columns,
    // H_{ij} = e_{u_i}* K(w_i, w_j) e_{u_j}.
    let mut h_blocks = Vec::with_capacity(n);
    for (k, base) in bases.iter().enumerate() {
        let m = base.labels.len();
        let mut hk = CMat::zeros(m, m);
        for (i, (wi, ui)) in base.labels.iter().enumerate() {
            for (jj, (wj, uj)) in base.labels.iter().enumerate() {
                let entry = series_kernel_entry(f, j, k, wi, wj);
                hk[(i, jj)] = entry[(*ui, *uj)];
            }
        }
        h_blocks.push(linalg::hermitian_part(&hk));
    }
    let h = StructuredHermitian::new(BlockDiag::from_blocks(h_blocks)?)?;
    if !h.is_invertible() {
        return Err(Error::NotInClass(
            "the kernel Gram matrix is singular; the series is not \
             matrix-J-unitary with these ranks"
                .into(),
        ));
    }

    // Restriction of a represented function to degree trunc−1 rows.
    let shorten = |v: &CVec| -> CVec { v.rows(0, short_rows).clone_owned() };
    // Backward shift of a represented function.
    let shift = |v: &CVec, k: usize| -> CVec {
        let mut out = CVec::zeros(short_rows);
        for (row_i, w) in short_words.iter().enumerate() {
            let wg = w.append(k as u32 + 1);
            let src = word_index[&wg];
            out.rows_mut(row_i * q, q)
                .copy_from(&v.rows(src * q, q));
        }
        out
    };

    let offsets: Vec<usize> = gamma
        .iter()
        .scan(0usize, |acc, &g| {
            let o = *acc;
            *acc += g;
            Some(o)
        })
        .collect();

    // State maps: A_{kj} represents R_k restricted to the j-th space.
    let mut a = CMat::zeros(gamma_sum, gamma_sum);
    let mut shift_defect: f64 = 0.0;
    for k in 0..n {
        let target: Vec<CVec> = (0..gamma[k])
            .map(|c| shorten(&bases[k].matrix.column(c).clone_owned()))
            .collect();
        let target_mat = columns_to_matrix(&target, short_rows);
        for jj in 0..n {
            if gamma[k] == 0 || gamma[jj] == 0 {
                continue;
            }
            let mut rhs = CMat::zeros(short_rows, gamma[jj]);
            for c in 0..gamma[jj] {
                rhs.set_column(c, &shift(&bases[jj].matrix.column(c).clone_owned(), k));
            }
            let coords = linalg::lstsq(&target_mat, &rhs);
            shift_defect = shift_defect.max((&target_mat * &coords - &rhs).norm());
            a.view_mut((offsets[k], offsets[jj]), (gamma[k], gamma[jj]))
                .copy_from(&coords);
        }
    }

    // Input maps: columns of B_k are the coordinates of R_k F(·) e_i.
    let mut b = CMat::zeros(gamma_sum, q);
    for k in 0..n {
        if gamma[k] == 0 {
            continue;
        }
        let mut rkf = CMat::zeros(short_rows, q);
        for (row_i, w) in short_words.iter().enumerate() {
            let wg = w.append(k as u32 + 1);
            rkf.view_mut((row_i * q, 0), (q, q))
                .copy_from(&f.coefficient(&wg));
        }
        let target: Vec<CVec> = (0..gamma[k])
            .map(|c| shorten(&bases[k].matrix.column(c).clone_owned()))
            .collect();
        let target_mat = columns_to_matrix(&target, short_rows);
        let coords = linalg::lstsq(&target_mat, &rkf);
        shift_defect = shift_defect.max((&target_mat * &coords - &rkf).norm());
        b.view_mut((offsets[k], 0), (gamma[k], q)).copy_from(&coords);
    }
    let scale = f.max_coefficient_norm().max(1.0);
    if shift_defect > 1.0e-8 * scale {
        return Err(Error::Numerical(format!(
            "backward shifts leave the kernel spans: defect {shift_defect:.3e}"
        )));
    }

    // Output map: evaluation of the constant coefficient.
    let mut c = CMat::zeros(q, gamma_sum);
    for jj in 0..n {
        if gamma[jj] == 0 {
            continue;
        }
        c.view_mut((0, offsets[jj]), (q, gamma[jj]))
            .copy_from(&bases[jj].matrix.view((0, 0), (q, gamma[jj])));
    }

    let node = GrNode::new(n, gamma.clone(), a, b, c, d_const)?;

    // The model must reproduce the series and be minimal.
    let dist = f.max_coefficient_distance(&node.expand(f.degree()))?;
    if dist > 1.0e-10 * scale {
        return Err(Error::Numerical(format!(
            "model realization deviates from the series by {dist:.3e}"
        )));
    }
    if !minimal::is_minimal(&node, None)? {
        return Err(Error::Numerical(
            "model realization is not minimal".into(),
        ));
    }

    // The Gram matrix must be the associated Hermitian matrix.
    let cert = line::associated_h_line(&node, j, None)?;
    let h_dist = (cert.h.h().to_full() - h.h().to_full()).norm();
    if h_dist > 1.0e-8 * h.h().norm().max(1.0) {
        return Err(Error::Numerical(format!(
            "kernel Gram deviates from the associated Hermitian matrix by \
             {h_dist:.3e}"
        )));
    }
    Ok((node, h))
}

fn columns_to_matrix(cols: &[CVec], rows: usize) -> CMat {
    let mut m = CMat::zeros(rows, cols.len());
    for (i, c) in cols.iter().enumerate() {
        m.set_column(i, c);
    }
    m
}
