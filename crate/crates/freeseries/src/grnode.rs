//! Structured state-space realizations ("nodes") of rational series.
//!
//! A node `α = (N; A, B, C, D)` has a state space that splits into one
//! component per indeterminate, `C^r = ⊕_k C^{r_k}`, with `A : C^r → C^r`
//! (blocks `A_{kj} : C^{r_j} → C^{r_k}`), `B : C^q → C^r`, `C : C^r → C^p`
//! and `D : C^q → C^p`.  Its transfer series is
//!
//! ```text
//! T(z) = D + C (I − Δ(z) A)^{-1} Δ(z) B,   Δ(z) = diag(z_1 I_{r_1}, …, z_N I_{r_N}),
//! ```
//!
//! whose coefficients are `T_∅ = D` and
//! `T_w = C_{i1} A_{i1 i2} ⋯ A_{i_{n−1} i_n} B_{i_n}` for `w = g_{i1}⋯g_{in}`.
//!
//! The module provides coefficient extraction, series expansion, closed-form
//! evaluation on matrix tuples, the product realization, the adjoint node,
//! the associated node (realizing the inverse series), and block-diagonal
//! state-space similarity.

use crate::error::{Error, Result};
use crate::fps::{check_tuple, FpsTable};
use crate::linalg::{self, CMat};
use crate::structured::BlockDiag;
use crate::words::{words_up_to, Word};

/// A structured realization with one state component per indeterminate.
#[derive(Clone, Debug, PartialEq)]
pub struct GrNode {
    n_vars: usize,
    dims: Vec<usize>,
    a: CMat,
    b: CMat,
    c: CMat,
    d: CMat,
}

impl GrNode {
    /// Builds a node after validating all dimensions.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] if `dims` does not have `n_vars`
    /// entries, or if `A, B, C, D` do not have shapes
    /// `r×r`, `r×q`, `p×r`, `p×q` with `r = Σ dims`.
    pub fn new(
        n_vars: usize,
        dims: Vec<usize>,
        a: CMat,
        b: CMat,
        c: CMat,
        d: CMat,
    ) -> Result<Self> {
        if dims.len() != n_vars {
            return Err(Error::DimensionMismatch(format!(
                "dims has {} entries, expected {n_vars}",
                dims.len()
            )));
        }
        let r: usize = dims.iter().sum();
        let p = d.nrows();
        let q = d.ncols();
        if a.nrows() != r || a.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "A is {}×{}, expected {r}×{r}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != r || b.ncols() != q {
            return Err(Error::DimensionMismatch(format!(
                "B is {}×{}, expected {r}×{q}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.nrows() != p || c.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "C is {}×{}, expected {p}×{r}",
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(GrNode {
            n_vars,
            dims,
            a,
            b,
            c,
            d,
        })
    }

    /// Alphabet size `N`.
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// State component dimensions `(r_1, …, r_N)`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total state dimension `r = Σ r_k`.
    pub fn state_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Output dimension `p`.
    pub fn output_dim(&self) -> usize {
        self.d.nrows()
    }

    /// Input dimension `q`.
    pub fn input_dim(&self) -> usize {
        self.d.ncols()
    }

    /// The state matrix `A`.
    pub fn a(&self) -> &CMat {
        &self.a
    }

    /// The input map `B`.
    pub fn b(&self) -> &CMat {
        &self.b
    }

    /// The output map `C`.
    pub fn c(&self) -> &CMat {
        &self.c
    }

    /// The feed-through `D`.
    pub fn d(&self) -> &CMat {
        &self.d
    }

    /// Offset of component `k` (0-based) inside the stacked state space.
    pub fn offset(&self, k: usize) -> usize {
        self.dims[..k].iter().sum()
    }

    /// The block `A_{kj} : C^{r_j} → C^{r_k}` (0-based components).
    pub fn a_block(&self, k: usize, j: usize) -> CMat {
        self.a
            .view((self.offset(k), self.offset(j)), (self.dims[k], self.dims[j]))
            .into_owned()
    }

    /// The block `B_k : C^q → C^{r_k}`.
    pub fn b_block(&self, k: usize) -> CMat {
        self.b
            .view((self.offset(k), 0), (self.dims[k], self.input_dim()))
            .into_owned()
    }

    /// The block `C_j : C^{r_j} → C^p`.
    pub fn c_block(&self, j: usize) -> CMat {
        self.c
            .view((0, self.offset(j)), (self.output_dim(), self.dims[j]))
            .into_owned()
    }

    /// Transfer coefficient `T_w`: `D` for the empty word, otherwise
    /// `C_{i1} A_{i1 i2} ⋯ A_{i_{n−1} i_n} B_{i_n}`.
    ///
    /// # Errors
    /// [`Error::InvalidWord`] on letters outside the alphabet.
    pub fn transfer_coefficient(&self, w: &Word) -> Result<CMat> {
        if !w.is_valid_over(self.n_vars) {
            return Err(Error::InvalidWord(format!(
                "{w} over alphabet of size {}",
                self.n_vars
            )));
        }
        if w.is_empty() {
            return Ok(self.d.clone());
        }
        let letters = w.letters();
        let first = (letters[0] - 1) as usize;
        let mut acc = self.c_block(first);
        let mut prev = first;
        for &l in &letters[1..] {
            let next = (l - 1) as usize;
            acc = acc * self.a_block(prev, next);
            prev = next;
        }
        Ok(acc * self.b_block(prev))
    }

    /// Expands the transfer series through `degree`, walking the word tree
    /// once so each prefix product is computed once.
    pub fn expand(&self, degree: usize) -> FpsTable {
        let p = self.output_dim();
        let q = self.input_dim();
        let mut out = FpsTable::zero(self.n_vars, p, q, degree);
        out.set_coefficient(Word::empty(), self.d.clone())
            .expect("constant fits");
        if degree == 0 || self.state_dim() == 0 {
            return out;
        }
        // Depth-first walk: `partial` is C_{i1} A… up to the current last
        // letter's component; extending by letter j multiplies by A_{last,j}.
        struct Walk<'n> {
            node: &'n GrNode,
            out: FpsTable,
            degree: usize,
        }
        impl Walk<'_> {
            fn go(&mut self, word: &mut Vec<u32>, partial: &CMat, last: usize) {
                let coeff = partial * self.node.b_block(last);
                self.out
                    .set_coefficient(
                        Word::from_letters_unchecked(word.clone()),
                        coeff,
                    )
                    .expect("in-range word");
                if word.len() == self.degree {
                    return;
                }
                for j in 0..self.node.n_vars {
                    if self.node.dims[j] == 0 {
                        continue;
                    }
                    let next = partial * self.node.a_block(last, j);
                    word.push(j as u32 + 1);
                    self.go(word, &next, j);
                    word.pop();
                }
            }
        }
        let mut walk = Walk {
            node: self,
            out,
            degree,
        };
        for k in 0..self.n_vars {
            if self.dims[k] == 0 {
                continue;
            }
            let mut word = vec![k as u32 + 1];
            let partial = self.c_block(k);
            walk.go(&mut word, &partial, k);
        }
        walk.out
    }

    /// The structured diagonal `Δ(Z) = diag(I_{r_k} ⊗ Z_k)` for an `n×n`
    /// tuple.
    pub fn delta(&self, z: &[CMat]) -> Result<CMat> {
        let n = check_tuple(self.n_vars, z)?;
        let blocks: Vec<CMat> = (0..self.n_vars)
            .map(|k| linalg::kron(&CMat::identity(self.dims[k], self.dims[k]), &z[k]))
            .collect();
        let _ = n;
        Ok(linalg::block_diag(&blocks))
    }

    /// Closed-form evaluation of the transfer series on a matrix tuple:
    /// `(D ⊗ I_n) + (C ⊗ I_n)(I − Δ(Z)(A ⊗ I_n))^{-1} Δ(Z)(B ⊗ I_n)`.
    ///
    /// # Errors
    /// [`Error::Singular`] if the resolvent `I − Δ(Z)(A ⊗ I_n)` is
    /// numerically singular at `Z`.
    pub fn eval_closed(&self, z: &[CMat]) -> Result<CMat> {
        let n = check_tuple(self.n_vars, z)?;
        let eye_n = CMat::identity(n, n);
        let d_part = linalg::kron(&self.d, &eye_n);
        if self.state_dim() == 0 {
            return Ok(d_part);
        }
        let delta = self.delta(z)?;
        let rn = self.state_dim() * n;
        let resolvent = CMat::identity(rn, rn) - &delta * linalg::kron(&self.a, &eye_n);
        let rhs = &delta * linalg::kron(&self.b, &eye_n);
        let lu = resolvent.lu();
        let x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("resolvent I − Δ(Z)(A⊗I) at sample".into()))?;
        Ok(d_part + linalg::kron(&self.c, &eye_n) * x)
    }

    /// Product realization: the transfer series of the result is the product
    /// of the two transfer series (left followed by right), with component
    /// dimensions adding.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] unless `self.input_dim() ==
    /// other.output_dim()` and the alphabets agree.
    pub fn product(&self, other: &GrNode) -> Result<GrNode> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "alphabets differ: {} vs {}",
                self.n_vars, other.n_vars
            )));
        }
        if self.input_dim() != other.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "product of a {}×{} series by a {}×{} series",
                self.output_dim(),
                self.input_dim(),
                other.output_dim(),
                other.input_dim()
            )));
        }
        let n = self.n_vars;
        let dims: Vec<usize> = (0..n).map(|k| self.dims[k] + other.dims[k]).collect();
        let r: usize = dims.iter().sum();
        let q = other.input_dim();
        let p = self.output_dim();
        let mut a = CMat::zeros(r, r);
        let mut b = CMat::zeros(r, q);
        let mut c = CMat::zeros(p, r);
        let offset = |k: usize| -> usize { dims[..k].iter().sum() };
        for k in 0..n {
            let (r1k, r2k) = (self.dims[k], other.dims[k]);
            let ok = offset(k);
            for j in 0..n {
                let (r1j, r2j) = (self.dims[j], other.dims[j]);
                let oj = offset(j);
                // Block layout per component pair:
                //   [ A'_{kj}   B'_k C''_j ]
                //   [   0         A''_{kj} ]
                a.view_mut((ok, oj), (r1k, r1j)).copy_from(&self.a_block(k, j));
                a.view_mut((ok, oj + r1j), (r1k, r2j))
                    .copy_from(&(self.b_block(k) * other.c_block(j)));
                a.view_mut((ok + r1k, oj + r1j), (r2k, r2j))
                    .copy_from(&other.a_block(k, j));
            }
            // B_k = [ B'_k D'' ; B''_k ],  C_k = [ C'_k , D' C''_k ].
            b.view_mut((ok, 0), (r1k, q))
                .copy_from(&(self.b_block(k) * other.d()));
            b.view_mut((ok + r1k, 0), (r2k, q)).copy_from(&other.b_block(k));
            c.view_mut((0, ok), (p, r1k)).copy_from(&self.c_block(k));
            c.view_mut((0, ok + r1k), (p, r2k))
                .copy_from(&(self.d() * other.c_block(k)));
        }
        GrNode::new(n, dims, a, b, c, self.d() * other.d())
    }

    /// The adjoint node `(A*, C*, B*, D*)`, which realizes the series with
    /// coefficients `(T_{w^T})*`.
    pub fn adjoint(&self) -> GrNode {
        GrNode {
            n_vars: self.n_vars,
            dims: self.dims.clone(),
            a: self.a.adjoint(),
            b: self.c.adjoint(),
            c: self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    /// The associated node
    /// `(A − B D^{-1} C, B D^{-1}, −D^{-1} C, D^{-1})`, which realizes the
    /// inverse series.  Applying it twice returns the original node.
    ///
    /// # Errors
    /// [`Error::Singular`] if `D` is not square-invertible.
    pub fn associated(&self) -> Result<GrNode> {
        let d_inv = linalg::checked_inverse(&self.d)
            .map_err(|e| Error::Singular(format!("feed-through D: {e}")))?;
        Ok(GrNode {
            n_vars: self.n_vars,
            dims: self.dims.clone(),
            a: &self.a - &self.b * &d_inv * &self.c,
            b: &self.b * &d_inv,
            c: -(&d_inv * &self.c),
            d: d_inv,
        })
    }

    /// Changes the state basis with a block-diagonal invertible `T`:
    /// returns `(T^{-1} A T, T^{-1} B, C T, D)`, which has the same transfer
    /// series.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] if the splitting differs;
    /// [`Error::Singular`] if a block is singular.
    pub fn apply_similarity(&self, t: &BlockDiag) -> Result<GrNode> {
        if t.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "similarity splitting {:?} does not match node dims {:?}",
                t.dims(),
                self.dims
            )));
        }
        let t_full = t.to_full();
        let t_inv = t.inverse()?.to_full();
        Ok(GrNode {
            n_vars: self.n_vars,
            dims: self.dims.clone(),
            a: &t_inv * &self.a * &t_full,
            b: &t_inv * &self.b,
            c: &self.c * &t_full,
            d: self.d.clone(),
        })
    }

    /// Maximum distance between the transfer coefficients of two nodes
    /// through `degree`.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] on shape/alphabet mismatch.
    pub fn transfer_distance(&self, other: &GrNode, degree: usize) -> Result<f64> {
        if self.n_vars != other.n_vars
            || self.output_dim() != other.output_dim()
            || self.input_dim() != other.input_dim()
        {
            return Err(Error::DimensionMismatch(
                "transfer comparison of incompatible nodes".into(),
            ));
        }
        self.expand(degree).max_coefficient_distance(&other.expand(degree))
    }

    /// Chain product `(C♭A)^{w g_k}` used by observability stacks and
    /// kernels: for `w = g_{i1}⋯g_{in}`,
    /// `C_{i1} A_{i1 i2} ⋯ A_{i_{n−1} i_n} A_{i_n k}`, and `C_k` when `w`
    /// is empty.  The 0-based component `k` indexes the trailing letter.
    pub fn obs_chain(&self, w: &Word, k: usize) -> CMat {
        let letters = w.letters();
        if letters.is_empty() {
            return self.c_block(k);
        }
        let first = (letters[0] - 1) as usize;
        let mut acc = self.c_block(first);
        let mut prev = first;
        for &l in &letters[1..] {
            let next = (l - 1) as usize;
            acc = acc * self.a_block(prev, next);
            prev = next;
        }
        acc * self.a_block(prev, k)
    }

    /// Chain product `(A♯B)^{g_k w^T}`: for `w = g_{i1}⋯g_{in}`,
    /// `A_{k i_n} A_{i_n i_{n−1}} ⋯ A_{i_2 i_1} B_{i_1}`, and `B_k` when
    /// `w` is empty.
    pub fn ctrl_chain(&self, k: usize, w: &Word) -> CMat {
        let letters = w.letters();
        if letters.is_empty() {
            return self.b_block(k);
        }
        // Walk w^T = reversed letters, starting from component k.
        let mut acc = CMat::identity(self.dims[k], self.dims[k]);
        let mut prev = k;
        for &l in letters.iter().rev() {
            let next = (l - 1) as usize;
            acc = acc * self.a_block(prev, next);
            prev = next;
        }
        acc * self.b_block(prev)
    }

    /// Evaluates the observability-type resolvent slice
    /// `φ(Z) = (C ⊗ I_n)(I − Δ(Z)(A ⊗ I_n))^{-1}` and returns its column
    /// block for component `k` (0-based), a `(p·n) × (r_k·n)` matrix.
    ///
    /// # Errors
    /// [`Error::Singular`] at tuples where the resolvent is singular.
    pub fn obs_resolvent_slice(&self, z: &[CMat], k: usize) -> Result<CMat> {
        let n = check_tuple(self.n_vars, z)?;
        let eye_n = CMat::identity(n, n);
        let rn = self.state_dim() * n;
        let delta = self.delta(z)?;
        let resolvent = CMat::identity(rn, rn) - &delta * linalg::kron(&self.a, &eye_n);
        let lu = resolvent.lu();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| Error::Singular("resolvent I − Δ(Z)(A⊗I) at sample".into()))?;
        let phi = linalg::kron(&self.c, &eye_n) * inv;
        Ok(phi
            .view((0, self.offset(k) * n), (self.output_dim() * n, self.dims[k] * n))
            .into_owned())
    }
}

/// Expansion identity `expand(node, d) == transfer_coefficient` over all
/// words — exposed for property tests.
pub fn expansion_matches_coefficients(node: &GrNode, degree: usize) -> Result<f64> {
    let table = node.expand(degree);
    let mut worst: f64 = 0.0;
    for w in words_up_to(node.n_vars(), degree) {
        let direct = node.transfer_coefficient(&w)?;
        worst = worst.max((direct - table.coefficient(&w)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use approx::assert_relative_eq;

    /// Scalar node realizing (z−1)(z+1)^{-1} = −1 + 2z − 2z² + …
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

    /// Two-variable node whose series has coefficient 2(−1)^{|w|−1} on every
    /// non-empty word and −1 at the empty word.
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
    fn scalar_fixture_coefficients() {
        let node = node_e1();
        let f = node.expand(5);
        let w = |m: usize| Word::from_letters_unchecked(vec![1; m]);
        assert_relative_eq!(f.coefficient(&w(0))[(0, 0)].re, -1.0);
        assert_relative_eq!(f.coefficient(&w(1))[(0, 0)].re, 2.0, epsilon = 1.0e-14);
        assert_relative_eq!(f.coefficient(&w(2))[(0, 0)].re, -2.0, epsilon = 1.0e-14);
        assert_relative_eq!(f.coefficient(&w(3))[(0, 0)].re, 2.0, epsilon = 1.0e-14);
    }

    #[test]
    fn two_variable_fixture_coefficients() {
        let node = node_e2();
        let f = node.expand(4);
        for w in crate::words::words_up_to(2, 4) {
            let expected = if w.is_empty() {
                -1.0
            } else {
                2.0 * (-1.0f64).powi(w.len() as i32 - 1)
            };
            assert_relative_eq!(
                f.coefficient(&w)[(0, 0)].re,
                expected,
                epsilon = 1.0e-12
            );
        }
    }

    #[test]
    fn expansion_matches_direct_coefficients() {
        let worst = expansion_matches_coefficients(&node_e2(), 4).unwrap();
        assert!(worst <= 1.0e-13, "worst deviation {worst}");
    }

    #[test]
    fn eval_closed_matches_series_on_small_tuple() {
        let node = node_e1();
        // ‖Z‖ < 1 keeps the Neumann series convergent; compare against a
        // long truncation.
        let z = vec![CMat::from_row_slice(1, 1, &[re(0.1)])];
        let closed = node.eval_closed(&z).unwrap();
        let series = node.expand(60).eval(&z).unwrap();
        assert_relative_eq!((closed - series).norm(), 0.0, epsilon = 1.0e-12);
    }

    #[test]
    fn eval_closed_scalar_value() {
        // (0.1 − 1)/(0.1 + 1) = −9/11.
        let node = node_e1();
        let z = vec![CMat::from_row_slice(1, 1, &[re(0.1)])];
        let val = node.eval_closed(&z).unwrap()[(0, 0)];
        assert_relative_eq!(val.re, -9.0 / 11.0, epsilon = 1.0e-14);
        assert_relative_eq!(val.im, 0.0, epsilon = 1.0e-14);
    }

    #[test]
    fn product_realizes_series_product() {
        let n1 = node_e1();
        let prod = n1.product(&n1).unwrap();
        assert_eq!(prod.dims(), &[2]);
        let lhs = prod.expand(5);
        let rhs = n1.expand(5).mul(&n1.expand(5)).unwrap();
        assert!(lhs.max_coefficient_distance(&rhs).unwrap() <= 1.0e-12);
    }

    #[test]
    fn associated_realizes_inverse() {
        let node = node_e2();
        let assoc = node.associated().unwrap();
        let lhs = assoc.expand(5);
        let rhs = node.expand(5).invert().unwrap();
        assert!(lhs.max_coefficient_distance(&rhs).unwrap() <= 1.0e-12);
    }

    #[test]
    fn associated_is_an_involution() {
        let node = node_e2();
        let twice = node.associated().unwrap().associated().unwrap();
        assert!((twice.a() - node.a()).norm() <= 1.0e-13);
        assert!((twice.b() - node.b()).norm() <= 1.0e-13);
        assert!((twice.c() - node.c()).norm() <= 1.0e-13);
        assert!((twice.d() - node.d()).norm() <= 1.0e-13);
    }

    #[test]
    fn associated_of_scalar_fixture() {
        // By hand: A× = 1, B× = −√2, C× = √2, D× = −1.
        let assoc = node_e1().associated().unwrap();
        let s = 2.0f64.sqrt();
        assert_relative_eq!(assoc.a()[(0, 0)].re, 1.0, epsilon = 1.0e-14);
        assert_relative_eq!(assoc.b()[(0, 0)].re, -s, epsilon = 1.0e-14);
        assert_relative_eq!(assoc.c()[(0, 0)].re, s, epsilon = 1.0e-14);
        assert_relative_eq!(assoc.d()[(0, 0)].re, -1.0, epsilon = 1.0e-14);
    }

    #[test]
    fn adjoint_transposes_words() {
        let node = node_e2();
        let adj = node.adjoint();
        let w = Word::from_letters(&[1, 2], 2).unwrap();
        let lhs = adj.transfer_coefficient(&w).unwrap();
        let rhs = node
            .transfer_coefficient(&w.transpose())
            .unwrap()
            .adjoint();
        assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1.0e-13);
    }

    #[test]
    fn similarity_preserves_transfer() {
        let node = node_e2();
        let t = BlockDiag::from_blocks(vec![
            CMat::from_row_slice(1, 1, &[re(3.0)]),
            CMat::from_row_slice(1, 1, &[re(-0.5)]),
        ])
        .unwrap();
        let moved = node.apply_similarity(&t).unwrap();
        assert!(node.transfer_distance(&moved, 5).unwrap() <= 1.0e-12);
    }

    #[test]
    fn chains_match_transfer_coefficients() {
        // (C♭A)^{w g_k} · B_k reproduces T_{w g_k}; A♯B from the other side.
        let node = node_e2();
        for w in crate::words::words_up_to(2, 3) {
            for k in 0..2 {
                let via_obs = node.obs_chain(&w, k) * node.b_block(k);
                let word = w.append(k as u32 + 1);
                let direct = node.transfer_coefficient(&word).unwrap();
                assert_relative_eq!((via_obs - direct).norm(), 0.0, epsilon = 1.0e-12);

                let via_ctrl = node.c_block(k) * node.ctrl_chain(k, &w);
                let word2 = Word::generator(k as u32 + 1).concat(&w.transpose());
                let direct2 = node.transfer_coefficient(&word2).unwrap();
                assert_relative_eq!((via_ctrl - direct2).norm(), 0.0, epsilon = 1.0e-12);
            }
        }
    }

    #[test]
    fn empty_state_node_is_constant() {
        let d = CMat::from_row_slice(1, 1, &[re(7.0)]);
        let node = GrNode::new(
            2,
            vec![0, 0],
            CMat::zeros(0, 0),
            CMat::zeros(0, 1),
            CMat::zeros(1, 0),
            d.clone(),
        )
        .unwrap();
        let f = node.expand(3);
        assert_eq!(f.n_terms(), 1);
        let z = vec![CMat::identity(2, 2), CMat::identity(2, 2)];
        let val = node.eval_closed(&z).unwrap();
        assert_relative_eq!((val - linalg::kron(&d, &CMat::identity(2, 2))).norm(), 0.0);
    }
}
