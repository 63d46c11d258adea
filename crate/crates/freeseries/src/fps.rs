//! Formal power series in non-commuting indeterminates with complex matrix
//! coefficients, truncated at an explicit degree.
//!
//! An [`FpsTable`] stores the coefficients `f_w ∈ C^{p×q}` of
//! `f = Σ_w f_w z^w` for all words `|w| ≤ degree` over `n_vars` letters.
//! Invariants maintained by every constructor and operation:
//!
//! * all stored words are valid over the alphabet and no longer than
//!   `degree`;
//! * no stored coefficient has Frobenius norm below [`COEFF_DROP_TOL`]
//!   (exact zeros are simply absent);
//! * the map is ordered graded-lexicographically, so iteration order is
//!   deterministic.
//!
//! Binary operations truncate to the smaller degree of their operands:
//! coefficients beyond that degree would depend on data the operands do not
//! carry.  Inversion is exact through the stored degree because the `k`-th
//! Neumann term only influences words of length at least `k`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::words::Word;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Coefficients with Frobenius norm at or below this threshold are dropped
/// when tables are normalized; keeps arithmetic noise from accumulating as
/// spurious support.
pub const COEFF_DROP_TOL: f64 = 1.0e-14;

/// A truncated formal power series with matrix coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FpsTable {
    n_vars: usize,
    rows: usize,
    cols: usize,
    degree: usize,
    terms: BTreeMap<Word, CMat>,
}

impl FpsTable {
    /// The zero series with the given shape and truncation degree.
    pub fn zero(n_vars: usize, rows: usize, cols: usize, degree: usize) -> Self {
        FpsTable {
            n_vars,
            rows,
            cols,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A constant series `f_∅ = value`.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] if `value` is empty-shaped inconsistently.
    pub fn constant(n_vars: usize, value: CMat, degree: usize) -> Self {
        let rows = value.nrows();
        let cols = value.ncols();
        let mut t = FpsTable::zero(n_vars, rows, cols, degree);
        t.set_coefficient(Word::empty(), value)
            .expect("empty word always fits");
        t
    }

    /// The scalar-matrix identity series `I_q` as a constant.
    pub fn identity(n_vars: usize, q: usize, degree: usize) -> Self {
        FpsTable::constant(n_vars, CMat::identity(q, q), degree)
    }

    /// A single-term series `value · z^w`.
    ///
    /// # Errors
    /// [`Error::InvalidWord`] or [`Error::InsufficientDegree`] if the word
    /// does not fit the table.
    pub fn monomial(
        n_vars: usize,
        word: Word,
        value: CMat,
        degree: usize,
    ) -> Result<Self> {
        let mut t = FpsTable::zero(n_vars, value.nrows(), value.ncols(), degree);
        t.set_coefficient(word, value)?;
        Ok(t)
    }

    /// Builds a table from explicit terms.
    ///
    /// # Errors
    /// Any invalid word, oversized word, or coefficient shape mismatch.
    pub fn from_terms(
        n_vars: usize,
        rows: usize,
        cols: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (Word, CMat)>,
    ) -> Result<Self> {
        let mut t = FpsTable::zero(n_vars, rows, cols, degree);
        for (w, m) in terms {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient at {w} is {}×{}, expected {rows}×{cols}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let mut acc = t.coefficient(&w);
            acc += m;
            t.set_coefficient(w, acc)?;
        }
        Ok(t)
    }

    /// Alphabet size.
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Coefficient row count `p`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Coefficient column count `q`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Truncation degree: coefficients are stored exactly for `|w| ≤ degree`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The coefficient at `w` (zero matrix if absent).
    pub fn coefficient(&self, w: &Word) -> CMat {
        self.terms
            .get(w)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.rows, self.cols))
    }

    /// Borrowed coefficient, if stored.
    pub fn get(&self, w: &Word) -> Option<&CMat> {
        self.terms.get(w)
    }

    /// Iterates stored `(word, coefficient)` pairs in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CMat)> {
        self.terms.iter()
    }

    /// Number of stored (nonzero) terms.
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Sets the coefficient at `w`, dropping it if negligible.
    ///
    /// # Errors
    /// [`Error::InvalidWord`] if `w` uses letters outside the alphabet;
    /// [`Error::InsufficientDegree`] if `|w| > degree`;
    /// [`Error::DimensionMismatch`] on coefficient shape mismatch.
    pub fn set_coefficient(&mut self, w: Word, value: CMat) -> Result<()> {
        if !w.is_valid_over(self.n_vars) {
            return Err(Error::InvalidWord(format!(
                "{w} over alphabet of size {}",
                self.n_vars
            )));
        }
        if w.len() > self.degree {
            return Err(Error::InsufficientDegree(format!(
                "|{w}| = {} exceeds degree {}",
                w.len(),
                self.degree
            )));
        }
        if value.nrows() != self.rows || value.ncols() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "coefficient at {w} is {}×{}, expected {}×{}",
                value.nrows(),
                value.ncols(),
                self.rows,
                self.cols
            )));
        }
        if value.norm() <= COEFF_DROP_TOL {
            self.terms.remove(&w);
        } else {
            self.terms.insert(w, value);
        }
        Ok(())
    }

    /// Lowers the truncation degree to `min(degree, d)` and drops terms
    /// beyond it.
    pub fn truncate(&self, d: usize) -> FpsTable {
        let degree = self.degree.min(d);
        let terms = self
            .terms
            .iter()
            .filter(|(w, _)| w.len() <= degree)
            .map(|(w, m)| (w.clone(), m.clone()))
            .collect();
        FpsTable {
            n_vars: self.n_vars,
            rows: self.rows,
            cols: self.cols,
            degree,
            terms,
        }
    }

    /// Entrywise scaling by a complex scalar.
    pub fn scale(&self, s: Complex64) -> FpsTable {
        let mut out = FpsTable::zero(self.n_vars, self.rows, self.cols, self.degree);
        for (w, m) in &self.terms {
            out.set_coefficient(w.clone(), m.map(|z| z * s))
                .expect("same shape");
        }
        out
    }

    /// Sum, truncated to the smaller degree.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] on shape or alphabet mismatch.
    pub fn add(&self, other: &FpsTable) -> Result<FpsTable> {
        self.check_same_shape(other)?;
        let degree = self.degree.min(other.degree);
        let mut out = FpsTable::zero(self.n_vars, self.rows, self.cols, degree);
        for (w, m) in self.terms.iter().chain(other.terms.iter()) {
            if w.len() > degree {
                continue;
            }
            let mut acc = out.coefficient(w);
            acc += m;
            out.set_coefficient(w.clone(), acc)?;
        }
        Ok(out)
    }

    /// Difference, truncated to the smaller degree.
    ///
    /// # Errors
    /// As [`FpsTable::add`].
    pub fn sub(&self, other: &FpsTable) -> Result<FpsTable> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Non-commutative product `(fg)_w = Σ_{w' w'' = w} f_{w'} g_{w''}`,
    /// truncated to the smaller degree.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] unless `self.cols == other.rows` and the
    /// alphabets agree.
    pub fn mul(&self, other: &FpsTable) -> Result<FpsTable> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "alphabets differ: {} vs {}",
                self.n_vars, other.n_vars
            )));
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}×{} by {}×{} series",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let degree = self.degree.min(other.degree);
        let mut out = FpsTable::zero(self.n_vars, self.rows, other.cols, degree);
        for (w1, m1) in &self.terms {
            if w1.len() > degree {
                continue;
            }
            for (w2, m2) in &other.terms {
                if w1.len() + w2.len() > degree {
                    continue;
                }
                let w = w1.concat(w2);
                let mut acc = out.coefficient(&w);
                acc += m1 * m2;
                out.set_coefficient(w, acc)?;
            }
        }
        Ok(out)
    }

    /// Inverse of a square series with invertible constant coefficient,
    /// exact through the stored degree:
    /// `f^{-1} = Σ_{k≤degree} (I − f_∅^{-1} f)^k f_∅^{-1}`.
    ///
    /// The `k`-th term only affects words of length ≥ k (the bracket has no
    /// constant coefficient), so stopping at `k = degree` loses nothing.
    ///
    /// # Errors
    /// [`Error::SingularConstantTerm`] if `σ_min(f_∅) < 1e-12 · σ_max(f_∅)`;
    /// [`Error::DimensionMismatch`] if the series is not square.
    pub fn invert(&self) -> Result<FpsTable> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "inverse of a {}×{} series",
                self.rows, self.cols
            )));
        }
        let f0 = self.coefficient(&Word::empty());
        let f0_inv = linalg::checked_inverse(&f0).map_err(|_| Error::SingularConstantTerm)?;
        let f0_inv_series = FpsTable::constant(self.n_vars, f0_inv, self.degree);
        // bracket = I − f_∅^{-1} f  (no constant term).
        let bracket = FpsTable::identity(self.n_vars, self.rows, self.degree)
            .sub(&f0_inv_series.mul(self)?)?;
        let mut out = f0_inv_series.clone();
        let mut power = bracket.clone();
        for _ in 1..=self.degree {
            out = out.add(&power.mul(&f0_inv_series)?)?;
            power = power.mul(&bracket)?;
        }
        Ok(out)
    }

    /// Evaluates the series on an `N`-tuple of `n×n` matrices:
    /// `f(Z) = Σ_w f_w ⊗ Z^w` with `Z^∅ = I_n`.  Result is `(p·n)×(q·n)`.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] unless exactly `n_vars` square matrices
    /// of one common size are supplied.
    pub fn eval(&self, z: &[CMat]) -> Result<CMat> {
        let n = check_tuple(self.n_vars, z)?;
        let mut acc = CMat::zeros(self.rows * n, self.cols * n);
        for (w, m) in &self.terms {
            acc += linalg::kron(m, &word_power(z, w, n));
        }
        Ok(acc)
    }

    /// Largest coefficient Frobenius norm (0 for the zero series).
    pub fn max_coefficient_norm(&self) -> f64 {
        self.terms.values().map(|m| m.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance between two tables on their common degree:
    /// `max_{|w| ≤ min degree} ‖f_w − g_w‖`.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] on shape mismatch.
    pub fn max_coefficient_distance(&self, other: &FpsTable) -> Result<f64> {
        self.check_same_shape(other)?;
        let degree = self.degree.min(other.degree);
        let mut dist: f64 = 0.0;
        for (w, m) in &self.terms {
            if w.len() <= degree {
                dist = dist.max((m - other.coefficient(w)).norm());
            }
        }
        for (w, m) in &other.terms {
            if w.len() <= degree && !self.terms.contains_key(w) {
                dist = dist.max(m.norm());
            }
        }
        Ok(dist)
    }

    fn check_same_shape(&self, other: &FpsTable) -> Result<()> {
        if self.n_vars != other.n_vars || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "series shapes differ: {} vars {}×{} vs {} vars {}×{}",
                self.n_vars, self.rows, self.cols, other.n_vars, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

/// Validates an evaluation tuple and returns the common size `n`.
pub(crate) fn check_tuple(n_vars: usize, z: &[CMat]) -> Result<usize> {
    if z.len() != n_vars {
        return Err(Error::DimensionMismatch(format!(
            "expected {n_vars} matrices, got {}",
            z.len()
        )));
    }
    let n = z.first().map_or(1, |m| m.nrows());
    for (k, m) in z.iter().enumerate() {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix {} is {}×{}, expected {n}×{n}",
                k + 1,
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(n)
}

/// `Z^w = Z_{i1} Z_{i2} ⋯ Z_{i|w|}` with `Z^∅ = I_n`.
pub(crate) fn word_power(z: &[CMat], w: &Word, n: usize) -> CMat {
    let mut acc = CMat::identity(n, n);
    for &l in w.letters() {
        acc = acc * &z[(l - 1) as usize];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use approx::assert_relative_eq;

    /// Independent scalar oracle: coefficients of (a0 + a1 z)^{-1} in one
    /// variable via the solve-forward recurrence
    /// b_0 = 1/a_0,  b_m = −(a_1 b_{m−1})/a_0.
    fn scalar_inverse_oracle(a0: f64, a1: f64, degree: usize) -> Vec<f64> {
        let mut b = vec![1.0 / a0];
        for m in 1..=degree {
            b.push(-a1 * b[m - 1] / a0);
        }
        b
    }

    fn scalar(n_vars: usize, entries: &[(Vec<u32>, f64)], degree: usize) -> FpsTable {
        FpsTable::from_terms(
            n_vars,
            1,
            1,
            degree,
            entries.iter().map(|(ls, v)| {
                (
                    Word::from_letters(ls, n_vars).unwrap(),
                    CMat::from_row_slice(1, 1, &[re(*v)]),
                )
            }),
        )
        .unwrap()
    }

    fn coeff(f: &FpsTable, letters: &[u32]) -> f64 {
        f.coefficient(&Word::from_letters(letters, f.n_vars()).unwrap())[(0, 0)].re
    }

    #[test]
    fn geometric_series_inverse() {
        // (1 − z)^{-1} = 1 + z + z² + …; oracle recurrence agrees.
        let f = scalar(1, &[(vec![], 1.0), (vec![1], -1.0)], 8);
        let inv = f.invert().unwrap();
        let oracle = scalar_inverse_oracle(1.0, -1.0, 8);
        for m in 0..=8 {
            assert_relative_eq!(coeff(&inv, &vec![1; m]), oracle[m], epsilon = 1.0e-13);
            assert_relative_eq!(oracle[m], 1.0, epsilon = 0.0); // frozen value
        }
    }

    #[test]
    fn alternating_inverse_against_oracle() {
        // (1 + z)^{-1} = 1 − z + z² − …
        let f = scalar(1, &[(vec![], 1.0), (vec![1], 1.0)], 6);
        let inv = f.invert().unwrap();
        let oracle = scalar_inverse_oracle(1.0, 1.0, 6);
        for m in 0..=6 {
            assert_relative_eq!(coeff(&inv, &vec![1; m]), oracle[m], epsilon = 1.0e-13);
            assert_relative_eq!(oracle[m], (-1.0f64).powi(m as i32), epsilon = 0.0);
        }
    }

    #[test]
    fn invert_round_trip_is_identity() {
        let f = scalar(
            2,
            &[
                (vec![], 2.0),
                (vec![1], 1.0),
                (vec![2], -0.5),
                (vec![2, 1], 0.25),
            ],
            6,
        );
        let inv = f.invert().unwrap();
        let prod = f.mul(&inv).unwrap();
        let id = FpsTable::identity(2, 1, 6);
        assert!(prod.max_coefficient_distance(&id).unwrap() <= 1.0e-12);
        let prod2 = inv.mul(&f).unwrap();
        assert!(prod2.max_coefficient_distance(&id).unwrap() <= 1.0e-12);
    }

    #[test]
    fn two_variable_rational_pattern() {
        // (1 + z1 + z2)^{-1}(z1 + z2 − 1): every word of length m ≥ 1 has
        // coefficient 2(−1)^{m−1}, the empty word −1.
        let den = scalar(2, &[(vec![], 1.0), (vec![1], 1.0), (vec![2], 1.0)], 6);
        let num = scalar(2, &[(vec![], -1.0), (vec![1], 1.0), (vec![2], 1.0)], 6);
        let f = den.invert().unwrap().mul(&num).unwrap();
        for w in crate::words::words_up_to(2, 6) {
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
    fn mul_is_associative_on_polynomials() {
        let f = scalar(2, &[(vec![], 1.0), (vec![1], 2.0)], 5);
        let g = scalar(2, &[(vec![2], 1.0), (vec![1, 2], -1.0)], 5);
        let h = scalar(2, &[(vec![], -0.5), (vec![2, 2], 3.0)], 5);
        let lhs = f.mul(&g).unwrap().mul(&h).unwrap();
        let rhs = f.mul(&g.mul(&h).unwrap()).unwrap();
        assert!(lhs.max_coefficient_distance(&rhs).unwrap() <= 1.0e-13);
    }

    #[test]
    fn mul_respects_word_order_not_commutativity() {
        // z1·z2 ≠ z2·z1 as words.
        let a = scalar(2, &[(vec![1], 1.0)], 3);
        let b = scalar(2, &[(vec![2], 1.0)], 3);
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        assert_relative_eq!(coeff(&ab, &[1, 2]), 1.0);
        assert_relative_eq!(coeff(&ab, &[2, 1]), 0.0);
        assert_relative_eq!(coeff(&ba, &[2, 1]), 1.0);
    }

    #[test]
    fn eval_polynomial_homomorphism() {
        // For polynomials fully inside the degree bound, eval(f·g) = f(Z)·g(Z).
        let f = scalar(2, &[(vec![], 1.0), (vec![1], 2.0)], 4);
        let g = scalar(2, &[(vec![2], 1.0), (vec![1], -1.0)], 4);
        let z1 = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]);
        let z2 = CMat::from_row_slice(2, 2, &[re(0.5), re(0.0), re(-0.25), re(0.0)]);
        let z = vec![z1, z2];
        let lhs = f.mul(&g).unwrap().eval(&z).unwrap();
        let rhs = f.eval(&z).unwrap() * g.eval(&z).unwrap();
        assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1.0e-12);
    }

    #[test]
    fn add_truncates_to_min_degree() {
        let f = scalar(1, &[(vec![1, 1, 1], 1.0)], 3);
        let g = scalar(1, &[(vec![1], 1.0)], 2);
        let s = f.add(&g).unwrap();
        assert_eq!(s.degree(), 2);
        assert_eq!(s.n_terms(), 1, "the degree-3 term is outside the sum's degree");
    }

    #[test]
    fn singular_constant_term_rejected() {
        let f = scalar(1, &[(vec![1], 1.0)], 3);
        assert!(matches!(
            f.invert(),
            Err(Error::SingularConstantTerm)
        ));
    }

    #[test]
    fn tiny_coefficients_are_dropped() {
        let mut f = FpsTable::zero(1, 1, 1, 2);
        f.set_coefficient(
            Word::from_letters(&[1], 1).unwrap(),
            CMat::from_row_slice(1, 1, &[re(1.0e-15)]),
        )
        .unwrap();
        assert_eq!(f.n_terms(), 0);
    }
}
