//! Words over the free semigroup on `N` generators.
//!
//! A [`Word`] is a finite product of generators `g_1 … g_N`, stored as its
//! sequence of 1-based letters.  The empty word is the semigroup identity.
//! Words are totally ordered by the *graded lexicographic* order (shorter
//! words first, ties broken letter-by-letter); every word-indexed structure
//! in this crate — series tables, stacked observability/controllability
//! matrices, Hankel matrices, kernel tables — uses this one order, so row
//! and column layouts are reproducible.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A word over the generators `g_1, …, g_N`, stored as 1-based letters.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    /// The empty word (semigroup identity).
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from 1-based letters, checking them against the
    /// alphabet size.
    ///
    /// # Errors
    /// Returns [`Error::InvalidWord`] if any letter is `0` or exceeds
    /// `n_vars`.
    pub fn from_letters(letters: &[u32], n_vars: usize) -> Result<Self> {
        for &l in letters {
            if l == 0 || l as usize > n_vars {
                return Err(Error::InvalidWord(format!(
                    "letter {l} outside 1..={n_vars}"
                )));
            }
        }
        Ok(Word(letters.to_vec()))
    }

    /// Builds a word without validating letters (internal use where the
    /// alphabet is known to match).
    pub(crate) fn from_letters_unchecked(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    /// A single-letter word `g_k` (1-based `k`).
    pub fn generator(k: u32) -> Self {
        Word(vec![k])
    }

    /// The 1-based letters of the word.
    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    /// Word length `|w|`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether this is the empty word.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `w · w2`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Appends a single letter on the right: `w · g_k`.
    pub fn append(&self, letter: u32) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    /// The transpose `w^T` (letters reversed).  It is an anti-homomorphism:
    /// `(w · v)^T = v^T · w^T` and an involution `(w^T)^T = w`.
    pub fn transpose(&self) -> Word {
        let mut letters = self.0.clone();
        letters.reverse();
        Word(letters)
    }

    /// All splittings `w = u · v` as pairs `(u, v)`, in order of growing
    /// prefix length (so `(∅, w)` first, `(w, ∅)` last).
    pub fn splits(&self) -> Vec<(Word, Word)> {
        (0..=self.0.len())
            .map(|i| (Word(self.0[..i].to_vec()), Word(self.0[i..].to_vec())))
            .collect()
    }

    /// Checks all letters lie in `1..=n_vars`.
    pub fn is_valid_over(&self, n_vars: usize) -> bool {
        self.0.iter().all(|&l| l >= 1 && l as usize <= n_vars)
    }
}

impl Ord for Word {
    /// Graded lexicographic order: compare lengths first, then letters.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|l| format!("g{l}")).collect();
        write!(f, "{}", parts.join(""))
    }
}

/// All words of exactly `len` letters over `n_vars` generators, in
/// lexicographic order.
pub fn words_of_length(n_vars: usize, len: usize) -> Vec<Word> {
    if len == 0 {
        return vec![Word::empty()];
    }
    if n_vars == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n_vars.pow(len as u32));
    let mut current = vec![1u32; len];
    loop {
        out.push(Word(current.clone()));
        // Odometer increment in base n_vars over 1-based letters.
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (current[pos] as usize) < n_vars {
                current[pos] += 1;
                for c in current.iter_mut().skip(pos + 1) {
                    *c = 1;
                }
                break;
            }
        }
    }
}

/// All words of length at most `max_len`, in graded lexicographic order.
pub fn words_up_to(n_vars: usize, max_len: usize) -> Vec<Word> {
    let mut out = Vec::with_capacity(count_words_up_to(n_vars, max_len));
    for len in 0..=max_len {
        out.extend(words_of_length(n_vars, len));
    }
    out
}

/// Number of words of length at most `max_len`: `Σ_{l≤max_len} n_vars^l`.
pub fn count_words_up_to(n_vars: usize, max_len: usize) -> usize {
    let mut total = 0usize;
    let mut pow = 1usize;
    for _ in 0..=max_len {
        total += pow;
        pow = pow.saturating_mul(n_vars);
    }
    total
}
