//! Realization theory for rational formal power series in non-commuting
//! indeterminates.
//!
//! The crate works with formal power series (FPS) whose coefficients are
//! complex matrices indexed by words over a finite alphabet `g_1, …, g_N`,
//! and with structured state-space realizations ("nodes") whose state space
//! splits into one component per indeterminate.  On top of the basic
//! arithmetic it provides:
//!
//! * minimality analysis (truncated observability/controllability, Hankel
//!   ranks, reduction to a minimal node, uniqueness of similarity),
//! * classification of series that take J-unitary values on the
//!   non-commutative analogues of the line (skew-Hermitian tuples) and the
//!   circle (unitary tuples), together with the block-diagonal Hermitian
//!   matrix certifying the classification,
//! * inverse problems that complete `(C, A)` or `(A, B)` data to such a
//!   series, Cayley transforms between the two settings, inner/balanced
//!   forms, and selfadjoint analogues,
//! * minimal factorizations driven by invariant subspace families, and
//! * reproducing-kernel coefficient tables computed by three independent
//!   routes, plus the backward-shift model realization built from them.
//!
//! Matrices are dense [`nalgebra`] matrices over [`num_complex::Complex64`].
//! All word-indexed data structures use a graded lexicographic order so that
//! serialized artifacts and stacked matrices are deterministic.

pub mod circle;
pub mod error;
pub mod factorization;
pub mod fps;
pub mod grnode;
pub mod inner;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod line;
pub mod minimal;
pub mod sampling;
pub mod selfadjoint;
pub mod structured;
pub mod words;

pub use error::{Error, Result};
pub use fps::FpsTable;
pub use grnode::GrNode;
pub use kernels::KernelTable;
pub use linalg::{CMat, CVec};
pub use structured::BlockDiag;
pub use words::Word;
