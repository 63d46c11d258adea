//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the library.
///
/// The distinction between variants matters to callers: input and dimension
/// problems are usage errors, while [`Error::Numerical`] and friends signal
/// that a computation could not be completed at the requested accuracy.
/// Classification *outcomes* (a series failing to be J-unitary, say) are not
/// errors; the classification operations return reports instead.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or word dimensions do not match the operation's contract.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A word contains a letter outside `1..=n_vars`.
    #[error("invalid word: {0}")]
    InvalidWord(String),

    /// An operation needs coefficients beyond the stored truncation degree.
    #[error("insufficient truncation degree: {0}")]
    InsufficientDegree(String),

    /// The constant coefficient of a series is numerically singular, so the
    /// series has no inverse.
    #[error("constant coefficient is numerically singular")]
    SingularConstantTerm,

    /// A matrix that must be invertible is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// The node is not minimal but the operation requires minimality.
    #[error("node is not minimal: {0}")]
    NotMinimal(String),

    /// The supplied J is not a signature matrix (Hermitian involution).
    #[error("not a signature matrix: {0}")]
    InvalidSignature(String),

    /// A subspace family is inconsistent with the node or fails a required
    /// property (invariance, non-degeneracy, complementarity).
    #[error("invalid subspace family: {0}")]
    InvalidSubspace(String),

    /// No admissible scalar parameter could be found (e.g. every scanned
    /// unimodular point hit the spectrum).
    #[error("no admissible parameter: {0}")]
    NoAdmissibleParameter(String),

    /// A numerical procedure failed to reach the requested accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A well-formed input failed the classification being certified (for
    /// example, a certificate-producing routine found no valid certificate
    /// because the series is not in the class).  Classification wrappers
    /// catch this variant and turn it into a negative report.
    #[error("classification failed: {0}")]
    NotInClass(String),

    /// Malformed input file or JSON payload.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Convenient result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
