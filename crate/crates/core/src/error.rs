//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants are
//! grouped by failure class rather than by module: domain violations on
//! inputs, numerical rank/definiteness failures, solver diagnostics, and
//! configuration / I/O problems from the experiment driver.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Error conditions surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a documented domain restriction (non-positive
    /// distance, reflection bound outside `[0, 1]`, empty candidate count,
    /// and similar).
    #[error("domain violation: {0}")]
    Domain(String),

    /// Two arguments that must agree in dimension did not.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        /// What was being checked.
        context: &'static str,
        /// Dimension implied by the other arguments.
        expected: usize,
        /// Dimension actually supplied.
        actual: usize,
    },

    /// A combiner or channel column that must be nonzero had zero norm.
    #[error("zero vector for tag {tag} in {context}")]
    ZeroVector {
        /// What the vector was.
        context: &'static str,
        /// Tag index (0-based).
        tag: usize,
    },

    /// A matrix that must be positive semidefinite had an eigenvalue below
    /// the accepted tolerance.
    #[error("matrix not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite {
        /// Most negative eigenvalue found.
        min_eigenvalue: f64,
    },

    /// A matrix required to be well conditioned (e.g. for a zero-forcing
    /// solve) was numerically rank deficient.
    #[error("rank-deficient matrix: condition number {condition:.3e} exceeds {limit:.1e}")]
    RankDeficient {
        /// Estimated 2-norm condition number.
        condition: f64,
        /// Accepted bound.
        limit: f64,
    },

    /// An objective callback produced a non-finite value at a feasible point.
    #[error("objective returned a non-finite value ({value}) during {context}")]
    NonFiniteObjective {
        /// Offending value.
        value: f64,
        /// Solver or operation that observed it.
        context: &'static str,
    },

    /// An exhaustive search was requested over more corners than the
    /// documented enumeration limit allows.
    #[error("corner enumeration over {tags} tags exceeds the limit of {limit}")]
    EnumerationLimit {
        /// Number of tags requested.
        tags: usize,
        /// Largest supported count.
        limit: usize,
    },

    /// A configuration file or value could not be parsed.
    #[error("configuration error: {0}")]
    Config(String),

    /// A scheme name in an experiment configuration was not recognized.
    #[error("unknown scheme name: {0:?}")]
    UnknownScheme(String),

    /// Reading or writing a file failed; the path is preserved for context.
    #[error("i/o failure on {path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand for a [`Error::Domain`] with a formatted message.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Shorthand for a [`Error::Config`] with a formatted message.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
