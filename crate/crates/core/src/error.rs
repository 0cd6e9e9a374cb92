//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by treebank parsing, encoding, and corruption.
#[derive(Debug, Error)]
pub enum Error {
    /// A line of an input file could not be parsed.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A sentence violates a structural invariant (head range, rooted-tree shape).
    #[error("sentence {sentence}: {msg}")]
    Invalid { sentence: usize, msg: String },

    /// Two inputs that must be token-aligned are not.
    #[error("alignment: {0}")]
    Alignment(String),

    /// A projective-only operation was applied to a non-projective tree.
    #[error("tree is not projective")]
    NotProjective,

    /// The model cannot supply the flips a target accuracy demands, either
    /// because it observed no errors at all or because every tag with
    /// evidence saturates below the demand.
    #[error(
        "no error evidence: target accuracy {target} demands {demanded} flips \
         but the model can supply at most {capacity}"
    )]
    NoErrorEvidence {
        target: f64,
        demanded: u64,
        capacity: u64,
    },

    /// Corruption could not hit the target error count within tolerance.
    #[error(
        "tolerance unreachable after {attempts} attempts: target accuracy {target:.4}, \
         best achieved {best:.4}"
    )]
    Tolerance {
        target: f64,
        best: f64,
        attempts: u32,
    },

    /// Any other data-level problem (bad ratios, empty treebank, label counts).
    #[error("{0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
