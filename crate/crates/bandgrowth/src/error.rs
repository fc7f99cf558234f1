//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while building or checking windowed matrices.
#[derive(Debug, Error)]
pub enum Error {
    /// An entry rule produced a nonzero value outside its declared band.
    /// Almost always means a miscoded generator.
    #[error("matrix `{matrix}`: nonzero entry at ({row}, {col}) outside the declared band")]
    DeclaredCurveViolation { matrix: String, row: u64, col: u64 },

    /// Two operands disagree on window size or field.
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    /// An exponent parameter fell outside its admissible range.
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    /// A log-log fit was requested on an identically zero profile.
    #[error("band profile is identically zero")]
    ZeroProfile,

    /// A regular-representation action keeps writing into the same output
    /// coordinate; the operator cannot be column-finite.
    #[error("column-infinite action detected within the window for `{0}`")]
    NotColumnFinite(String),

    /// The window is too small for the requested computation.
    #[error("window of size {window} exhausted: {context}")]
    WindowExhausted { window: u64, context: String },

    /// A numeric parameter fell outside its admissible range.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// A per-block matrix has the wrong dimensions.
    #[error("block shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The target exponent does not shrink the growth class.
    #[error("not a stretch: {0}")]
    NotAStretch(String),

    /// The operation needs block sizes rounded to powers of two.
    #[error("padded block structure required")]
    PaddingRequired,

    /// The recipe builder failed to produce a combination for a matrix unit.
    /// Must not happen for the default generator set; treated as a bug.
    #[error("no recipe found for matrix unit ({k}, {i}, {j})")]
    RecipeNotFound { k: u64, i: u64, j: u64 },

    /// Two slot images of an interleaving overlap.
    #[error("slot collision in interleave combine at ({a}, {b})")]
    SlotCollision { a: u64, b: u64 },

    /// Word enumeration exceeded the configured budget.
    #[error("word sample limit exceeded: {0}")]
    SampleLimitExceeded(String),

    /// An embedding sent a nonzero idempotent to zero on the window.
    #[error("idempotent image is zero on the window: {0}")]
    NotAnIdempotentImage(String),

    /// GF(p) requested for a composite or oversized modulus.
    #[error("{0} is not an admissible prime modulus (need a prime below 2^61)")]
    NotPrime(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed input file or parameter string.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
