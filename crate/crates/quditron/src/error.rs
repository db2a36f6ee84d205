//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any quditron operation.
#[derive(Debug, Error)]
pub enum Error {
    /// All θ_k are at (or numerically at) π/2, so the skew-matrix denominator
    /// s₁ − 1 vanishes. The closed-form state path is total and must be used instead.
    #[error(
        "degenerate parameter point: |s1 - 1| = {gap:.3e} <= 1e-9; the skew-matrix path is singular here"
    )]
    DegenerateParameter { gap: f64 },

    /// The dense linear solve hit a zero pivot.
    #[error("singular linear system at pivot {pivot_index}")]
    SingularSolve { pivot_index: usize },

    /// A count exceeded the platform integer range.
    #[error("count overflow: {context}")]
    Overflow { context: &'static str },

    /// A computation produced or received a non-finite value.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// An SVM problem contained only one label value.
    #[error("training set contains a single class; need both -1 and +1 labels")]
    SingleClass,

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A class required by the trainer is absent from the dataset.
    #[error("class {label} has no samples in the training set")]
    ClassMissing { label: usize },

    /// A sequential-training step was left with a single surviving class
    /// before the final step.
    #[error("elimination step {step} has one surviving class before termination")]
    DegenerateStep { step: usize },

    #[error("model schema version {got} is not supported (expected {expected})")]
    SchemaVersionMismatch { expected: u32, got: u32 },

    #[error("corrupt model file: {reason}")]
    CorruptFile { reason: String },

    /// An IDX stream did not start with a recognized magic number.
    #[error("bad IDX magic 0x{got:08x} (expected 0x00000803 for images or 0x00000801 for labels)")]
    BadMagic { got: u32 },

    /// An IDX payload was shorter than its header promised.
    #[error("truncated IDX payload: header promises {expected} bytes, stream has {got}")]
    TruncatedPayload { expected: usize, got: usize },

    /// IDX dimensions multiply beyond addressable memory.
    #[error("IDX dimensions overflow the platform integer range")]
    DimensionOverflow,

    /// Covariance has fewer strictly positive eigenvalues than the
    /// requested number of components.
    #[error("rank deficient: only {rank} positive eigenvalues, {requested} components requested")]
    RankDeficient { rank: usize, requested: usize },

    /// A class has fewer samples than the requested fold count.
    #[error("class {label} has {count} samples, fewer than {folds} folds")]
    ClassTooSmall {
        label: usize,
        count: usize,
        folds: usize,
    },

    #[error("evaluation split is empty")]
    EmptySplit,

    /// Statevector simulation is capped at d = 24.
    #[error("qudit dimension {d} exceeds the statevector simulation cap of {max}")]
    DimensionTooLarge { d: usize, max: usize },

    #[error("iteration failed to converge in {context}")]
    ConvergenceFailure { context: &'static str },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
