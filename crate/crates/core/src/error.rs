use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("progression {offset} + ({len} - 1) * {gap} leaves [0, {modulus})")]
    ProgressionOutOfRange {
        offset: u64,
        gap: u64,
        len: u64,
        modulus: u64,
    },

    /// A randomized step kept failing its acceptance test.
    #[error("retries exhausted at level {level} during {stage} after {attempts} attempts; worst violation {worst:.6e} at {witness}")]
    RetriesExhausted {
        level: usize,
        stage: &'static str,
        attempts: usize,
        worst: f64,
        witness: String,
    },

    #[error("invariant `{name}` violated at level {level}: {detail}")]
    Invariant {
        name: &'static str,
        level: usize,
        detail: String,
    },

    #[error("level {ell} exceeds level {j}")]
    LevelOrder { ell: usize, j: usize },

    #[error("level {0} has not been built")]
    MissingLevel(usize),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("L^{p} tail diverges: the decay envelope is not integrable")]
    DivergentTail { p: f64 },

    #[error("quadrature grid too coarse: halving the step changed the value by {relative_change:.3e}")]
    GridTooCoarse { relative_change: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
