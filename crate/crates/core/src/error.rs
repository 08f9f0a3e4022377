use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("reward {value} at arm {arm}, round {round} is outside [0,1]")]
    RewardOutOfRange { arm: usize, round: usize, value: f64 },

    #[error("invalid dimensions: k={k}, t={t}")]
    BadDimensions { k: usize, t: usize },

    #[error("sign-tree depths differ: {left} vs {right}")]
    DepthMismatch { left: u32, right: u32 },

    #[error("window [{t0}, {t0}+{w}-1] does not fit horizon {t}")]
    WindowOutOfRange { t0: usize, w: usize, t: usize },

    #[error("scale range [{lo}, {hi}] invalid for horizon with max scale {max}")]
    ScaleRange { lo: u32, hi: u32, max: u32 },

    #[error("sequence length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("walk enumeration refused: depth {depth} exceeds cutoff {max}")]
    EnumerationTooLarge { depth: u32, max: u32 },

    #[error("phi undefined: window starting at round {start} (length {len}) has no nonzero arm")]
    PhiUndefined { start: usize, len: usize },

    #[error("sketch item {item} outside universe of size {k}")]
    ItemOutOfRange { item: usize, k: usize },

    #[error("sketch weight {weight} outside [0,1]")]
    WeightOutOfRange { weight: f64 },

    #[error("sketch of width {width} x depth {depth} needs {bits} bits, over the cap of {cap}")]
    SketchTooLarge { width: usize, depth: usize, bits: u64, cap: u64 },

    #[error("sketch has observed no updates")]
    EmptySketch,

    #[error("learner protocol violation: {0}")]
    LearnerProtocol(&'static str),

    #[error("block count {q} does not divide horizon {t}")]
    BlockCount { q: usize, t: usize },

    #[error("block length {block_len} cannot host {support} exploration rounds")]
    BlockTooShort { block_len: usize, support: usize },

    #[error("memory descriptor `{name}` declares an unbounded or invalid range")]
    UnboundedDescriptor { name: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("summary refused: no trial records")]
    EmptySummary,

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
