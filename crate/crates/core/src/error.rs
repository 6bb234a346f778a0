use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet size must be at least 2 (and at most 255), got {0}")]
    InvalidAlphabet(usize),
    #[error("symbol {symbol} is outside the alphabet 1..={n}")]
    SymbolOutOfRange { symbol: usize, n: usize },
    #[error("alphabet mismatch: expected N={expected}, found N={found}")]
    AlphabetMismatch { expected: usize, found: usize },
    #[error("level mismatch: expected level {expected}, found level {found}")]
    LevelMismatch { expected: usize, found: usize },
    #[error("point {point} has depth {depth}, which exceeds level {level}")]
    DepthExceedsLevel {
        point: String,
        depth: usize,
        level: usize,
    },
    #[error("point {point} is not a new point of level {level}")]
    NotNewAtLevel { point: String, level: usize },
    #[error("{what} would need {requested} entries, above the cap of {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular system")]
    Singular,
    #[error("requested depth {requested} is below the current depth {current}")]
    DepthDecrease { requested: usize, current: usize },
    #[error("level must be at least {min}, got {got}")]
    LevelTooSmall { min: usize, got: usize },
    #[error("effective resistance of a point with itself is undefined")]
    SamePoint,
    #[error("no constraint given")]
    NoConstraints,
    #[error("no admissible pair exists for N={n}, m={m}")]
    NoAdmissiblePair { n: usize, m: usize },
    #[error("increment {which} = {value} violates the admissibility bound {bound}")]
    InadmissibleIncrement {
        which: &'static str,
        value: String,
        bound: String,
    },
    #[error("prefix of length {len} is shorter than the requested level {m_max}")]
    PrefixTooShort { len: usize, m_max: usize },
    #[error("harmonic perturbation is nonzero on the boundary at {point}")]
    NonzeroOnBoundary { point: String },
    #[error("float residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
