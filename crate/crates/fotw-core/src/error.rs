use thiserror::Error;

/// Syntax error with position information, for formula and structure files.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// Domain errors: violated preconditions of the individual operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("formula is not in prenex normal form")]
    NotPrenex,

    #[error("formula is not straight: {0}")]
    NotStraight(String),

    #[error("formula is not in negation normal form")]
    NotNnf,

    #[error("elimination ordering violates the depth function: {0}")]
    OrderingViolatesDepth(String),

    #[error("ordering is not a permutation of the vertex set: {0}")]
    NotAPermutation(String),

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("stratified graph is not normalized: {0}")]
    NotNormalized(String),

    #[error("instance too large: {0} (set FOTW_GUARD_OVERRIDE=1 to lift the guard)")]
    TooLarge(String),

    #[error("replacement side condition violated: {0}")]
    SideCondition(String),

    #[error("no atom uses a variable from the given set")]
    EmptyWitness,

    #[error("subformula exceeds the variable budget: {0}")]
    WidthExceedsK(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("unknown vertex: {0}")]
    UnknownVertex(String),
}

/// True when size guards are lifted via `FOTW_GUARD_OVERRIDE=1`.
pub fn guard_override() -> bool {
    std::env::var("FOTW_GUARD_OVERRIDE").map(|v| v == "1").unwrap_or(false)
}
