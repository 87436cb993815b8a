use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{what} index {index} out of range (limit {limit})")]
    Bounds {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("stream error: {0}")]
    Stream(String),

    /// Every candidate frame gave a prefix probability of zero.
    #[error("alignment not found: prefix is infeasible in the search window")]
    AlignmentNotFound,

    #[error("bad magic bytes {found:?}, expected \"CTCL\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported lattice container version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("truncated input at byte offset {offset}: needed {needed} more bytes")]
    Truncated { offset: u64, needed: u64 },

    #[error("row {row} is not normalized: logsumexp = {logsumexp}")]
    Denormalized { row: usize, logsumexp: f64 },

    #[error("score undefined: {0}")]
    UndefinedScore(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line tool: 2 for configuration
    /// problems, 3 for unreadable or inconsistent fixtures, 4 for undefined
    /// scores, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Fixture(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::Truncated { .. }
            | Error::Denormalized { .. } => 3,
            Error::UndefinedScore(_) | Error::Evaluation(_) => 4,
            _ => 1,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
