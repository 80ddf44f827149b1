use std::path::PathBuf;

/// Errors raised by the memory-state engine, the Fock oracle and the lab.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for {len} modes")]
    ModeIndex { index: usize, len: usize },

    #[error("states do not share the same mode list")]
    ModeMismatch,

    #[error("code has {found} entries, expected {expected}")]
    CodeLength { expected: usize, found: usize },

    #[error("truncation budget exceeded: discarded norm^2 {tail:e} > {budget:e} at dim {dim}")]
    TruncationBudget { tail: f64, budget: f64, dim: usize },

    #[error("series for the exponential action did not converge within {cap} {what}")]
    NonConvergence { what: &'static str, cap: usize },

    #[error("effective squeeze parameter {theta} too close to zero for this check")]
    DegenerateTheta { theta: f64 },

    #[error("mode {mode} has zero occupation (zero temperature, beta is infinite)")]
    ZeroOccupation { mode: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("memory id {0:?} already present in registry")]
    DuplicateId(String),

    #[error("memory id {0:?} not found in registry")]
    UnknownId(String),

    #[error(
        "registry schema version {found} is not supported (expected {expected}); \
         re-export the registry with this tool version"
    )]
    SchemaVersion { found: u32, expected: u32 },

    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used in the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::ModeIndex { .. } => "mode-index",
            Error::ModeMismatch => "mode-mismatch",
            Error::CodeLength { .. } => "code-length",
            Error::TruncationBudget { .. } => "truncation-budget",
            Error::NonConvergence { .. } => "non-convergence",
            Error::DegenerateTheta { .. } => "degenerate-theta",
            Error::ZeroOccupation { .. } => "zero-occupation",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DuplicateId(_) => "duplicate-id",
            Error::UnknownId(_) => "unknown-id",
            Error::SchemaVersion { .. } => "schema-version",
            Error::Malformed { .. } => "malformed",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
