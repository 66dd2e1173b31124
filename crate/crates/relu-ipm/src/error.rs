use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has (near-)zero norm; cannot project to the sphere")]
    ZeroVector,

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample set is empty")]
    EmptySample,

    #[error("group is empty: {0}")]
    EmptyGroup(String),

    #[error("complete separation: logistic MLE diverges ({0})")]
    Separation(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("treated moments lie outside the control convex hull")]
    HullViolation,

    #[error("degenerate draw: one group stayed empty after {0} regeneration attempts")]
    DegenerateDraw(u32),

    #[error("score out of [0,1]: {0}")]
    ScoreOutOfRange(f64),

    #[error("config parse error: {0}")]
    ParseError(String),

    #[error("config validation failed:\n{}", .0.join("\n"))]
    ValidationError(Vec<String>),

    #[error("csv schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("non-binary treatment value {value:?} at line {line}")]
    NonBinaryTreatment { value: String, line: usize },

    #[error("input file is empty: {0}")]
    EmptyFile(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ParseError(_) | Error::ValidationError(_) => 2,
            Error::SchemaMismatch(_)
            | Error::NonBinaryTreatment { .. }
            | Error::EmptyFile(_)
            | Error::EmptySample
            | Error::EmptyGroup(_)
            | Error::ScoreOutOfRange(_)
            | Error::DimensionMismatch(_)
            | Error::Io(_) => 3,
            Error::ZeroVector
            | Error::Infeasible(_)
            | Error::Separation(_)
            | Error::NonConvergence(_)
            | Error::HullViolation
            | Error::DegenerateDraw(_) => 4,
        }
    }
}
