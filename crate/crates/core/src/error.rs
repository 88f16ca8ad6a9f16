use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix size {size} too small, need more than {min}")]
    SizeTooSmall { size: usize, min: usize },

    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("ill-conditioned decomposition: denominator roots {cluster:?} are not separated")]
    IllConditioned { cluster: Vec<f64> },

    #[error("lambda {lambda} outside path range [{min}, {max}]")]
    OutOfRange { lambda: f64, min: f64, max: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("bad bracket: {0}")]
    Bracket(String),

    #[error("tolerance failure: {0}")]
    Tolerance(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it came from.
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 no solution, 3 tolerance failure, 4 config error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::NoSolution(_) => 2,
            Error::Tolerance(_) => 3,
            Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_) | Error::OutOfRange { .. } => 4,
            _ => 1,
        }
    }
}
