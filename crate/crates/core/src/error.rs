use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fewer than k+1 points: got {found}, need at least {needed}")]
    TooFewPoints { found: usize, needed: usize },

    #[error("mesh has no valid triangles")]
    NoTriangles,

    #[error("vertex {0} is not connected to anything")]
    IsolatedVertex(usize),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NotConverged {
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("k-means failed: {0}")]
    KMeans(String),

    #[error("shape graph has {nodes} nodes, limit is {limit}")]
    GraphTooLarge { nodes: usize, limit: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// True when the failure is caused by the caller's input (bad file,
    /// bad parameter) rather than by a numerical stage of the pipeline.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidInput(_)
            | Error::TooFewPoints { .. }
            | Error::NoTriangles
            | Error::IsolatedVertex(_)
            | Error::Json(_) => true,
            Error::Stage { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
