use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rectangle [{x0}, {x1}] x [{y0}, {y1}]: extents must be positive")]
    InvalidRectangle { x0: f64, y0: f64, x1: f64, y1: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate triangle (area {area:e})")]
    DegenerateTriangle { area: f64 },

    #[error("coefficient violation in problem `{problem}` at ({x}, {y}): {what}")]
    Coefficient {
        problem: String,
        x: f64,
        y: f64,
        what: String,
    },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver failed for eigenvalue {index}: {reason}")]
    EigenSolve { index: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("level n={level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn at_level(self, level: usize) -> Self {
        match self {
            e @ Error::AtLevel { .. } => e,
            e => Error::AtLevel {
                level,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by the study configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidRectangle { .. } | Error::InvalidArgument(_) => true,
            Error::AtLevel { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
