use thiserror::Error;

/// Errors raised while building problems, assembling schemes or writing results.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh too coarse: dx = {dx} leaves no interior node on a domain of length {length}")]
    MeshTooCoarse { length: f64, dx: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linearization required: {0} is nonlinear, use semi, btcs-frozen or btcs-linapprox")]
    LinearizationRequired(&'static str),

    #[error("semi-implicit reserved for nonlinear equations, got {0}")]
    SemiImplicitOnLinear(&'static str),

    #[error("singular or non-dominant system (zero pivot at row {row})")]
    SingularOrNonDominant { row: usize },

    #[error("singular system: no usable pivot in column {column}")]
    Singular { column: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver failed to converge for a {n}x{n} matrix")]
    EigensolverFailed { n: usize },

    #[error("unknown {what} `{name}`")]
    UnknownName { what: &'static str, name: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures caused by the filesystem rather than by the configuration.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
