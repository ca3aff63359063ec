use thiserror::Error;

/// Errors raised anywhere in the SQD pipeline.
#[derive(Debug, Error)]
pub enum SqdError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("matrix is not orthogonal (max |UᵀU - I| = {0:e})")]
    NotOrthogonal(f64),

    #[error("matrix is not symmetric (max asymmetry = {0:e})")]
    NotSymmetric(f64),

    #[error("no usable configurations: {0}")]
    EmptyPool(String),

    #[error("resource guard tripped: dimension {dimension} exceeds limit {limit}")]
    ResourceGuard { dimension: usize, limit: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("near-zero denominator {0:e} in perturbative amplitudes")]
    SmallDenominator(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<SqdError>,
    },
}

impl SqdError {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        SqdError::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Wrap the error with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        SqdError::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage wrappers stripped.
    pub fn root(&self) -> &SqdError {
        match self {
            SqdError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, SqdError>;
