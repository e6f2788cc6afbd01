use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised while loading data, building models or solving.
///
/// Row and label numbers carried by the variants are 1-based, matching the
/// on-disk formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row {row}: empty candidate set")]
    EmptyCandidates { row: usize },

    #[error("row {row}: label {label} outside 1..={classes}")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        classes: usize,
    },

    #[error("row {row}: truth label {label} is not among its candidates")]
    TruthNotCandidate { row: usize, label: usize },

    #[error("row {row}: non-finite feature value")]
    NonFiniteFeature { row: usize },

    #[error("row {row}: zero-norm feature row cannot be normalized")]
    ZeroNormRow { row: usize },

    #[error("neighbor count K={k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("kernel width must be positive, got {0}")]
    InvalidTheta(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ground-truth labels are required for {0}")]
    MissingTruth(&'static str),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("non-finite objective encountered in ALM loop {loop_idx}")]
    NonFinite { loop_idx: usize },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::EmptyCandidates { .. } => "empty_candidates",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::TruthNotCandidate { .. } => "truth_not_candidate",
            Error::NonFiniteFeature { .. } => "non_finite_feature",
            Error::ZeroNormRow { .. } => "zero_norm_row",
            Error::KOutOfRange { .. } => "k_out_of_range",
            Error::InvalidTheta(_) => "invalid_theta",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MissingTruth(_) => "missing_truth",
            Error::EmptyGraph => "empty_graph",
            Error::NonFinite { .. } => "non_finite",
            Error::Fold { source, .. } => source.kind(),
            Error::Config(_) => "config",
        }
    }
}
