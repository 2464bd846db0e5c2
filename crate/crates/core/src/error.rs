use std::path::PathBuf;

use thiserror::Error;

use crate::agreement_aggregation::CoreGroup;
use crate::cluster_assignment::ClusterLabel;

/// Errors raised while reading and validating input data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed GeoJSON: {0}")]
    MalformedGeoJson(String),
    #[error("feature {index}: missing id field `{field}`")]
    MissingIdField { index: usize, field: String },
    #[error("feature {index}: empty id")]
    EmptyId { index: usize },
    #[error("feature {index}: duplicate id `{id}`")]
    DuplicateId { index: usize, id: String },
    #[error("feature {index}: non-areal geometry ({kind})")]
    NonArealGeometry { index: usize, kind: String },
    #[error("feature {index}: invalid ring ({reason})")]
    InvalidRing { index: usize, reason: String },
    #[error("CSV: missing column `{0}`")]
    MissingColumn(String),
    #[error("CSV line {line}: duplicate row for ({id}, {timestep})")]
    DuplicateRow { line: u64, id: String, timestep: String },
    #[error("CSV line {line}: unparseable value `{value}`")]
    BadValue { line: u64, value: String },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("values table has no timesteps")]
    NoTimesteps,
    #[error("unknown location {}", .0.join(", "))]
    UnknownLocations(Vec<String>),
}

impl DataError {
    /// True when the problem lies in the geometry file rather than the values table.
    pub fn is_geometry(&self) -> bool {
        matches!(
            self,
            DataError::MalformedGeoJson(_)
                | DataError::MissingIdField { .. }
                | DataError::EmptyId { .. }
                | DataError::DuplicateId { .. }
                | DataError::NonArealGeometry { .. }
                | DataError::InvalidRing { .. }
        )
    }
}

/// Failures of the per-timestep z-score normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ZScoreError {
    #[error("degenerate timestep: zero variance")]
    Degenerate,
    #[error("insufficient data: fewer than 2 present values")]
    InsufficientData,
}

/// Failures of a statistic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatError {
    #[error("no spatial structure: every weight row is empty")]
    NoSpatialStructure,
    #[error("undefined General G: zero denominator")]
    UndefinedGeneralG,
    #[error("no neighbors")]
    NoNeighbors,
    #[error("degenerate Gi* denominator")]
    DegenerateGiDenominator,
    #[error("degenerate leave-one-out variance")]
    DegenerateLeaveOneOut,
    #[error("too few locations ({n}) for this statistic")]
    TooFewLocations { n: usize },
    #[error("statistic kind {0} is not valid here")]
    WrongKind(&'static str),
}

/// Failures of permutation inference.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum InferenceError {
    #[error("insufficient permutations for requested cutoff")]
    InsufficientPermutations,
    #[error("degenerate permutation distribution")]
    DegenerateDistribution,
    #[error("at least 19 permutations are required, got {0}")]
    TooFewPermutations(usize),
    #[error("significance level must lie in (0, 0.5], got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Statistic(#[from] StatError),
}

/// Label assignment contract violations.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AssignError {
    #[error("inconsistent quadrant: value {value}, z {z}, lag {lag}")]
    InconsistentQuadrant { value: f64, z: f64, lag: f64 },
}

/// Misuse of the disagreement function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AggregationError {
    #[error("disagreement is only defined for high or low cluster cores, got {0}")]
    NotAClusterCore(CoreGroup),
    #[error("label {label} conflicts with core group {core}")]
    ConflictingLabel { core: CoreGroup, label: ClusterLabel },
}

/// Errors surfaced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error("every timestep is degenerate: {0}")]
    AllTimestepsDegenerate(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("directory does not exist: {}", .0.display())]
    MissingDirectory(PathBuf),
    #[error("{}: invalid results file: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

impl PipelineError {
    /// True for errors caused by user input (files, flags) rather than by the run itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            PipelineError::Config(_)
                | PipelineError::Data(_)
                | PipelineError::AllTimestepsDegenerate(_)
                | PipelineError::MissingDirectory(_)
                | PipelineError::Inference(InferenceError::InsufficientPermutations)
                | PipelineError::Inference(InferenceError::TooFewPermutations(_))
                | PipelineError::Inference(InferenceError::InvalidAlpha(_))
        )
    }
}
