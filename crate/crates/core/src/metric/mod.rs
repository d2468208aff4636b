//! Unreferenced commonsense metric: features, MLP regressor, Spearman
//! evaluation.

mod cv;
mod dataset;
mod features;
mod mlp;
mod model;
mod spearman;

use std::path::PathBuf;

use thiserror::Error;

pub use cv::{
    cross_predict, cross_validate, cross_validate_features, featurize_dataset, fold_plan, CorrelationSummary,
    EvaluationReport, Fold, FoldSummary, DEFAULT_FOLDS,
};
pub use dataset::{average_annotations, read_annotations, read_annotations_path, write_annotations, AnnotatedExample};
pub use features::{
    featurize, Feature, FeatureConfig, FeatureError, FeatureMask, FeatureVector, Featurizer, HistoryScope,
};
pub use mlp::{Adam, Mlp, Workspace};
pub use model::{
    train, train_with_dev, FeatureStandardization, Hyper, RegressorModel, Standardizer, TrainingSummary, MAX_SCORE,
    MIN_SCORE, SCHEMA_VERSION,
};
pub use spearman::{
    mid_ranks, spearman, spearman_permutation, t_test_p, Correlation, SpearmanError, DEFAULT_PERMUTATIONS,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("need at least {min} examples, got {got}")]
    TooFewExamples { got: usize, min: usize },
    #[error("example {index}: human score {score} outside [1, 10]")]
    ScoreOutOfRange { index: usize, score: f64 },
    #[error("example {index}: non-finite feature value")]
    NonFinite { index: usize },
    #[error("{0}")]
    Config(String),
    #[error("model file: {0}")]
    Schema(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
