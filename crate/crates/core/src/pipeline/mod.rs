//! End-to-end training, the model artifact, scoring, insights and the
//! experiment protocol.

mod artifact;
mod config;
mod experiment;
mod insights;
mod train;

pub use artifact::{score_rows, ArtifactPayload, ModelArtifact, RowScore, SCHEMA_VERSION};
pub use config::{EvaluationConfig, InsightsDefaults, PipelineConfig};
pub use experiment::{
    run_experiment, BaselineColumn, CaseDescriptor, CaseResult, DatasetSource, ExperimentConfig,
    ExperimentReport, UnseenSet,
};
pub use insights::{run_insights, InsightOutcome};
pub use train::{
    evaluate_table, fit_model, train_on_splits, train_pipeline, SplitSizes, TrainOutcome,
    TrainingReport,
};
