//! End-to-end inference workflow: kernel selection by held-out MSE, Moran's
//! I distributions over GP posterior draws, and a difference-in-means
//! interval between two conditions.

mod compare;
mod distribution;
mod pipeline;
mod select;

pub use compare::{comparison_summary, diff_means_ci, mean_var, normal_quantile, ComparisonResult};
pub use distribution::{moran_distribution, MoranDistribution};
pub use pipeline::{
    prepare_output_dir, run_pipeline, run_pipeline_with, zones_geojson, Artifact, ArtifactOptions,
    ConditionConfig, ConditionReport, LoadedPipeline, PipelineConfig, PipelineReport, DEFAULT_KERNELS,
};
pub use select::{select_kernel, train_test_split, Candidate, CandidateOutcome, KernelSelectionReport};
