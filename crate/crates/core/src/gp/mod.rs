//! Gaussian-process regression over 2-D inputs (zone centroids).
//!
//! Zero-mean prior, Gaussian observation noise, kernels built from RBF and
//! half-integer Matérn leaves combined with sums, products and scaling.
//! Hyperparameters are fitted by maximizing the log marginal likelihood.

mod fit;
mod io;
mod kernel;
mod linalg;
mod model;
mod sample;
mod spec;
mod transform;

pub use fit::{fit, fit_with_report, FitOptions, FitReport, RestartResult};
pub use io::{ModelFile, TrainingData};
pub use kernel::{distance, Kernel, MaternNu};
pub use linalg::{cholesky_jittered, jitter_ladder, JITTER_MAX, JITTER_START};
pub use model::{gram_matrix, gram_symmetric, log_marginal_likelihood, GPModel, Posterior};
pub use sample::{sample_draws, sample_posterior, DrawKind, PosteriorDraws, PosteriorSampler};
pub use spec::parse_kernel;
pub use transform::TargetTransform;
