use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::model::GPModel;
use super::spec::parse_kernel;
use super::transform::TargetTransform;
use crate::error::{Error, Result};

/// Fitted model on disk. `kernel` is the readable spec; `log_params` holds
/// the exact hyperparameters since decimal formatting of `exp(log θ)` does
/// not round-trip bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub kernel: String,
    pub log_params: Vec<f64>,
    pub noise_variance: f64,
    pub log_marginal_likelihood: f64,
    #[serde(default)]
    pub transform: TargetTransform,
    pub training: TrainingData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingData {
    /// File the targets were read from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub zone_ids: Vec<usize>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub targets: Vec<f64>,
}

impl ModelFile {
    pub fn from_model(model: &GPModel, zone_ids: &[usize], source: Option<String>) -> Result<Self> {
        if zone_ids.len() != model.train_x().len() {
            return Err(Error::Argument(format!(
                "{} zone ids for {} training points",
                zone_ids.len(),
                model.train_x().len()
            )));
        }
        Ok(ModelFile {
            kernel: model.kernel().to_string(),
            log_params: model.kernel().params(),
            noise_variance: model.noise_variance(),
            log_marginal_likelihood: model.log_marginal_likelihood(),
            transform: *model.transform(),
            training: TrainingData {
                source,
                zone_ids: zone_ids.to_vec(),
                x: model.train_x().iter().map(|p| p[0]).collect(),
                y: model.train_x().iter().map(|p| p[1]).collect(),
                targets: model.train_y().to_vec(),
            },
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model file serializes")
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(format!("model file: {e}")))
    }

    /// Rebuilds the model; the factorization is recomputed, so it matches
    /// the saved one exactly.
    pub fn to_model(&self) -> Result<GPModel> {
        let mut kernel: Kernel = parse_kernel(&self.kernel)?;
        if kernel.n_params() != self.log_params.len() {
            return Err(Error::Config(format!(
                "model file: kernel `{}` has {} hyperparameters but log_params has {}",
                self.kernel,
                kernel.n_params(),
                self.log_params.len()
            )));
        }
        if self.log_params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("model file: log_params must be finite".into()));
        }
        kernel.set_params(&self.log_params);
        let t = &self.training;
        let n = t.zone_ids.len();
        if t.x.len() != n || t.y.len() != n || t.targets.len() != n {
            return Err(Error::Config(format!(
                "model file: training arrays differ in length (zone_ids {}, x {}, y {}, targets {})",
                n,
                t.x.len(),
                t.y.len(),
                t.targets.len()
            )));
        }
        if !(self.transform.scale.is_finite() && self.transform.scale > 0.0 && self.transform.center.is_finite()) {
            return Err(Error::Config("model file: transform needs finite center and positive scale".into()));
        }
        let x = t.x.iter().zip(&t.y).map(|(a, b)| [*a, *b]).collect();
        GPModel::with_transform(kernel, self.noise_variance, x, t.targets.clone(), self.transform)
            .map_err(|e| match e {
                Error::Argument(m) => Error::Config(format!("model file: {m}")),
                other => other,
            })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let src = crate::io::read_to_string(path)?;
        ModelFile::from_toml_str(&src).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
