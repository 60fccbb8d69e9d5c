use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Invertible map from observed targets to the scale the GP is fitted on:
/// `z = (g(y) - center) / scale` with `g = log1p` when enabled, else the
/// identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetTransform {
    pub log1p: bool,
    pub center: f64,
    pub scale: f64,
}

impl Default for TargetTransform {
    fn default() -> Self {
        TargetTransform::identity()
    }
}

impl TargetTransform {
    pub fn identity() -> Self {
        TargetTransform {
            log1p: false,
            center: 0.0,
            scale: 1.0,
        }
    }

    /// Builds the transform from training targets. With `standardize`, the
    /// (possibly log1p'd) targets are shifted to mean 0 and scaled to unit
    /// sample standard deviation; a constant target keeps scale 1.
    pub fn fit(y: &[f64], standardize: bool, log1p: bool) -> Result<Self> {
        if log1p {
            if let Some(v) = y.iter().find(|v| v.is_nan() || **v <= -1.0) {
                return Err(Error::Argument(format!(
                    "log1p target transform needs every target > -1, got {v}"
                )));
            }
        }
        let mut t = TargetTransform {
            log1p,
            ..TargetTransform::identity()
        };
        if standardize && !y.is_empty() {
            let g: Vec<f64> = y.iter().map(|v| t.warp(*v)).collect();
            let n = g.len() as f64;
            let mean = g.iter().sum::<f64>() / n;
            let var = if g.len() > 1 {
                g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            t.center = mean;
            t.scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Ok(t)
    }

    pub fn is_identity(&self) -> bool {
        *self == TargetTransform::identity()
    }

    fn warp(&self, y: f64) -> f64 {
        if self.log1p {
            y.ln_1p()
        } else {
            y
        }
    }

    pub fn forward(&self, y: f64) -> f64 {
        (self.warp(y) - self.center) / self.scale
    }

    pub fn inverse(&self, z: f64) -> f64 {
        let g = z * self.scale + self.center;
        if self.log1p {
            g.exp_m1()
        } else {
            g
        }
    }

    /// Mean and standard deviation on the observed scale of a latent
    /// Gaussian with the given mean and variance. Exact for both the affine
    /// and the log-normal (`log1p`) case.
    pub fn moments(&self, mean: f64, var: f64) -> (f64, f64) {
        let m = mean * self.scale + self.center;
        let v = var.max(0.0) * self.scale * self.scale;
        if self.log1p {
            let mu = (m + 0.5 * v).exp() - 1.0;
            let sd = ((v.exp_m1()) * (2.0 * m + v).exp()).sqrt();
            (mu, sd)
        } else {
            (m, v.sqrt())
        }
    }
}
