use super::compare::mean_var;
use crate::error::{Error, Result};
use crate::gp::{DrawKind, GPModel, PosteriorSampler};
use crate::io::{csv_writer, finish_csv};
use crate::spatial::{is_constant, morans_i_values, WeightMatrix};
use crate::synthpop::Zone;

/// Moran's I over posterior surface draws for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranDistribution {
    pub label: String,
    pub samples: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single sample.
    pub std: f64,
    pub seed: u64,
    pub scheme: String,
    /// Constant draws that were rejected and redrawn.
    pub degenerate_draws: usize,
}

impl MoranDistribution {
    pub fn from_samples(
        label: impl Into<String>,
        samples: Vec<f64>,
        seed: u64,
        scheme: String,
        degenerate_draws: usize,
    ) -> Self {
        let (mean, var) = if samples.is_empty() {
            (f64::NAN, 0.0)
        } else {
            mean_var(&samples)
        };
        MoranDistribution {
            label: label.into(),
            samples,
            mean,
            std: var.sqrt(),
            seed,
            scheme,
            degenerate_draws,
        }
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer();
        w.write_record(["draw", "I"]).expect("in-memory write");
        for (i, v) in self.samples.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])
                .expect("in-memory write");
        }
        finish_csv(w)
    }
}

/// Draws `s` posterior surfaces of the given kind at the zone centroids and
/// computes Moran's I of each. Constant draws are redrawn; more than `s / 2` of them is an
/// error. Deterministic in `seed`.
pub fn moran_distribution(
    model: &GPModel,
    zones: &[Zone],
    w: &WeightMatrix,
    s: usize,
    seed: u64,
    kind: DrawKind,
    label: &str,
) -> Result<MoranDistribution> {
    if s == 0 {
        return Err(Error::Argument("need at least one posterior draw".into()));
    }
    let ids: Vec<usize> = zones.iter().map(|z| z.zone_id).collect();
    if ids != w.zone_ids {
        return Err(Error::Argument(
            "zone order does not match the weight matrix zone order".into(),
        ));
    }
    let centroids: Vec<[f64; 2]> = zones.iter().map(|z| z.centroid.to_array()).collect();
    let mut sampler = PosteriorSampler::with_kind(model, &centroids, seed, kind)?;
    let mut samples = Vec::with_capacity(s);
    let mut degenerate = 0usize;
    while samples.len() < s {
        let draw = sampler.next_draw();
        if is_constant(&draw) {
            degenerate += 1;
            if 2 * degenerate > s {
                return Err(Error::Sampling(format!(
                    "{degenerate} of the first {} posterior draws for `{label}` were constant; the posterior is effectively flat",
                    samples.len() + degenerate
                )));
            }
            continue;
        }
        samples.push(morans_i_values(&draw, w)?);
    }
    Ok(MoranDistribution::from_samples(
        label,
        samples,
        seed,
        w.describe(),
        degenerate,
    ))
}
