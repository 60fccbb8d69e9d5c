use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::cholesky_jittered;
use super::model::GPModel;
use super::transform::TargetTransform;
use crate::error::{Error, Result};

/// `s` posterior surfaces evaluated at `m` query points, on the observed
/// scale. Row `i` of `draws` is surface `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub query: Vec<[f64; 2]>,
    pub draws: DMatrix<f64>,
    pub seed: u64,
    /// Diagonal jitter added to the posterior covariance before factoring.
    pub jitter: f64,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.nrows() == 0
    }

    pub fn draw(&self, i: usize) -> Vec<f64> {
        self.draws.row(i).iter().copied().collect()
    }
}

/// Which covariance posterior surfaces are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrawKind {
    /// Latent surface `f*`: covariance `K** - Vᵀ V`.
    #[default]
    Latent,
    /// Noisy observations `y* = f* + ε`: latent covariance plus `σ_n² I`.
    Predictive,
}

impl DrawKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DrawKind::Latent => "latent",
            DrawKind::Predictive => "predictive",
        }
    }
}

impl std::str::FromStr for DrawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latent" => Ok(DrawKind::Latent),
            "predictive" => Ok(DrawKind::Predictive),
            _ => Err(Error::Argument(format!(
                "unknown draw kind `{s}` (expected `latent` or `predictive`)"
            ))),
        }
    }
}

/// Stream of posterior surfaces at fixed query points: `mean + C z` with
/// `C` the Cholesky factor of the (jittered) posterior covariance and `z`
/// standard normal, mapped back to the observed scale.
#[derive(Debug, Clone)]
pub struct PosteriorSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
    transform: TargetTransform,
    jitter: f64,
    rng: ChaCha8Rng,
}

impl PosteriorSampler {
    pub fn new(model: &GPModel, query: &[[f64; 2]], seed: u64) -> Result<Self> {
        PosteriorSampler::with_kind(model, query, seed, DrawKind::Latent)
    }

    pub fn with_kind(model: &GPModel, query: &[[f64; 2]], seed: u64, kind: DrawKind) -> Result<Self> {
        let mut p = model.posterior(query);
        if kind == DrawKind::Predictive {
            for i in 0..query.len() {
                p.cov[(i, i)] += model.noise_variance();
            }
        }
        let (chol, jitter) = cholesky_jittered(&p.cov).map_err(|e| {
            Error::Sampling(format!("posterior covariance could not be factorized: {e}"))
        })?;
        Ok(PosteriorSampler {
            mean: p.mean,
            factor: chol.unpack(),
            transform: *model.transform(),
            jitter,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn next_draw(&mut self) -> Vec<f64> {
        let m = self.mean.len();
        let z = DVector::from_fn(m, |_, _| self.rng.sample::<f64, _>(StandardNormal));
        let latent = &self.mean + &self.factor * z;
        latent.iter().map(|v| self.transform.inverse(*v)).collect()
    }
}

/// `s` latent posterior draws; see [`sample_draws`].
pub fn sample_posterior(model: &GPModel, query: &[[f64; 2]], s: usize, seed: u64) -> Result<PosteriorDraws> {
    sample_draws(model, query, s, seed, DrawKind::Latent)
}

pub fn sample_draws(
    model: &GPModel,
    query: &[[f64; 2]],
    s: usize,
    seed: u64,
    kind: DrawKind,
) -> Result<PosteriorDraws> {
    let m = query.len();
    if s == 0 || m == 0 {
        return Ok(PosteriorDraws {
            query: query.to_vec(),
            draws: DMatrix::zeros(s, m),
            seed,
            jitter: 0.0,
        });
    }
    let mut sampler = PosteriorSampler::with_kind(model, query, seed, kind)?;
    let mut draws = DMatrix::zeros(s, m);
    for i in 0..s {
        let d = sampler.next_draw();
        draws.row_mut(i).copy_from_slice(&d);
    }
    Ok(PosteriorDraws {
        query: query.to_vec(),
        draws,
        seed,
        jitter: sampler.jitter(),
    })
}
