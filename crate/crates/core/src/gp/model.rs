use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::kernel::{distance, Kernel};
use super::linalg::cholesky_jittered;
use super::transform::TargetTransform;
use crate::error::{Error, Result};

/// `K(X, X')` with entry `(i, j) = k(X_i, X'_j)`.
pub fn gram_matrix(kernel: &Kernel, x: &[[f64; 2]], x2: &[[f64; 2]]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x2.len(), |i, j| kernel.eval(&x[i], &x2[j]))
}

/// Symmetric `K(X, X)`, evaluating each pair once.
pub fn gram_symmetric(kernel: &Kernel, x: &[[f64; 2]]) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn check_inputs(x: &[[f64; 2]], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "{} input points but {} targets",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Argument("no training points".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Argument("training inputs must be finite".into()));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("training targets must be finite, got {v}")));
    }
    Ok(())
}

fn check_noise(noise_variance: f64) -> Result<()> {
    if noise_variance.is_finite() && noise_variance > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )))
    }
}

struct Factorized {
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
    lml: f64,
}

fn factorize(kernel: &Kernel, noise_variance: f64, x: &[[f64; 2]], y: &DVector<f64>) -> Result<Factorized> {
    let mut k = gram_symmetric(kernel, x);
    for i in 0..x.len() {
        k[(i, i)] += noise_variance;
    }
    let (chol, jitter) = cholesky_jittered(&k)?;
    let alpha = chol.solve(y);
    let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    let n = x.len() as f64;
    let lml = -0.5 * y.dot(&alpha) - log_det_half - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
    Ok(Factorized {
        chol,
        alpha,
        jitter,
        lml,
    })
}

/// Log marginal likelihood of `y` under a zero-mean GP with the given kernel
/// and noise variance, and its gradient with respect to the kernel's
/// log-hyperparameters (in [`Kernel::params`] order) followed by
/// `log σ_n²`.
pub fn log_marginal_likelihood(
    kernel: &Kernel,
    noise_variance: f64,
    x: &[[f64; 2]],
    y: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_inputs(x, y)?;
    check_noise(noise_variance)?;
    let yv = DVector::from_column_slice(y);
    let f = factorize(kernel, noise_variance, x, &yv)?;
    let n = x.len();
    let p = kernel.n_params();

    // W = α αᵀ − (K + σ²I)⁻¹
    let kinv = f.chol.inverse();
    let mut grad = vec![0.0; p + 1];
    let mut g = vec![0.0; p];
    let mut trace_w = 0.0;
    for j in 0..n {
        for i in j..n {
            let w = f.alpha[i] * f.alpha[j] - kinv[(i, j)];
            let weight = if i == j {
                trace_w += w;
                0.5 * w
            } else {
                w
            };
            if p > 0 {
                kernel.eval_with_grad(distance(&x[i], &x[j]), &mut g);
                for (acc, gk) in grad.iter_mut().zip(&g) {
                    *acc += weight * gk;
                }
            }
        }
    }
    grad[p] = 0.5 * noise_variance * trace_w;
    Ok((f.lml, grad))
}

/// Value-only counterpart of [`log_marginal_likelihood`], skipping the
/// matrix inverse the gradient needs.
pub(crate) fn log_marginal_likelihood_value(
    kernel: &Kernel,
    noise_variance: f64,
    x: &[[f64; 2]],
    y: &[f64],
) -> Result<f64> {
    check_inputs(x, y)?;
    check_noise(noise_variance)?;
    Ok(factorize(kernel, noise_variance, x, &DVector::from_column_slice(y))?.lml)
}

/// Mean and covariance of the latent surface at query points.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Zero-mean GP conditioned on training data at fixed hyperparameters.
/// Immutable once built; targets are stored on the observed scale and the
/// GP itself works on `transform.forward(y)`.
#[derive(Debug, Clone)]
pub struct GPModel {
    kernel: Kernel,
    noise_variance: f64,
    x: Vec<[f64; 2]>,
    y: Vec<f64>,
    transform: TargetTransform,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
    lml: f64,
}

impl GPModel {
    pub fn new(kernel: Kernel, noise_variance: f64, x: Vec<[f64; 2]>, y: Vec<f64>) -> Result<Self> {
        GPModel::with_transform(kernel, noise_variance, x, y, TargetTransform::identity())
    }

    pub fn with_transform(
        kernel: Kernel,
        noise_variance: f64,
        x: Vec<[f64; 2]>,
        y: Vec<f64>,
        transform: TargetTransform,
    ) -> Result<Self> {
        check_inputs(&x, &y)?;
        check_noise(noise_variance)?;
        if kernel.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Argument("kernel hyperparameters must be finite".into()));
        }
        let z = DVector::from_iterator(y.len(), y.iter().map(|v| transform.forward(*v)));
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("transformed targets are not finite".into()));
        }
        let f = factorize(&kernel, noise_variance, &x, &z)?;
        Ok(GPModel {
            kernel,
            noise_variance,
            x,
            y,
            transform,
            chol: f.chol,
            alpha: f.alpha,
            jitter: f.jitter,
            lml: f.lml,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn train_x(&self) -> &[[f64; 2]] {
        &self.x
    }

    /// Training targets on the observed scale.
    pub fn train_y(&self) -> &[f64] {
        &self.y
    }

    pub fn transform(&self) -> &TargetTransform {
        &self.transform
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Lower Cholesky factor of `K + (σ_n² + jitter) I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// Diagonal jitter that was needed on top of the noise variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Log marginal likelihood on the transformed scale.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    /// Latent posterior mean at query points (transformed scale).
    pub fn latent_mean(&self, xs: &[[f64; 2]]) -> DVector<f64> {
        gram_matrix(&self.kernel, xs, &self.x) * &self.alpha
    }

    /// Latent posterior (transformed scale). The covariance is symmetrized
    /// to remove round-off asymmetry.
    pub fn posterior(&self, xs: &[[f64; 2]]) -> Posterior {
        let kxs = gram_matrix(&self.kernel, &self.x, xs);
        let mean = kxs.transpose() * &self.alpha;
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&kxs)
            .expect("Cholesky factor has a positive diagonal");
        let mut cov = gram_symmetric(&self.kernel, xs) - v.transpose() * v;
        let m = xs.len();
        for j in 0..m {
            for i in (j + 1)..m {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
        }
        Posterior { mean, cov }
    }

    /// Posterior mean and standard deviation per query point on the
    /// observed scale.
    pub fn predict(&self, xs: &[[f64; 2]]) -> Vec<(f64, f64)> {
        let p = self.posterior(xs);
        (0..xs.len())
            .map(|i| self.transform.moments(p.mean[i], p.cov[(i, i)]))
            .collect()
    }

    /// Posterior mean on the observed scale.
    pub fn predict_mean(&self, xs: &[[f64; 2]]) -> Vec<f64> {
        if self.transform.log1p {
            return self.predict(xs).into_iter().map(|(m, _)| m).collect();
        }
        self.latent_mean(xs)
            .iter()
            .map(|z| self.transform.inverse(*z))
            .collect()
    }
}
