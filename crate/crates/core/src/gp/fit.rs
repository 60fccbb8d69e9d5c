use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::Kernel;
use super::model::{log_marginal_likelihood, log_marginal_likelihood_value, GPModel};
use super::transform::TargetTransform;
use crate::error::{Error, Result};

/// Settings for maximum-likelihood hyperparameter fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Convergence threshold on the ∞-norm of the projected gradient.
    pub grad_tol: f64,
    pub seed: u64,
    /// Pins σ_n² instead of optimizing it.
    pub fixed_noise: Option<f64>,
    /// Range for log-uniform initial hyperparameters (natural scale).
    pub init_range: (f64, f64),
    /// Box constraint on every hyperparameter (natural scale).
    pub bounds: (f64, f64),
    pub standardize_targets: bool,
    pub log1p_targets: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 5,
            max_iter: 500,
            grad_tol: 1e-6,
            seed: 0,
            fixed_noise: None,
            init_range: (1e-2, 1e2),
            bounds: (1e-6, 1e6),
            standardize_targets: false,
            log1p_targets: false,
        }
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub start: Vec<f64>,
    /// Final log-hyperparameters (kernel params then `log σ_n²`), or `None`
    /// when the start point could not be factorized.
    pub theta: Option<Vec<f64>>,
    pub lml: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub restarts: Vec<RestartResult>,
    pub best: usize,
}

/// Fits `kernel`'s hyperparameters (its current values only fix the tree
/// shape) and the noise variance by gradient ascent on the log marginal
/// likelihood from `restarts` random starts; the best run wins.
pub fn fit(kernel: &Kernel, x: &[[f64; 2]], y: &[f64], opts: &FitOptions) -> Result<GPModel> {
    fit_with_report(kernel, x, y, opts).map(|(m, _)| m)
}

pub fn fit_with_report(
    kernel: &Kernel,
    x: &[[f64; 2]],
    y: &[f64],
    opts: &FitOptions,
) -> Result<(GPModel, FitReport)> {
    if x.len() < 2 {
        return Err(Error::Argument(format!(
            "fitting needs at least 2 points, got {}",
            x.len()
        )));
    }
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "{} input points but {} targets",
            x.len(),
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("training targets must be finite, got {v}")));
    }
    if opts.restarts == 0 {
        return Err(Error::Argument("at least one restart is required".into()));
    }
    let (lo, hi) = opts.bounds;
    let (ilo, ihi) = opts.init_range;
    if !(lo > 0.0 && lo < hi && hi.is_finite() && ilo > 0.0 && ilo <= ihi && ihi.is_finite()) {
        return Err(Error::Argument(format!(
            "invalid optimizer ranges: bounds {:?}, init {:?}",
            opts.bounds, opts.init_range
        )));
    }
    if let Some(s) = opts.fixed_noise {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Argument(format!("fixed noise must be positive, got {s}")));
        }
    }

    let transform = TargetTransform::fit(y, opts.standardize_targets, opts.log1p_targets)?;
    let z: Vec<f64> = y.iter().map(|v| transform.forward(*v)).collect();
    let problem = Problem {
        kernel,
        x,
        y: &z,
        fixed_noise: opts.fixed_noise,
        lo: lo.ln(),
        hi: hi.ln(),
    };

    let dim = kernel.n_params() + usize::from(opts.fixed_noise.is_none());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut results = Vec::with_capacity(opts.restarts);
    for _ in 0..opts.restarts {
        let start: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(ilo.ln()..=ihi.ln()))
            .collect();
        results.push(problem.ascend(start, opts));
    }

    let best = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.theta.is_some())
        .fold(None::<usize>, |acc, (i, r)| match acc {
            Some(b) if results[b].lml >= r.lml => Some(b),
            _ => Some(i),
        })
        .ok_or_else(|| {
            Error::Fit(format!(
                "all {} restarts failed to factorize the kernel matrix",
                opts.restarts
            ))
        })?;
    let theta = results[best].theta.clone().expect("filtered");
    let (k, noise) = problem.unpack(&theta);
    let model = GPModel::with_transform(k, noise, x.to_vec(), y.to_vec(), transform)
        .map_err(|e| Error::Fit(format!("refactorizing the best restart: {e}")))?;
    Ok((
        model,
        FitReport {
            restarts: results,
            best,
        },
    ))
}

struct Problem<'a> {
    kernel: &'a Kernel,
    x: &'a [[f64; 2]],
    y: &'a [f64],
    fixed_noise: Option<f64>,
    lo: f64,
    hi: f64,
}

impl Problem<'_> {
    fn unpack(&self, theta: &[f64]) -> (Kernel, f64) {
        let p = self.kernel.n_params();
        let k = self.kernel.with_params(&theta[..p]);
        let noise = match self.fixed_noise {
            Some(s) => s,
            None => theta[p].exp(),
        };
        (k, noise)
    }

    fn eval(&self, theta: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (k, noise) = self.unpack(theta);
        let (v, mut g) = log_marginal_likelihood(&k, noise, self.x, self.y).ok()?;
        if self.fixed_noise.is_some() {
            g.pop();
        }
        if !v.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return None;
        }
        Some((v, g))
    }

    fn value(&self, theta: &[f64]) -> Option<f64> {
        let (k, noise) = self.unpack(theta);
        log_marginal_likelihood_value(&k, noise, self.x, self.y)
            .ok()
            .filter(|v| v.is_finite())
    }

    fn project(&self, theta: &mut [f64]) {
        for t in theta {
            *t = t.clamp(self.lo, self.hi);
        }
    }

    /// Gradient with components that push against an active bound removed.
    fn projected(&self, theta: &[f64], g: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(g)
            .map(|(t, gi)| {
                if (*t <= self.lo && *gi < 0.0) || (*t >= self.hi && *gi > 0.0) {
                    0.0
                } else {
                    *gi
                }
            })
            .collect()
    }

    /// Projected gradient ascent with Barzilai–Borwein step proposals and
    /// Armijo backtracking.
    fn ascend(&self, start: Vec<f64>, opts: &FitOptions) -> RestartResult {
        const ARMIJO: f64 = 1e-4;
        const MAX_HALVINGS: usize = 50;
        let mut theta = start.clone();
        self.project(&mut theta);
        let Some((mut f, mut g)) = self.eval(&theta) else {
            return RestartResult {
                start,
                theta: None,
                lml: f64::NEG_INFINITY,
                iterations: 0,
                converged: false,
            };
        };
        let mut step = 1.0 / norm_inf(&g).max(1.0);
        let mut converged = false;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            let pg = self.projected(&theta, &g);
            if norm_inf(&pg) < opts.grad_tol {
                converged = true;
                break;
            }
            iterations += 1;
            let mut accepted = None;
            let mut trial_step = step;
            for _ in 0..MAX_HALVINGS {
                let mut cand: Vec<f64> = theta.iter().zip(&pg).map(|(t, d)| t + trial_step * d).collect();
                self.project(&mut cand);
                let moved: f64 = cand.iter().zip(&theta).map(|(c, t)| (c - t) * (c - t)).sum();
                if moved == 0.0 {
                    break;
                }
                if let Some(fc) = self.value(&cand) {
                    let lin: f64 = g.iter().zip(cand.iter().zip(&theta)).map(|(gi, (c, t))| gi * (c - t)).sum();
                    if fc >= f + ARMIJO * lin {
                        if let Some((fc, gc)) = self.eval(&cand) {
                            accepted = Some((cand, fc, gc));
                            break;
                        }
                    }
                }
                trial_step *= 0.5;
            }
            let Some((cand, fc, gc)) = accepted else {
                // No ascent direction within floating-point resolution.
                converged = norm_inf(&pg) < opts.grad_tol.sqrt();
                break;
            };
            let s: Vec<f64> = cand.iter().zip(&theta).map(|(c, t)| c - t).collect();
            let ss: f64 = s.iter().map(|v| v * v).sum();
            let sy: f64 = s.iter().zip(gc.iter().zip(&g)).map(|(si, (a, b))| -si * (a - b)).sum();
            step = if sy > 0.0 { ss / sy } else { trial_step * 2.0 };
            step = step.clamp(1e-10, 1e4);
            theta = cand;
            f = fc;
            g = gc;
        }
        RestartResult {
            start,
            theta: Some(theta),
            lml: f,
            iterations,
            converged,
        }
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
