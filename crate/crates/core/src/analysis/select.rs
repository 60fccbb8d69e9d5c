use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gp::{fit, parse_kernel, FitOptions, GPModel, Kernel};
use crate::io::{csv_writer, finish_csv};

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateOutcome {
    Fitted {
        train_mse: f64,
        test_mse: f64,
        lml: f64,
        /// The fitted kernel, with optimized hyperparameters.
        fitted: String,
        noise_variance: f64,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub spec: String,
    pub outcome: CandidateOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSelectionReport {
    pub candidates: Vec<Candidate>,
    /// Index into `candidates`.
    pub winner: usize,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub split_seed: u64,
}

impl KernelSelectionReport {
    pub fn winner_spec(&self) -> &str {
        &self.candidates[self.winner].spec
    }

    pub fn split_description(&self) -> String {
        format!(
            "random split: {} train / {} test, seed {}",
            self.train_idx.len(),
            self.test_idx.len(),
            self.split_seed
        )
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer();
        w.write_record([
            "kernel", "status", "train_mse", "test_mse", "lml", "fitted", "noise_variance", "winner",
        ])
        .expect("in-memory write");
        for (i, c) in self.candidates.iter().enumerate() {
            let winner = if i == self.winner { "true" } else { "false" };
            let row = match &c.outcome {
                CandidateOutcome::Fitted {
                    train_mse,
                    test_mse,
                    lml,
                    fitted,
                    noise_variance,
                } => [
                    c.spec.clone(),
                    "ok".into(),
                    train_mse.to_string(),
                    test_mse.to_string(),
                    lml.to_string(),
                    fitted.clone(),
                    noise_variance.to_string(),
                    winner.into(),
                ],
                CandidateOutcome::Failed(msg) => [
                    c.spec.clone(),
                    format!("failed: {msg}"),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    winner.into(),
                ],
            };
            w.write_record(&row).expect("in-memory write");
        }
        finish_csv(w)
    }
}

/// Seeded random partition of `0..n` into train and test index sets, each
/// sorted. The train side gets `round(n · train_fraction)` points.
pub fn train_test_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train < 2 || n_train >= n {
        return Err(Error::Argument(format!(
            "a {train_fraction} split of {n} points leaves {n_train} train and {} test points; need at least 2 and 1",
            n.saturating_sub(n_train)
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64
}

/// Fits every candidate on the train split and scores the posterior mean on
/// the test split. The winner has the lowest test MSE; ties go to the higher
/// LML, then to the earlier candidate. Candidates whose fit fails are kept in
/// the report but cannot win.
pub fn select_kernel(
    candidates: &[String],
    x: &[[f64; 2]],
    y: &[f64],
    train_fraction: f64,
    split_seed: u64,
    opts: &FitOptions,
) -> Result<KernelSelectionReport> {
    if candidates.is_empty() {
        return Err(Error::Argument("no kernel candidates".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "{} input points but {} targets",
            x.len(),
            y.len()
        )));
    }
    let kernels: Vec<Kernel> = candidates
        .iter()
        .map(|s| parse_kernel(s))
        .collect::<Result<_>>()?;
    let (train_idx, test_idx) = train_test_split(x.len(), train_fraction, split_seed)?;
    let pick = |idx: &[usize]| -> (Vec<[f64; 2]>, Vec<f64>) {
        (idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| y[i]).collect())
    };
    let (xtr, ytr) = pick(&train_idx);
    let (xte, yte) = pick(&test_idx);

    let mut out = Vec::with_capacity(candidates.len());
    for (spec, k) in candidates.iter().zip(&kernels) {
        let outcome = match fit(k, &xtr, &ytr, opts) {
            Ok(m) => score(&m, &xtr, &ytr, &xte, &yte),
            Err(e) => CandidateOutcome::Failed(e.to_string()),
        };
        out.push(Candidate {
            spec: spec.clone(),
            outcome,
        });
    }

    let mut winner: Option<(usize, f64, f64)> = None;
    for (i, c) in out.iter().enumerate() {
        if let CandidateOutcome::Fitted { test_mse, lml, .. } = c.outcome {
            let better = match winner {
                None => true,
                Some((_, bm, bl)) => test_mse < bm || (test_mse == bm && lml > bl),
            };
            if better {
                winner = Some((i, test_mse, lml));
            }
        }
    }
    let Some((winner, _, _)) = winner else {
        let reasons: Vec<String> = out
            .iter()
            .map(|c| match &c.outcome {
                CandidateOutcome::Failed(m) => format!("{}: {m}", c.spec),
                CandidateOutcome::Fitted { .. } => unreachable!(),
            })
            .collect();
        return Err(Error::Fit(format!(
            "every kernel candidate failed ({})",
            reasons.join("; ")
        )));
    };
    Ok(KernelSelectionReport {
        candidates: out,
        winner,
        train_idx,
        test_idx,
        split_seed,
    })
}

fn score(m: &GPModel, xtr: &[[f64; 2]], ytr: &[f64], xte: &[[f64; 2]], yte: &[f64]) -> CandidateOutcome {
    let train_mse = mse(&m.predict_mean(xtr), ytr);
    let test_mse = mse(&m.predict_mean(xte), yte);
    if !test_mse.is_finite() || !train_mse.is_finite() {
        return CandidateOutcome::Failed("non-finite prediction error".into());
    }
    CandidateOutcome::Fitted {
        train_mse,
        test_mse,
        lml: m.log_marginal_likelihood(),
        fitted: m.kernel().to_string(),
        noise_variance: m.noise_variance(),
    }
}
