use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CdState, LassoProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which cross-validated penalty to use downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CvRule {
    #[default]
    Min,
    OneSe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult<S> {
    pub lambda_min: S,
    pub lambda_1se: S,
    pub grid: Vec<S>,
    /// Mean held-out squared error per grid value.
    pub mean_error: Vec<S>,
    pub std_error: Vec<S>,
}

impl<S: Scalar> CvResult<S> {
    pub fn pick(&self, rule: CvRule) -> S {
        match rule {
            CvRule::Min => self.lambda_min,
            CvRule::OneSe => self.lambda_1se,
        }
    }
}

/// k-fold cross-validation over a λ grid shared by all folds.
pub fn cross_validate<S: Scalar>(
    problem: &LassoProblem<S>,
    k: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<CvResult<S>> {
    let n = problem.n();
    if k < 2 || k > n {
        return Err(Error::Contract(format!("need 2 <= k <= n for {k}-fold CV on n = {n}")));
    }
    let lambda_max = problem.lambda_max(cfg)?;
    if lambda_max <= S::zero() {
        let zero = vec![S::zero()];
        return Ok(CvResult {
            lambda_min: S::zero(),
            lambda_1se: S::zero(),
            grid: zero.clone(),
            mean_error: zero.clone(),
            std_error: zero,
        });
    }
    let len = cfg.grid_len.max(2);
    let log_ratio = cfg.lambda_ratio.ln();
    let grid: Vec<S> = (0..len)
        .map(|i| lambda_max * S::lit((i as f64 / (len - 1) as f64 * log_ratio).exp()))
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0usize; n];
    for (pos, &row) in perm.iter().enumerate() {
        fold_of[row] = pos % k;
    }

    let x = problem.x();
    let y = problem.y();
    let mut errors = vec![vec![S::zero(); k]; grid.len()];
    for fold in 0..k {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let sub = problem.subset_rows(&train)?;
        let mask = sub.active_mask();
        let mut state = CdState::new(problem.p());
        for (gi, &lambda) in grid.iter().enumerate() {
            state.descend(&sub, lambda, &mask, cfg)?;
            let mut sse = S::zero();
            for &i in &test {
                let mut pred = S::zero();
                for (l, b) in state.beta.iter().enumerate() {
                    if *b != S::zero() {
                        pred = pred + *b * x[[i, l]];
                    }
                }
                let r = y[i] - pred;
                sse = sse + r * r;
            }
            errors[gi][fold] = sse / S::lit(test.len() as f64);
        }
    }

    let kk = S::lit(k as f64);
    let mut mean_error = Vec::with_capacity(grid.len());
    let mut std_error = Vec::with_capacity(grid.len());
    for row in &errors {
        let mean = row.iter().copied().sum::<S>() / kk;
        let var = row.iter().map(|e| (*e - mean) * (*e - mean)).sum::<S>() / S::lit((k - 1) as f64);
        mean_error.push(mean);
        std_error.push((var / kk).sqrt());
    }
    // first index wins ties, i.e. the larger λ
    let mut best = 0;
    for i in 1..grid.len() {
        if mean_error[i] < mean_error[best] {
            best = i;
        }
    }
    let bound = mean_error[best] + std_error[best];
    let one_se = (0..=best).find(|&i| mean_error[i] <= bound).unwrap_or(best);

    Ok(CvResult {
        lambda_min: grid[best],
        lambda_1se: grid[one_se],
        grid,
        mean_error,
        std_error,
    })
}
