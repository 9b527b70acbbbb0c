use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{CdState, EntryResolution, LassoProblem, SolverConfig};
use crate::error::Result;
use crate::scalar::Scalar;

/// One coefficient on the path with the largest penalty at which it is
/// active. Whitelisted coefficients carry the sentinel `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathEntry<S> {
    pub index: usize,
    pub lambda: S,
    pub whitelisted: bool,
}

/// Entry order of all non-excluded coefficients, most important first.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationPath<S> {
    pub entries: Vec<PathEntry<S>>,
    /// Descending λ grid, terminated by `0`.
    pub grid: Vec<S>,
    /// Number of nonzero coefficients at each grid value.
    pub active_counts: Vec<usize>,
    pub lambda_max: S,
}

impl<S: Scalar> RegularizationPath<S> {
    pub fn order(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn entry(&self, index: usize) -> Option<&PathEntry<S>> {
        self.entries.iter().find(|e| e.index == index)
    }

    /// First coefficient that is subject to the penalty.
    pub fn first_penalized(&self) -> Option<&PathEntry<S>> {
        self.entries.iter().find(|e| !e.whitelisted)
    }
}

struct Activation<S> {
    index: usize,
    lambda: S,
    magnitude: S,
}

/// Warm-started solves over a descending log grid, recording where each
/// penalized coefficient first becomes nonzero.
pub fn path<S: Scalar>(problem: &LassoProblem<S>, cfg: &SolverConfig) -> Result<RegularizationPath<S>> {
    let p = problem.p();
    let weights = problem.weights();
    let penalized: Vec<bool> = weights
        .iter()
        .map(|w| *w > S::zero() && w.is_finite())
        .collect();
    let mask = problem.active_mask();

    let lambda_max = problem.lambda_max(cfg)?;
    let mut grid: Vec<S> = Vec::with_capacity(cfg.grid_len + 1);
    if lambda_max > S::zero() {
        let len = cfg.grid_len.max(2);
        let log_ratio = cfg.lambda_ratio.ln();
        for k in 0..len {
            let frac = k as f64 / (len - 1) as f64;
            grid.push(lambda_max * S::lit((frac * log_ratio).exp()));
        }
    }
    grid.push(S::zero());

    let mut state = CdState::new(p);
    let mut activated: Vec<Option<Activation<S>>> = (0..p).map(|_| None).collect();
    let mut active_counts = Vec::with_capacity(grid.len());
    let mut prev_corr = vec![S::zero(); p];

    for (k, &lambda) in grid.iter().enumerate() {
        for l in 0..p {
            prev_corr[l] = state.partial_corr(problem, l);
        }
        state.descend(problem, lambda, &mask, cfg)?;
        for l in 0..p {
            if !penalized[l] || activated[l].is_some() || state.beta[l] == S::zero() {
                continue;
            }
            let entry_lambda = if k == 0 {
                lambda
            } else {
                let lambda_prev = grid[k - 1];
                match cfg.entry_resolution {
                    EntryResolution::GridPoint => lambda,
                    EntryResolution::Interpolated => {
                        let w = weights[l];
                        let g_prev = prev_corr[l].abs() - lambda_prev * w;
                        let g_cur = state.partial_corr(problem, l).abs() - lambda * w;
                        interpolate_crossing(lambda_prev, g_prev, lambda, g_cur)
                    }
                }
            };
            activated[l] = Some(Activation {
                index: l,
                lambda: entry_lambda,
                magnitude: state.beta[l].abs(),
            });
        }
        active_counts.push(state.beta.iter().filter(|b| **b != S::zero()).count());
    }

    let mut entries: Vec<PathEntry<S>> = (0..p)
        .filter(|&l| weights[l] == S::zero())
        .map(|index| PathEntry {
            index,
            lambda: S::sentinel(),
            whitelisted: true,
        })
        .collect();

    let mut acts: Vec<Activation<S>> = activated.into_iter().flatten().collect();
    acts.sort_by(|a, b| {
        b.lambda
            .partial_cmp(&a.lambda)
            .unwrap_or(Ordering::Equal)
            .then(b.magnitude.partial_cmp(&a.magnitude).unwrap_or(Ordering::Equal))
            .then(a.index.cmp(&b.index))
    });
    let mut seen = vec![false; p];
    for a in &acts {
        seen[a.index] = true;
        entries.push(PathEntry {
            index: a.index,
            lambda: a.lambda,
            whitelisted: false,
        });
    }
    for l in (0..p).filter(|&l| penalized[l] && !seen[l]) {
        entries.push(PathEntry {
            index: l,
            lambda: S::zero(),
            whitelisted: false,
        });
    }

    Ok(RegularizationPath {
        entries,
        grid,
        active_counts,
        lambda_max,
    })
}

/// Root of the gap function, linear between `(l_prev, g_prev)` with
/// `g_prev <= 0` and `(l_cur, g_cur)` with `g_cur >= 0`.
fn interpolate_crossing<S: Scalar>(l_prev: S, g_prev: S, l_cur: S, g_cur: S) -> S {
    let g_prev = g_prev.min(S::zero());
    let g_cur = g_cur.max(S::zero());
    let denom = g_cur - g_prev;
    if denom <= S::zero() {
        return l_cur;
    }
    let t = (-g_prev) / denom;
    (l_prev + (l_cur - l_prev) * t).max(l_cur).min(l_prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};

    fn orthogonal_pair(rho1: f64, rho2: f64) -> (Array2<f64>, Array1<f64>) {
        // columns are orthonormal under (1/n)<.,.> with n = 4
        let x = array![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
        let y = x.column(0).mapv(|v| v * rho1) + x.column(1).mapv(|v| v * rho2);
        (x, y)
    }

    #[test]
    fn orthogonal_design_entry_lambdas_are_correlations() {
        let (x, y) = orthogonal_pair(0.7, -0.3);
        let prob = LassoProblem::new(x.view(), y.view()).unwrap();
        let path = path(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(path.order(), vec![0, 1]);
        assert!((path.entries[0].lambda - 0.7).abs() < 1e-9);
        assert!((path.entries[1].lambda - 0.3).abs() < 1e-9);
    }

    #[test]
    fn whitelist_precedes_penalized() {
        let (x, y) = orthogonal_pair(0.7, -0.3);
        let prob = LassoProblem::with_weights(x.view(), y.view(), vec![1.0, 0.0]).unwrap();
        let path = path(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(path.order(), vec![1, 0]);
        assert!(path.entries[0].whitelisted);
        assert!(path.entries[0].lambda.is_infinite());
    }

    #[test]
    fn uncorrelated_regressor_enters_at_zero() {
        let x = array![[1.0], [1.0], [-1.0], [-1.0]];
        let y = array![1.0, -1.0, 1.0, -1.0];
        let prob = LassoProblem::new(x.view(), y.view()).unwrap();
        let path = path(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(path.entries.len(), 1);
        assert_eq!(path.entries[0].lambda, 0.0);
    }

    #[test]
    fn grid_point_resolution_records_grid_values() {
        let (x, y) = orthogonal_pair(0.7, -0.3);
        let prob = LassoProblem::new(x.view(), y.view()).unwrap();
        let cfg = SolverConfig {
            entry_resolution: EntryResolution::GridPoint,
            ..SolverConfig::default()
        };
        let path = path(&prob, &cfg).unwrap();
        for e in &path.entries {
            assert!(path.grid.contains(&e.lambda));
        }
        assert!(path.entries[1].lambda <= 0.3);
    }

    #[test]
    fn excluded_coefficients_do_not_appear() {
        let (x, y) = orthogonal_pair(0.7, -0.3);
        let prob =
            LassoProblem::with_weights(x.view(), y.view(), vec![f64::INFINITY, 1.0]).unwrap();
        let path = path(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(path.order(), vec![1]);
    }
}
