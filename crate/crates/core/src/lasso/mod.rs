//! Squared-error regression with per-coefficient L1 penalties, solved by
//! cyclic coordinate descent on the Gram matrix.
//!
//! The objective is
//!
//! ```text
//! (1/2n) Σ_i (y_i − Σ_ℓ φ_ℓ x_iℓ)² + λ Σ_ℓ w_ℓ |φ_ℓ|
//! ```
//!
//! with no intercept. A weight of `0` leaves a coefficient unpenalized
//! (whitelist); an infinite weight removes it from the problem (blacklist).

mod cv;
mod path;

pub use cv::{cross_validate, CvResult, CvRule};
pub use path::{path, PathEntry, RegularizationPath};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the entry λ of a coefficient is read off the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryResolution {
    /// Grid value at which the coefficient is first nonzero.
    GridPoint,
    /// Linear interpolation of the KKT gap between the last inactive and the
    /// first active grid point. Exact for orthogonal designs.
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once the largest coefficient change in a sweep is below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Number of log-spaced λ values from `λ_max` down to `ratio · λ_max`.
    pub grid_len: usize,
    pub lambda_ratio: f64,
    pub entry_resolution: EntryResolution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-7,
            max_sweeps: 100_000,
            grid_len: 100,
            lambda_ratio: 1e-4,
            entry_resolution: EntryResolution::Interpolated,
        }
    }
}

/// A single penalized regression problem.
#[derive(Debug, Clone)]
pub struct LassoProblem<S> {
    x: Array2<S>,
    y: Array1<S>,
    weights: Vec<S>,
    gram: Array2<S>,
    xty: Array1<S>,
}

impl<S: Scalar> LassoProblem<S> {
    /// Problem with unit penalty weights.
    pub fn new(x: ArrayView2<'_, S>, y: ArrayView1<'_, S>) -> Result<Self> {
        let p = x.ncols();
        Self::with_weights(x, y, vec![S::one(); p])
    }

    pub fn with_weights(x: ArrayView2<'_, S>, y: ArrayView1<'_, S>, weights: Vec<S>) -> Result<Self> {
        let (n, p) = x.dim();
        if p == 0 {
            return Err(Error::Contract("lasso problem needs at least one regressor".into()));
        }
        if n == 0 || y.len() != n {
            return Err(Error::Shape(format!("X has {n} rows but y has {}", y.len())));
        }
        if weights.len() != p {
            return Err(Error::Shape(format!("{} penalty weights for {p} regressors", weights.len())));
        }
        if weights.iter().any(|w| w.is_nan() || *w < S::zero()) {
            return Err(Error::Contract("penalty weights must be nonnegative".into()));
        }
        if weights.iter().all(|w| w.is_infinite()) {
            return Err(Error::Contract("every regressor is excluded".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite value in regression data".into()));
        }
        let nn = S::lit(n as f64);
        let gram = x.t().dot(&x).mapv(|v| v / nn);
        let xty = x.t().dot(&y).mapv(|v| v / nn);
        Ok(LassoProblem {
            x: x.to_owned(),
            y: y.to_owned(),
            weights,
            gram,
            xty,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn x(&self) -> ArrayView2<'_, S> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, S> {
        self.y.view()
    }

    /// Same penalty weights on a subset of the rows.
    pub(crate) fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        let x = self.x.select(Axis(0), rows);
        let y = self.y.select(Axis(0), rows);
        Self::with_weights(x.view(), y.view(), self.weights.clone())
    }

    /// Smallest λ at which every penalized coefficient is zero, given the
    /// whitelisted coefficients fitted by least squares.
    pub(crate) fn lambda_max(&self, cfg: &SolverConfig) -> Result<S> {
        let mut state = CdState::new(self.p());
        let mask: Vec<bool> = self.weights.iter().map(|w| *w == S::zero()).collect();
        if mask.iter().any(|&m| m) {
            state.descend(self, S::zero(), &mask, cfg)?;
        }
        let mut lmax = S::zero();
        for (l, w) in self.weights.iter().enumerate() {
            if *w > S::zero() && w.is_finite() {
                let c = (self.xty[l] - state.gphi[l]).abs() / *w;
                if c > lmax {
                    lmax = c;
                }
            }
        }
        Ok(lmax)
    }

    pub(crate) fn active_mask(&self) -> Vec<bool> {
        self.weights.iter().map(|w| w.is_finite()).collect()
    }
}

/// Coefficients and the running product `G φ`.
#[derive(Debug, Clone)]
pub(crate) struct CdState<S> {
    pub beta: Vec<S>,
    pub gphi: Vec<S>,
}

impl<S: Scalar> CdState<S> {
    pub fn new(p: usize) -> Self {
        CdState {
            beta: vec![S::zero(); p],
            gphi: vec![S::zero(); p],
        }
    }

    /// Partial-residual correlation of coordinate `l` with its own
    /// contribution added back.
    #[inline]
    pub fn partial_corr(&self, prob: &LassoProblem<S>, l: usize) -> S {
        prob.xty[l] - self.gphi[l] + prob.gram[[l, l]] * self.beta[l]
    }

    fn update(&mut self, prob: &LassoProblem<S>, l: usize, lambda: S) -> S {
        let g_ll = prob.gram[[l, l]];
        if g_ll <= S::zero() {
            return S::zero();
        }
        let z = self.partial_corr(prob, l);
        let thresh = lambda * prob.weights[l];
        let new = soft_threshold(z, thresh) / g_ll;
        let delta = new - self.beta[l];
        if delta != S::zero() {
            self.beta[l] = new;
            for (g, col) in self.gphi.iter_mut().zip(prob.gram.column(l).iter()) {
                *g = *g + delta * *col;
            }
        }
        delta.abs()
    }

    /// Cyclic coordinate descent with active-set cycling over the
    /// coordinates allowed by `mask`.
    pub fn descend(
        &mut self,
        prob: &LassoProblem<S>,
        lambda: S,
        mask: &[bool],
        cfg: &SolverConfig,
    ) -> Result<usize> {
        let mut sweeps = 0usize;
        loop {
            // never ask for more than the precision of S can deliver
            let scale = self.beta.iter().fold(S::one(), |m, b| m.max(b.abs()));
            let tol = S::lit(cfg.tol).max(S::lit(16.0) * S::epsilon() * scale);
            let mut max_delta = S::zero();
            for l in (0..prob.p()).filter(|&l| mask[l]) {
                max_delta = max_delta.max(self.update(prob, l, lambda));
            }
            sweeps += 1;
            if max_delta < tol {
                return Ok(sweeps);
            }
            loop {
                let mut inner = S::zero();
                for l in 0..prob.p() {
                    if mask[l] && self.beta[l] != S::zero() {
                        inner = inner.max(self.update(prob, l, lambda));
                    }
                }
                sweeps += 1;
                if inner < tol {
                    break;
                }
                if sweeps >= cfg.max_sweeps {
                    break;
                }
            }
            if sweeps >= cfg.max_sweeps {
                return Err(Error::Numeric(format!(
                    "coordinate descent did not converge in {} sweeps at lambda = {lambda}",
                    cfg.max_sweeps
                )));
            }
        }
    }
}

#[inline]
pub fn soft_threshold<S: Scalar>(z: S, t: S) -> S {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        S::zero()
    }
}

/// Minimizer of the penalized objective at a fixed `lambda`.
pub fn solve<S: Scalar>(problem: &LassoProblem<S>, lambda: S, cfg: &SolverConfig) -> Result<Vec<S>> {
    if !lambda.is_finite() || lambda < S::zero() {
        return Err(Error::Contract(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let mut state = CdState::new(problem.p());
    state.descend(problem, lambda, &problem.active_mask(), cfg)?;
    Ok(state.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn zero_response_gives_zero_coefficients() {
        let x = array![[1.0, 0.5], [-1.0, 0.2], [0.3, -0.7], [0.1, 0.9]];
        let y = Array1::<f64>::zeros(4);
        let prob = LassoProblem::new(x.view(), y.view()).unwrap();
        assert_eq!(solve(&prob, 1.0, &cfg()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn lambda_above_max_correlation_zeroes_everything() {
        let x = array![[1.0, 0.5], [-1.0, 0.2], [0.3, -0.7], [0.1, 0.9]];
        let y = array![0.4, -0.8, 0.3, 0.2];
        let prob = LassoProblem::new(x.view(), y.view()).unwrap();
        let lmax = x.t().dot(&y).mapv(|v: f64| (v / 4.0).abs()).fold(0.0f64, |a, b| a.max(*b));
        assert_eq!(solve(&prob, lmax, &cfg()).unwrap(), vec![0.0, 0.0]);
        assert!(solve(&prob, 0.9 * lmax, &cfg()).unwrap().iter().any(|b| *b != 0.0));
    }

    #[test]
    fn excluded_coefficients_stay_zero() {
        let x = array![[1.0, 0.5], [-1.0, 0.2], [0.3, -0.7], [0.1, 0.9]];
        let y = array![1.0, -0.8, 0.3, 0.2];
        let prob =
            LassoProblem::with_weights(x.view(), y.view(), vec![f64::INFINITY, 1.0]).unwrap();
        let beta = solve(&prob, 0.0, &cfg()).unwrap();
        assert_eq!(beta[0], 0.0);
        assert!(beta[1] != 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let x = array![[1.0], [f64::NAN]];
        let y = array![1.0, 2.0];
        assert!(matches!(LassoProblem::new(x.view(), y.view()), Err(Error::Numeric(_))));
        let x = array![[1.0], [2.0]];
        assert!(matches!(
            LassoProblem::with_weights(x.view(), y.view(), vec![f64::INFINITY]),
            Err(Error::Contract(_))
        ));
        let prob = LassoProblem::new(x.view(), y.view()).unwrap();
        assert!(matches!(solve(&prob, f64::INFINITY, &cfg()), Err(Error::Contract(_))));
    }

    #[test]
    fn whitelisted_coefficient_is_unpenalized() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let y = array![0.2, 0.1, -0.2, -0.1];
        let prob = LassoProblem::<f64>::with_weights(x.view(), y.view(), vec![0.0, 1.0]).unwrap();
        let beta = solve(&prob, 10.0, &cfg()).unwrap();
        assert!((beta[0] - 0.2).abs() < 1e-12);
        assert_eq!(beta[1], 0.0);
    }
}
