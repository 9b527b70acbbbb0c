//! Turning the regularization-path matrix into independence patterns.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rvine::IndependencePattern;
use crate::scalar::Scalar;
use crate::select::RegPathMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum ThresholdSpec {
    Single(f64),
    Adaptive(f64),
}

impl ThresholdSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::Single(t) if !(t > 0.0) => {
                Err(Error::Contract(format!("threshold must be positive, got {t}")))
            }
            ThresholdSpec::Adaptive(mu) if !(mu > 0.0 && mu <= 1.0) => {
                Err(Error::Contract(format!("share must lie in (0, 1], got {mu}")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply<S: Scalar>(&self, lambda: &RegPathMatrix<S>) -> Result<IndependencePattern> {
        match *self {
            ThresholdSpec::Single(t) => single_threshold(lambda, S::lit(t)),
            ThresholdSpec::Adaptive(mu) => adaptive_threshold(lambda, mu).map(|a| a.pattern),
        }
    }
}

/// `γ = 1{λ ≥ λ_T}` entrywise.
pub fn single_threshold<S: Scalar>(lambda: &RegPathMatrix<S>, lambda_t: S) -> Result<IndependencePattern> {
    if !(lambda_t > S::zero()) {
        return Err(Error::Contract(format!("threshold must be positive, got {lambda_t}")));
    }
    let mut p = IndependencePattern::all(lambda.d(), false);
    for (i, j, v) in lambda.entries() {
        p.set(i, j, v >= lambda_t);
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveThreshold<S> {
    pub pattern: IndependencePattern,
    /// Smallest kept value; `+∞` when nothing is kept.
    pub lambda_mu: S,
    /// Target count `⌊μ · d(d−1)/2⌋`.
    pub target: usize,
    /// Realized count, larger than `target` only through ties at the cut.
    pub kept: usize,
}

/// Keeps the `⌊μ · d(d−1)/2⌋` largest positive entries, plus anything tied
/// with the last of them.
pub fn adaptive_threshold<S: Scalar>(lambda: &RegPathMatrix<S>, mu: f64) -> Result<AdaptiveThreshold<S>> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Contract(format!("share must lie in (0, 1], got {mu}")));
    }
    let d = lambda.d();
    let target = (mu * (d * (d - 1) / 2) as f64).floor() as usize;
    let mut values: Vec<S> = lambda
        .entries()
        .map(|(_, _, v)| v)
        .filter(|v| *v > S::zero())
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let k = target.min(values.len());
    if k == 0 {
        return Ok(AdaptiveThreshold {
            pattern: IndependencePattern::all(d, false),
            lambda_mu: S::infinity(),
            target,
            kept: 0,
        });
    }
    let lambda_mu = values[k - 1];
    let mut pattern = IndependencePattern::all(d, false);
    let mut kept = 0;
    for (i, j, v) in lambda.entries() {
        if v >= lambda_mu {
            pattern.set(i, j, true);
            kept += 1;
        }
    }
    Ok(AdaptiveThreshold {
        pattern,
        lambda_mu,
        target,
        kept,
    })
}

/// `{(lo + k·step)^power : k = 0, 1, …}` up to `hi`, e.g. the fourth powers
/// of `0.05, 0.10, …, 0.50`.
pub fn power_grid(lo: f64, hi: f64, step: f64, power: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && step > 0.0) {
        return Err(Error::Config(format!("bad grid lo={lo} hi={hi} step={step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| (lo + k as f64 * step).powf(power)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example_six() -> RegPathMatrix<f64> {
        RegPathMatrix::from_rows(vec![
            vec![],
            vec![0.0072],
            vec![0.0082, 0.0039],
            vec![0.0005, 0.0091, 0.4993],
            vec![0.0538, 0.0210, 0.6601, 0.1344],
            vec![0.3171, 0.3117, 0.7244, 0.9481, 0.9378],
        ])
        .unwrap()
    }

    fn survivors(p: &IndependencePattern) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 2..=p.d() {
            for j in 1..i {
                if p.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn single_threshold_example() {
        let p = single_threshold(&example_six(), 0.1).unwrap();
        assert_eq!(
            survivors(&p),
            vec![(4, 3), (5, 3), (5, 4), (6, 1), (6, 2), (6, 3), (6, 4), (6, 5)]
        );
    }

    #[test]
    fn adaptive_threshold_example() {
        let a = adaptive_threshold(&example_six(), 0.5).unwrap();
        assert_eq!(a.target, 7);
        assert_eq!(a.kept, 7);
        assert_eq!(a.lambda_mu, 0.3117);
        assert_eq!(
            survivors(&a.pattern),
            vec![(4, 3), (5, 3), (6, 1), (6, 2), (6, 3), (6, 4), (6, 5)]
        );
    }

    #[test]
    fn threshold_extremes() {
        let l = example_six();
        assert_eq!(single_threshold(&l, 1.0).unwrap().count(), 0);
        assert_eq!(single_threshold(&l, 1e-4).unwrap().count(), 15);
        assert!(single_threshold(&l, 0.0).is_err());
        assert_eq!(adaptive_threshold(&l, 1.0).unwrap().kept, 15);
        assert_eq!(adaptive_threshold(&l, 0.01).unwrap().kept, 0);
        assert!(adaptive_threshold(&l, 1.5).is_err());
    }

    #[test]
    fn sentinel_always_survives() {
        let l = RegPathMatrix::from_rows(vec![vec![], vec![f64::INFINITY]]).unwrap();
        assert!(single_threshold(&l, 1e300).unwrap().get(2, 1));
    }

    #[test]
    fn ties_at_cut_are_kept() {
        let l = RegPathMatrix::from_rows(vec![vec![], vec![0.5], vec![0.5, 0.9]]).unwrap();
        let a = adaptive_threshold(&l, 0.67).unwrap();
        assert_eq!(a.target, 2);
        assert_eq!(a.kept, 3);
    }

    #[test]
    fn fourth_power_grid() {
        let g = power_grid(0.05, 0.5, 0.05, 4.0).unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[0] - 0.05f64.powi(4)).abs() < 1e-15);
        assert!((g[9] - 0.0625).abs() < 1e-12);
    }
}
