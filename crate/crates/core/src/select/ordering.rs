use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SelectionConfig;
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::lasso::{cross_validate, solve, LassoProblem};
use crate::scalar::Scalar;

/// Equation order obtained from cross-validated neighbourhood regressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    /// `(η(1), …, η(d))`, 1-based variable labels.
    pub eta: Vec<usize>,
    /// How often each variable (by label) is a nonzero regressor.
    pub occurrence_counts: Vec<usize>,
    /// Cross-validated penalty of each variable's own regression.
    pub lambdas: Vec<f64>,
    pub rng_seed: u64,
}

/// Per-variable fold seed, so results do not depend on scheduling.
pub(crate) fn fold_seed(seed: u64, variable: usize) -> u64 {
    seed ^ (variable as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Regresses every variable on all others with a cross-validated penalty
/// and ranks variables by how often they are selected, most frequent first.
pub fn lasso_ordering<S: Scalar>(z: &Dataset<S>, cfg: &SelectionConfig) -> Result<OrderingResult> {
    if z.scale() != Scale::Z {
        return Err(Error::Contract("ordering expects z-scale data".into()));
    }
    let d = z.d();
    if d < 3 {
        return Err(Error::Contract(format!("ordering needs d >= 3, got {d}")));
    }
    let n = z.n();
    let values = z.values();

    let regress = |j: usize| -> Result<(Vec<bool>, f64)> {
        let others: Vec<usize> = (0..d).filter(|&c| c != j).collect();
        let x = Array2::from_shape_fn((n, d - 1), |(r, c)| values[[r, others[c]]]);
        let y = values.column(j);
        let prob = LassoProblem::new(x.view(), y)?;
        let cv = cross_validate(&prob, cfg.k_folds, fold_seed(cfg.seed, j + 1), &cfg.solver)?;
        let lambda = cv.pick(cfg.cv_rule);
        let beta = solve(&prob, lambda, &cfg.solver)?;
        let mut hits = vec![false; d];
        for (c, b) in beta.iter().enumerate() {
            hits[others[c]] = *b != S::zero();
        }
        Ok((hits, lambda.as_f64()))
    };

    let results: Vec<Result<(Vec<bool>, f64)>> = if cfg.parallel {
        (0..d).into_par_iter().map(regress).collect()
    } else {
        (0..d).map(regress).collect()
    };

    let mut counts = vec![0usize; d];
    let mut lambdas = Vec::with_capacity(d);
    for res in results {
        let (hits, lambda) = res?;
        for (c, h) in hits.iter().enumerate() {
            if *h {
                counts[c] += 1;
            }
        }
        lambdas.push(lambda);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let keys: Vec<u64> = (0..d).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(keys[a].cmp(&keys[b])));

    Ok(OrderingResult {
        eta: order.into_iter().map(|c| c + 1).collect(),
        occurrence_counts: counts,
        lambdas,
        rng_seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_quantile;

    fn noise_z(n: usize, d: usize, seed: u64) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = Array2::from_shape_fn((n, d), |_| norm_quantile(rng.random_range(1e-9..1.0 - 1e-9)));
        Dataset::from_array(v, Scale::Z).unwrap()
    }

    #[test]
    fn chain_middle_variable_is_most_frequent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1000;
        let mut g = || norm_quantile(rng.random_range(1e-9..1.0 - 1e-9));
        let mut v = Array2::<f64>::zeros((n, 3));
        for r in 0..n {
            let z1 = g();
            let z2 = (z1 + 0.5 * g()) / 1.25f64.sqrt();
            let z3 = (z2 + 0.5 * g()) / 1.25f64.sqrt();
            v[[r, 0]] = z1;
            v[[r, 1]] = z2;
            v[[r, 2]] = z3;
        }
        let z = Dataset::from_array(v, Scale::Z).unwrap();
        let ord = lasso_ordering(&z, &SelectionConfig::default()).unwrap();
        let max = *ord.occurrence_counts.iter().max().unwrap();
        assert_eq!(ord.occurrence_counts[1], max);
    }

    #[test]
    fn deterministic_per_seed() {
        let z = noise_z(200, 5, 4);
        let cfg = SelectionConfig::default();
        let a = lasso_ordering(&z, &cfg).unwrap();
        let b = lasso_ordering(&z, &SelectionConfig { parallel: false, ..cfg }).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.eta.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn needs_three_variables() {
        let z = noise_z(50, 2, 1);
        assert!(matches!(
            lasso_ordering(&z, &SelectionConfig::default()),
            Err(Error::Contract(_))
        ));
    }
}
