use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{IndependencePattern, RVineMatrix};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::scalar::Scalar;

/// Regressor sets of one structural equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressorSets {
    /// Left-hand-side variable `η(j)`.
    pub variable: usize,
    /// `{η(1), …, η(j−1)}` in the order `κ_1, κ_2, …`.
    pub potential: Vec<usize>,
    pub active: Vec<usize>,
    pub unused: Vec<usize>,
}

/// Linear structural equations read off a structure matrix.
///
/// Equation `j` (1-based) explains `η(j)` by `κ_1(η(j)), …, κ_{j−1}(η(j))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemModel<S> {
    pub eta: Vec<usize>,
    /// `kappa[j − 1][i − 1] = κ_i(η(j))`.
    pub kappa: Vec<Vec<usize>>,
    /// Coefficients aligned with `kappa`.
    pub phi: Vec<Vec<S>>,
    pub psi: Vec<S>,
}

impl<S: Scalar> SemModel<S> {
    pub fn d(&self) -> usize {
        self.eta.len()
    }

    pub fn regressor_sets(&self) -> Vec<RegressorSets> {
        (0..self.d())
            .map(|j| {
                let potential = self.kappa[j].clone();
                let (active, unused): (Vec<usize>, Vec<usize>) = potential
                    .iter()
                    .zip(&self.phi[j])
                    .map(|(k, p)| (*k, *p != S::zero()))
                    .fold((Vec::new(), Vec::new()), |(mut a, mut u), (k, nz)| {
                        if nz {
                            a.push(k)
                        } else {
                            u.push(k)
                        }
                        (a, u)
                    });
                RegressorSets {
                    variable: self.eta[j],
                    potential,
                    active,
                    unused,
                }
            })
            .collect()
    }
}

fn kappa_table(m: &RVineMatrix) -> Vec<Vec<usize>> {
    let d = m.d();
    (1..=d)
        .map(|j| {
            let col = d - j + 1;
            (1..j).map(|i| m.get(d - i + 1, col)).collect()
        })
        .collect()
}

/// Regressor sets implied by a structure and an independence pattern,
/// without fitting coefficients.
pub fn regressor_sets(m: &RVineMatrix, pattern: &IndependencePattern) -> Result<Vec<RegressorSets>> {
    pattern.check_conformable(m)?;
    let d = m.d();
    let eta = m.eta();
    let kappa = kappa_table(m);
    Ok((1..=d)
        .map(|j| {
            let col = d - j + 1;
            let potential = kappa[j - 1].clone();
            let mut active = Vec::new();
            let mut unused = Vec::new();
            for (i, &k) in potential.iter().enumerate() {
                if pattern.edge(i + 1, col) {
                    active.push(k);
                } else {
                    unused.push(k);
                }
            }
            RegressorSets {
                variable: eta[j - 1],
                potential,
                active,
                unused,
            }
        })
        .collect())
}

/// Refits every equation by least squares on its active regressors and sets
/// `ψ` so that fitted variance plus `ψ²` equals one.
pub fn assemble_sem<S: Scalar>(
    m: &RVineMatrix,
    pattern: &IndependencePattern,
    z: &Dataset<S>,
) -> Result<SemModel<S>> {
    if z.scale() != Scale::Z {
        return Err(Error::Contract("SEM refit expects z-scale data".into()));
    }
    if z.d() != m.d() {
        return Err(Error::Shape(format!("data has {} columns, structure {}", z.d(), m.d())));
    }
    let sets = regressor_sets(m, pattern)?;
    let n = z.n();
    let nn = S::lit(n as f64);
    let eta = m.eta();
    let kappa = kappa_table(m);
    let mut phi = Vec::with_capacity(m.d());
    let mut psi = Vec::with_capacity(m.d());
    for (j, set) in sets.iter().enumerate() {
        let y = z.column(set.variable - 1);
        let mut row = vec![S::zero(); kappa[j].len()];
        let fitted = if set.active.is_empty() {
            Array1::<S>::zeros(n)
        } else {
            let x = Array2::from_shape_fn((n, set.active.len()), |(r, c)| {
                z.values()[[r, set.active[c] - 1]]
            });
            let beta = least_squares(x.view(), y).map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!(
                    "rank-deficient refit for variable {}: {msg}",
                    set.variable
                )),
                other => other,
            })?;
            for (c, v) in set.active.iter().enumerate() {
                let pos = kappa[j].iter().position(|k| k == v).expect("active within kappa");
                row[pos] = beta[c];
            }
            x.dot(&beta)
        };
        let mean = fitted.sum() / nn;
        let var = fitted.iter().map(|f| (*f - mean) * (*f - mean)).sum::<S>() / nn;
        psi.push((S::one() - var).max(S::zero()).sqrt());
        phi.push(row);
    }
    Ok(SemModel {
        eta,
        kappa,
        phi,
        psi,
    })
}
