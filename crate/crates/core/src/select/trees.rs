use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RegPathMatrix, SelectionConfig};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::lasso::{path, LassoProblem};
use crate::rvine::PartialMatrix;
use crate::scalar::Scalar;

/// Stored regression path of one column in internal labels, most important
/// regressor first.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPath<S> {
    pub labels: Vec<usize>,
    pub lambdas: Vec<S>,
}

/// A regressor rejected because it broke the proximity condition, and the
/// outcome of the constrained re-solve. Labels are original variable labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcfEvent {
    pub row: usize,
    pub col: usize,
    /// `None` when the stored path had no entry left for this tree.
    pub rejected: Option<usize>,
    pub accepted: usize,
    pub whitelist: Vec<usize>,
    pub blacklist: Vec<usize>,
}

/// State after the first tree: diagonal and bottom row fixed, full paths
/// stored per column. Matrix and paths use internal labels where `η(v) = v`.
#[derive(Debug, Clone)]
pub struct FirstTree<S> {
    pub eta: Vec<usize>,
    pub(crate) partial: PartialMatrix,
    pub(crate) paths: Vec<ColumnPath<S>>,
    pub(crate) lambda: RegPathMatrix<S>,
}

impl<S: Scalar> FirstTree<S> {
    /// Lower-triangle rows in original labels, `0` for unfilled cells.
    pub fn matrix_rows(&self) -> Vec<Vec<usize>> {
        let d = self.partial.d();
        (1..=d)
            .map(|i| {
                (1..=i)
                    .map(|j| match self.partial.get(i, j) {
                        0 => 0,
                        v => self.eta[v - 1],
                    })
                    .collect()
            })
            .collect()
    }

    /// Stored path of column `j` in original labels.
    pub fn stored_path(&self, j: usize) -> Vec<usize> {
        self.paths[j - 1].labels.iter().map(|&v| self.eta[v - 1]).collect()
    }

    pub fn lambda(&self) -> &RegPathMatrix<S> {
        &self.lambda
    }
}

pub(crate) fn check_eta(eta: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d + 1];
    if eta.len() != d || eta.iter().any(|&v| v < 1 || v > d || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::Contract(format!("ordering {eta:?} is not a permutation of 1..={d}")));
    }
    Ok(())
}

fn internal_data<S: Scalar>(z: &Dataset<S>, eta: &[usize]) -> Result<Dataset<S>> {
    if z.scale() != Scale::Z {
        return Err(Error::Contract("structure selection expects z-scale data".into()));
    }
    check_eta(eta, z.d())?;
    let order: Vec<usize> = eta.iter().map(|v| v - 1).collect();
    z.select_columns(&order)
}

/// Path of internal variable `response` on internal `regressors`, with the
/// first `whitelisted` of them unpenalized.
fn regress<S: Scalar>(
    data: ArrayView2<'_, S>,
    response: usize,
    regressors: &[usize],
    whitelisted: usize,
    cfg: &SelectionConfig,
) -> Result<ColumnPath<S>> {
    let n = data.nrows();
    let x = Array2::from_shape_fn((n, regressors.len()), |(r, c)| data[[r, regressors[c] - 1]]);
    let y = data.column(response - 1);
    let weights = (0..regressors.len())
        .map(|c| if c < whitelisted { S::zero() } else { S::one() })
        .collect();
    let prob = LassoProblem::with_weights(x.view(), y, weights)?;
    let p = path(&prob, &cfg.solver)?;
    Ok(ColumnPath {
        labels: p.entries.iter().map(|e| regressors[e.index]).collect(),
        lambdas: p.entries.iter().map(|e| e.lambda).collect(),
    })
}

/// Fixes the diagonal and the first tree: each internal variable `v ≥ 2` is
/// linked to the first regressor on its unpenalized-to-zero path over
/// `1..v−1`.
pub fn select_first_tree<S: Scalar>(
    z: &Dataset<S>,
    eta: &[usize],
    cfg: &SelectionConfig,
) -> Result<FirstTree<S>> {
    let zi = internal_data(z, eta)?;
    let d = zi.d();
    let diagonal: Vec<usize> = (1..=d).rev().collect();
    let mut partial = PartialMatrix::with_diagonal(&diagonal)?;
    let mut lambda = RegPathMatrix::zeros(d);

    if d == 2 {
        partial.set(2, 1, 1);
        lambda.set(2, 1, S::sentinel());
        return Ok(FirstTree {
            eta: eta.to_vec(),
            partial,
            paths: vec![ColumnPath {
                labels: vec![1],
                lambdas: vec![S::sentinel()],
            }],
            lambda,
        });
    }

    let data = zi.values();
    let column = |j: usize| -> Result<ColumnPath<S>> {
        let v = d - j + 1;
        let regressors: Vec<usize> = (1..v).collect();
        regress(data, v, &regressors, 0, cfg).map_err(|e| e.at_cell(d, j))
    };
    let paths: Vec<Result<ColumnPath<S>>> = if cfg.parallel {
        (1..d).into_par_iter().map(column).collect()
    } else {
        (1..d).map(column).collect()
    };
    let paths: Vec<ColumnPath<S>> = paths.into_iter().collect::<Result<_>>()?;
    for (j, p) in (1..d).zip(&paths) {
        partial.set(d, j, p.labels[0]);
        lambda.set(d, j, p.lambdas[0]);
    }
    Ok(FirstTree {
        eta: eta.to_vec(),
        partial,
        paths,
        lambda,
    })
}

/// Final structure and regularization-path matrix in original labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TreeSelection<S> {
    pub matrix: crate::rvine::RVineMatrix,
    pub lambda: RegPathMatrix<S>,
    pub pcf_log: Vec<PcfEvent>,
}

struct Decision<S> {
    label: usize,
    lambda: S,
    new_path: Option<ColumnPath<S>>,
    event: Option<PcfEvent>,
}

fn fill_cell<S: Scalar>(
    data: ArrayView2<'_, S>,
    partial: &PartialMatrix,
    stored: &ColumnPath<S>,
    eta: &[usize],
    i: usize,
    j: usize,
    cfg: &SelectionConfig,
) -> Result<Decision<S>> {
    let d = partial.d();
    let t = d - i + 1;
    let allowed = partial.allowed_entries(i, j)?;
    if allowed.is_empty() {
        return Err(Error::Structure("no proximity-feasible entry".into()));
    }
    let candidate = stored.labels.get(t - 1).copied();
    if let Some(c) = candidate.filter(|c| allowed.contains(c)) {
        return Ok(Decision {
            label: c,
            lambda: stored.lambdas[t - 1],
            new_path: None,
            event: None,
        });
    }
    let whitelist = partial.whitelist(i, j);
    let blacklist = partial.blacklist(i, j)?;
    let regressors: Vec<usize> = whitelist.iter().chain(&allowed).copied().collect();
    let response = partial.get(j, j);
    let fresh = regress(data, response, &regressors, whitelist.len(), cfg)?;
    let accepted = fresh.labels[whitelist.len()];
    let lambda = fresh.lambdas[whitelist.len()];
    let orig = |v: usize| eta[v - 1];
    let event = PcfEvent {
        row: i,
        col: j,
        rejected: candidate.map(orig),
        accepted: orig(accepted),
        whitelist: whitelist.iter().map(|&v| orig(v)).collect(),
        blacklist: blacklist.iter().map(|&v| orig(v)).collect(),
    };
    Ok(Decision {
        label: accepted,
        lambda,
        new_path: Some(fresh),
        event: Some(event),
    })
}

/// Completes the matrix tree by tree. A stored path entry is accepted when
/// it keeps the proximity condition; otherwise the column is re-solved with
/// its placed regressors unpenalized and the infeasible ones removed.
pub fn select_higher_trees<S: Scalar>(
    z: &Dataset<S>,
    first: FirstTree<S>,
    cfg: &SelectionConfig,
) -> Result<TreeSelection<S>> {
    let zi = internal_data(z, &first.eta)?;
    let data = zi.values();
    let FirstTree {
        eta,
        mut partial,
        mut paths,
        mut lambda,
    } = first;
    let d = partial.d();
    let mut pcf_log = Vec::new();

    for i in (2..d).rev() {
        let decide = |j: usize| -> Result<Decision<S>> {
            fill_cell(data, &partial, &paths[j - 1], &eta, i, j, cfg).map_err(|e| e.at_cell(i, j))
        };
        let decisions: Vec<Result<Decision<S>>> = if cfg.parallel {
            (1..i).into_par_iter().map(decide).collect()
        } else {
            (1..i).map(decide).collect()
        };
        for (j, dec) in (1..i).zip(decisions) {
            let dec = dec?;
            partial.set(i, j, dec.label);
            lambda.set(i, j, dec.lambda);
            if let Some(p) = dec.new_path {
                paths[j - 1] = p;
            }
            if let Some(ev) = dec.event {
                pcf_log.push(ev);
            }
        }
    }

    let internal = partial.finish()?;
    Ok(TreeSelection {
        matrix: internal.relabel(&eta),
        lambda,
        pcf_log,
    })
}
