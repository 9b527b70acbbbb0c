//! Lasso-driven R-vine structure selection.
//!
//! Variables are first ordered by how often they are chosen in
//! cross-validated neighbourhood regressions. Internally the data are then
//! relabeled so that `η(v) = v`, the first tree is read off unpenalized
//! regularization paths, and higher trees are filled row by row under the
//! proximity condition. Everything is mapped back to the original labels on
//! output.

mod ordering;
mod regpath;
mod trees;

pub use ordering::{lasso_ordering, OrderingResult};
pub use regpath::RegPathMatrix;
pub use trees::{select_first_tree, select_higher_trees, ColumnPath, FirstTree, PcfEvent, TreeSelection};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lasso::{CvRule, SolverConfig};
use crate::rvine::RVineMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub k_folds: usize,
    pub seed: u64,
    pub cv_rule: CvRule,
    pub solver: SolverConfig,
    /// Run independent regressions on the rayon pool.
    pub parallel: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            k_folds: 5,
            seed: 0,
            cv_rule: CvRule::OneSe,
            solver: SolverConfig::default(),
            parallel: true,
        }
    }
}

/// Structure, regularization-path matrix, ordering and pcf log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Selection<S> {
    pub matrix: RVineMatrix,
    pub lambda: RegPathMatrix<S>,
    pub eta: Vec<usize>,
    pub ordering: Option<OrderingResult>,
    pub pcf_log: Vec<PcfEvent>,
    /// Cells of `Λ` holding the `+∞` sentinel.
    pub sentinel_cells: Vec<(usize, usize)>,
}

impl<S: Scalar> Selection<S> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sel: Self = serde_json::from_str(s)?;
        let report = sel.matrix.validate()?;
        if !report.ok {
            return Err(Error::Structure(format!("stored matrix invalid: {:?}", report.first())));
        }
        if sel.lambda.d() != sel.matrix.d() {
            return Err(Error::Shape("Λ and structure differ in size".into()));
        }
        Ok(sel)
    }
}

/// Full selection: ordering, first tree, higher trees.
pub fn select_structure<S: Scalar>(z: &Dataset<S>, cfg: &SelectionConfig) -> Result<Selection<S>> {
    let d = z.d();
    let (eta, ordering) = if d < 3 {
        ((1..=d).collect::<Vec<_>>(), None)
    } else {
        let ord = lasso_ordering(z, cfg)?;
        (ord.eta.clone(), Some(ord))
    };
    select_with_ordering(z, &eta, ordering, cfg)
}

/// Selection for a given ordering.
pub fn select_with_ordering<S: Scalar>(
    z: &Dataset<S>,
    eta: &[usize],
    ordering: Option<OrderingResult>,
    cfg: &SelectionConfig,
) -> Result<Selection<S>> {
    let first = select_first_tree(z, eta, cfg)?;
    let trees = select_higher_trees(z, first, cfg)?;
    let sentinel_cells = trees
        .lambda
        .entries()
        .filter(|(_, _, v)| v.is_infinite())
        .map(|(i, j, _)| (i, j))
        .collect();
    Ok(Selection {
        matrix: trees.matrix,
        lambda: trees.lambda,
        eta: eta.to_vec(),
        ordering,
        pcf_log: trees.pcf_log,
        sentinel_cells,
    })
}
