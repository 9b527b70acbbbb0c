use serde::{Deserialize, Serialize};

use super::RVineMatrix;
use crate::error::{Error, Result};

/// Strictly lower-triangular boolean matrix Γ. `true` marks a pair copula
/// that is estimated, `false` one that is fixed to independence.
///
/// Entry `(d − t + 1, j)` belongs to the tree-`t` edge of column `j`,
/// matching [`RVineMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<bool>>", into = "Vec<Vec<bool>>")]
pub struct IndependencePattern {
    d: usize,
    cells: Vec<bool>,
}

impl IndependencePattern {
    pub fn all(d: usize, value: bool) -> Self {
        let mut p = IndependencePattern {
            d,
            cells: vec![false; d * d],
        };
        for i in 2..=d {
            for j in 1..i {
                p.set(i, j, value);
            }
        }
        p
    }

    /// True exactly on the first `k` trees.
    pub fn truncated(d: usize, k: usize) -> Self {
        let mut p = Self::all(d, false);
        for t in 1..=k.min(d.saturating_sub(1)) {
            for j in 1..=d - t {
                p.set(d - t + 1, j, true);
            }
        }
        p
    }

    /// Row `i` (1-based) holds `i − 1` flags.
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        let d = rows.len();
        let mut p = Self::all(d, false);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::Shape(format!(
                    "pattern row {} has {} entries, expected {r}",
                    r + 1,
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                p.set(r + 1, c + 1, v);
            }
        }
        Ok(p)
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        (1..=self.d)
            .map(|i| (1..i).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i > j);
        self.cells[(i - 1) * self.d + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i > j && i <= self.d);
        self.cells[(i - 1) * self.d + (j - 1)] = value;
    }

    /// Flag of the tree-`t` edge in column `j`.
    pub fn edge(&self, t: usize, j: usize) -> bool {
        self.get(self.d - t + 1, j)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|v| **v).count()
    }

    /// Entrywise `self ⊆ other`.
    pub fn is_subset(&self, other: &IndependencePattern) -> bool {
        self.d == other.d && self.cells.iter().zip(&other.cells).all(|(a, b)| !a || *b)
    }

    pub fn check_conformable(&self, m: &RVineMatrix) -> Result<()> {
        if self.d != m.d() {
            return Err(Error::Shape(format!(
                "pattern is {}x{} but the structure is {}x{}",
                self.d,
                self.d,
                m.d(),
                m.d()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<bool>>> for IndependencePattern {
    type Error = Error;

    fn try_from(rows: Vec<Vec<bool>>) -> Result<Self> {
        IndependencePattern::from_rows(rows)
    }
}

impl From<IndependencePattern> for Vec<Vec<bool>> {
    fn from(p: IndependencePattern) -> Self {
        p.rows()
    }
}
