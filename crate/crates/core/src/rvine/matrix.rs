use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower-triangular R-vine structure matrix.
///
/// Indexing is 1-based and follows the usual orientation: `m(i, i)` is the
/// diagonal, row `d` encodes the first tree, and the entry in row `d − t + 1`
/// of column `j` is the tree-`t` partner of `m(j, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct RVineMatrix {
    d: usize,
    cells: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    /// Columns nest: every column's entries are contained in each column to its left.
    Nesting,
    /// The diagonal entry of a column does not occur in the next column.
    FreshDiagonal,
    /// Proximity condition.
    Proximity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: Property,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn first(&self) -> Option<Violation> {
        self.violations.first().copied()
    }
}

/// Edge of tree `tree`: `conditioned.0 | conditioning` paired with `conditioned.1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub tree: usize,
    pub column: usize,
    pub conditioned: (usize, usize),
    pub conditioning: Vec<usize>,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.conditioned.0, self.conditioned.1)?;
        if !self.conditioning.is_empty() {
            let cond: Vec<String> = self.conditioning.iter().map(|v| v.to_string()).collect();
            write!(f, "|{}", cond.join(","))?;
        }
        Ok(())
    }
}

impl RVineMatrix {
    /// Builds from the rows of the lower triangle (row `i` holds `i` entries)
    /// and checks all three matrix properties.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = Self::from_rows_unchecked(rows)?;
        let report = m.validate()?;
        match report.first() {
            None => Ok(m),
            Some(v) => Err(Error::Structure(format!(
                "property {:?} violated at ({}, {})",
                v.property, v.row, v.col
            ))),
        }
    }

    /// Builds without the property checks; only shape and label range are
    /// enforced.
    pub fn from_rows_unchecked(rows: Vec<Vec<usize>>) -> Result<Self> {
        let d = rows.len();
        if d < 1 {
            return Err(Error::Structure("empty matrix".into()));
        }
        let mut cells = vec![0usize; d * d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r + 1 {
                return Err(Error::Structure(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    r + 1
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v < 1 || v > d {
                    return Err(Error::Structure(format!(
                        "entry {v} at ({}, {}) outside 1..={d}",
                        r + 1,
                        c + 1
                    )));
                }
                cells[r * d + c] = v;
            }
        }
        Ok(RVineMatrix { d, cells })
    }

    pub(crate) fn from_cells(d: usize, cells: Vec<usize>) -> Self {
        RVineMatrix { d, cells }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Entry `m(i, j)` with 1-based indices, `i >= j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && j >= 1 && i <= self.d);
        self.cells[(i - 1) * self.d + (j - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (1..=self.d)
            .map(|i| (1..=i).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<usize> {
        (1..=self.d).map(|i| self.get(i, i)).collect()
    }

    /// `(η(1), …, η(d))`: the diagonal read bottom to top.
    pub fn eta(&self) -> Vec<usize> {
        let mut diag = self.diagonal();
        diag.reverse();
        diag
    }

    /// Entries of column `j` below the diagonal in tree order
    /// (`m(d, j)`, `m(d−1, j)`, …, `m(j+1, j)`).
    pub fn column_partners(&self, j: usize) -> Vec<usize> {
        (j + 1..=self.d).rev().map(|i| self.get(i, j)).collect()
    }

    /// Row-reversed view: `reversed(t, j) = m(d − t + 1, j)` is the tree-`t`
    /// partner in column `j`.
    #[inline]
    pub fn reversed(&self, t: usize, j: usize) -> usize {
        self.get(self.d - t + 1, j)
    }

    /// Number of trees, `d − 1`.
    pub fn trees(&self) -> usize {
        self.d - 1
    }

    fn check_diagonal(&self) -> Result<()> {
        let mut seen = vec![false; self.d + 1];
        for (i, v) in self.diagonal().into_iter().enumerate() {
            if seen[v] {
                return Err(Error::Structure(format!(
                    "diagonal is not a permutation: {v} repeats at ({}, {})",
                    i + 1,
                    i + 1
                )));
            }
            seen[v] = true;
        }
        Ok(())
    }

    fn column_set(&self, j: usize, from_row: usize) -> BTreeSet<usize> {
        (from_row..=self.d).map(|i| self.get(i, j)).collect()
    }

    /// Checks the three properties and reports the first violation.
    pub fn validate(&self) -> Result<ValidityReport> {
        self.validate_with(false)
    }

    /// Like [`validate`](Self::validate) but collects every violation.
    pub fn validate_all(&self) -> Result<ValidityReport> {
        self.validate_with(true)
    }

    fn validate_with(&self, all: bool) -> Result<ValidityReport> {
        self.check_diagonal()?;
        let d = self.d;
        let mut violations = Vec::new();
        let done = |v: &Vec<Violation>| !all && !v.is_empty();

        // nesting, with distinct entries per column
        let sets: Vec<BTreeSet<usize>> = (1..=d).map(|j| self.column_set(j, j)).collect();
        for j in 1..=d {
            if sets[j - 1].len() != d - j + 1 {
                violations.push(Violation {
                    property: Property::Nesting,
                    row: j,
                    col: j,
                });
                if done(&violations) {
                    return Ok(report(violations));
                }
            }
        }
        for j in 1..d {
            if !sets[j].is_subset(&sets[j - 1]) {
                violations.push(Violation {
                    property: Property::Nesting,
                    row: j + 1,
                    col: j,
                });
                if done(&violations) {
                    return Ok(report(violations));
                }
            }
        }
        for j in 1..d {
            if sets[j].contains(&self.get(j, j)) {
                violations.push(Violation {
                    property: Property::FreshDiagonal,
                    row: j,
                    col: j,
                });
                if done(&violations) {
                    return Ok(report(violations));
                }
            }
        }
        for j in 1..d.saturating_sub(1) {
            for i in (j + 1..d).rev() {
                if !self.proximity_holds(i, j, self.get(i, j)) {
                    violations.push(Violation {
                        property: Property::Proximity,
                        row: i,
                        col: j,
                    });
                    if done(&violations) {
                        return Ok(report(violations));
                    }
                }
            }
        }
        Ok(report(violations))
    }

    /// Whether placing `candidate` at `(i, j)` satisfies the proximity
    /// condition given rows `i+1..=d` of column `j` and all columns to the
    /// right. Only rows below `i` are read.
    pub(crate) fn proximity_holds(&self, i: usize, j: usize, candidate: usize) -> bool {
        proximity_holds_cells(self.d, &self.cells, i, j, candidate)
    }

    /// Edges of tree `t`, one per column `j = 1..=d−t`.
    pub fn edges_of_tree(&self, t: usize) -> Result<Vec<Edge>> {
        if t < 1 || t >= self.d {
            return Err(Error::Contract(format!("tree index {t} outside 1..{}", self.d)));
        }
        Ok((1..=self.d - t).map(|j| self.edge(t, j)).collect())
    }

    /// Tree-`t` edge stored in column `j`.
    pub fn edge(&self, t: usize, j: usize) -> Edge {
        let d = self.d;
        Edge {
            tree: t,
            column: j,
            conditioned: (self.get(j, j), self.get(d - t + 1, j)),
            conditioning: (d - t + 2..=d).map(|i| self.get(i, j)).collect(),
        }
    }

    /// `κ_i(η(j)) = m(d − i + 1, d − j + 1)`.
    pub fn kappa_of(&self, j: usize, i: usize) -> Result<usize> {
        if i < 1 || j > self.d || i >= j {
            return Err(Error::Contract(format!(
                "kappa needs 1 <= i < j <= {}, got i = {i}, j = {j}",
                self.d
            )));
        }
        Ok(self.get(self.d - i + 1, self.d - j + 1))
    }

    /// Applies `map[v - 1]` to every label.
    pub fn relabel(&self, map: &[usize]) -> RVineMatrix {
        let cells = self
            .cells
            .iter()
            .map(|&v| if v == 0 { 0 } else { map[v - 1] })
            .collect();
        RVineMatrix { d: self.d, cells }
    }
}

fn report(violations: Vec<Violation>) -> ValidityReport {
    ValidityReport {
        ok: violations.is_empty(),
        violations,
    }
}

pub(crate) fn proximity_holds_cells(
    d: usize,
    cells: &[usize],
    i: usize,
    j: usize,
    candidate: usize,
) -> bool {
    let at = |r: usize, c: usize| cells[(r - 1) * d + (c - 1)];
    if i == d {
        return true;
    }
    // union of the tree-(d−i) node that column j must join
    let mut target: Vec<usize> = (i + 1..=d).map(|r| at(r, j)).collect();
    target.push(candidate);
    target.sort_unstable();
    let mut buf = Vec::with_capacity(target.len());
    for k in j + 1..=i {
        buf.clear();
        buf.push(at(k, k));
        buf.extend((i + 1..=d).map(|r| at(r, k)));
        buf.sort_unstable();
        if buf == target {
            return true;
        }
    }
    false
}

impl TryFrom<Vec<Vec<usize>>> for RVineMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        RVineMatrix::from_rows_unchecked(rows)
    }
}

impl From<RVineMatrix> for Vec<Vec<usize>> {
    fn from(m: RVineMatrix) -> Self {
        m.rows()
    }
}

impl fmt::Display for RVineMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
            writeln!(f, "{}", cells.join(""))?;
        }
        Ok(())
    }
}

/// Matrix under construction: the diagonal is fixed, off-diagonal cells are
/// filled from the bottom row upwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMatrix {
    d: usize,
    cells: Vec<usize>,
}

impl PartialMatrix {
    pub fn with_diagonal(diagonal: &[usize]) -> Result<Self> {
        let d = diagonal.len();
        let mut seen = vec![false; d + 1];
        for &v in diagonal {
            if v < 1 || v > d || seen[v] {
                return Err(Error::Structure(format!(
                    "diagonal {diagonal:?} is not a permutation of 1..={d}"
                )));
            }
            seen[v] = true;
        }
        let mut cells = vec![0usize; d * d];
        for (k, &v) in diagonal.iter().enumerate() {
            cells[k * d + k] = v;
        }
        Ok(PartialMatrix { d, cells })
    }

    /// Partial matrix from lower-triangle rows where `0` marks an empty cell.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let d = rows.len();
        let mut cells = vec![0usize; d * d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r + 1 {
                return Err(Error::Structure(format!("row {} has {} entries", r + 1, row.len())));
            }
            for (c, &v) in row.iter().enumerate() {
                if v > d {
                    return Err(Error::Structure(format!("entry {v} outside 0..={d}")));
                }
                cells[r * d + c] = v;
            }
        }
        let diag: Vec<usize> = (0..d).map(|k| cells[k * d + k]).collect();
        Self::with_diagonal(&diag)?;
        Ok(PartialMatrix { d, cells })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.cells[(i - 1) * self.d + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: usize) {
        debug_assert!(i > j);
        self.cells[(i - 1) * self.d + (j - 1)] = v;
    }

    fn check_fillable(&self, i: usize, j: usize) -> Result<()> {
        let d = self.d;
        if !(j >= 1 && i > j && i <= d) {
            return Err(Error::Contract(format!("({i}, {j}) is not an off-diagonal cell")));
        }
        for r in i + 1..=d {
            if self.get(r, j) == 0 {
                return Err(Error::Structure(format!(
                    "column {j} is not filled below row {i} (row {r} empty)"
                )));
            }
        }
        for k in j + 1..=i.min(d) {
            for r in i + 1..=d {
                if r > k && self.get(r, k) == 0 {
                    return Err(Error::Structure(format!(
                        "column {k} is not filled at row {r}, needed for ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Candidates `H(i, j) = {m(j+1, j+1), …, m(d, d)}`.
    pub fn potential(&self, j: usize) -> Vec<usize> {
        (j + 1..=self.d).map(|k| self.get(k, k)).collect()
    }

    /// Already placed entries of column `j` below row `i`, tree order.
    pub fn whitelist(&self, i: usize, j: usize) -> Vec<usize> {
        (i + 1..=self.d).rev().map(|r| self.get(r, j)).collect()
    }

    /// Labels that may be placed at `(i, j)` without breaking the
    /// proximity condition, in diagonal order.
    pub fn allowed_entries(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        self.check_fillable(i, j)?;
        let used = self.whitelist(i, j);
        Ok(self
            .potential(j)
            .into_iter()
            .filter(|v| !used.contains(v))
            .filter(|&v| proximity_holds_cells(self.d, &self.cells, i, j, v))
            .collect())
    }

    /// `B(i, j)`: unused potential regressors that break the proximity condition.
    pub fn blacklist(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        let allowed = self.allowed_entries(i, j)?;
        let used = self.whitelist(i, j);
        Ok(self
            .potential(j)
            .into_iter()
            .filter(|v| !used.contains(v) && !allowed.contains(v))
            .collect())
    }

    pub fn is_complete(&self) -> bool {
        (1..=self.d).all(|j| (j..=self.d).all(|i| self.get(i, j) != 0))
    }

    /// Finishes construction; the result is validated.
    pub fn finish(self) -> Result<RVineMatrix> {
        if !self.is_complete() {
            return Err(Error::Structure("partial matrix has empty cells".into()));
        }
        let m = RVineMatrix::from_cells(self.d, self.cells);
        let report = m.validate()?;
        match report.first() {
            None => Ok(m),
            Some(v) => Err(Error::Structure(format!(
                "property {:?} violated at ({}, {})",
                v.property, v.row, v.col
            ))),
        }
    }
}
