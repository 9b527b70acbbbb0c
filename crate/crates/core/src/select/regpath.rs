use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Strictly lower-triangular matrix `Λ` of entry penalties, aligned with the
/// structure matrix: entry `(d − t + 1, j)` belongs to the tree-`t` edge of
/// column `j`. `+∞` marks entries no threshold may remove.
#[derive(Debug, Clone, PartialEq)]
pub struct RegPathMatrix<S> {
    d: usize,
    cells: Vec<S>,
}

impl<S: Scalar> RegPathMatrix<S> {
    pub fn zeros(d: usize) -> Self {
        RegPathMatrix {
            d,
            cells: vec![S::zero(); d * d],
        }
    }

    /// Row `i` (1-based) holds `i − 1` values.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let d = rows.len();
        let mut m = Self::zeros(d);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::Shape(format!(
                    "Λ row {} has {} entries, expected {r}",
                    r + 1,
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v.is_nan() || v < S::zero() {
                    return Err(Error::Domain(format!("Λ entry {v} at ({}, {})", r + 1, c + 1)));
                }
                m.set(r + 1, c + 1, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        (1..=self.d)
            .map(|i| (1..i).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        debug_assert!(i > j);
        self.cells[(i - 1) * self.d + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        debug_assert!(i > j && i <= self.d);
        self.cells[(i - 1) * self.d + (j - 1)] = v;
    }

    /// Column path `(λ_{1,j}, …, λ_{d−j,j})`, tree 1 first.
    pub fn column_path(&self, j: usize) -> Vec<S> {
        (j + 1..=self.d).rev().map(|i| self.get(i, j)).collect()
    }

    /// All `(i, j, λ)` with `i > j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (2..=self.d).flat_map(move |i| (1..i).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn max_finite(&self) -> S {
        self.entries()
            .map(|(_, _, v)| v)
            .filter(|v| v.is_finite())
            .fold(S::zero(), S::max)
    }

    pub fn cast<T: Scalar>(&self) -> RegPathMatrix<T> {
        RegPathMatrix {
            d: self.d,
            cells: self.cells.iter().map(|v| T::lit(v.as_f64())).collect(),
        }
    }
}

impl<S: Scalar> Serialize for RegPathMatrix<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let rows: Vec<Vec<Option<f64>>> = self
            .rows()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| if v.is_finite() { Some(v.as_f64()) } else { None })
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for RegPathMatrix<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<Option<f64>>> = Vec::deserialize(deserializer)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.map_or(S::sentinel(), S::lit)).collect())
            .collect();
        RegPathMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
