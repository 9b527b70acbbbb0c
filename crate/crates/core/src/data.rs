//! Observation matrices on the three working scales and the transforms
//! between them.
//!
//! * `X`: raw observations,
//! * `U`: copula scale, every entry strictly inside `(0, 1)`,
//! * `Z`: standard-normal scale, `z = Φ⁻¹(u)`.

use std::io::Read;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    X,
    U,
    Z,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Scale::X),
            "u" => Ok(Scale::U),
            "z" => Ok(Scale::Z),
            other => Err(Error::Config(format!("unknown scale '{other}'"))),
        }
    }
}

/// Immutable `n × d` observation matrix tagged with its scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    values: Array2<S>,
    scale: Scale,
    column_names: Vec<String>,
}

impl<S: Scalar> Dataset<S> {
    /// Builds a dataset, checking the invariants of the requested scale.
    pub fn new(values: Array2<S>, scale: Scale, column_names: Vec<String>) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 || d < 2 {
            return Err(Error::Shape(format!("need n >= 2 and d >= 2, got {n}x{d}")));
        }
        if column_names.len() != d {
            return Err(Error::Shape(format!(
                "{} column names for {d} columns",
                column_names.len()
            )));
        }
        for ((i, j), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite entry at ({}, {})", i + 1, j + 1)));
            }
            if scale == Scale::U && (*v <= S::zero() || *v >= S::one()) {
                return Err(Error::Domain(format!(
                    "u-scale entry {v} at ({}, {}) outside (0,1)",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Dataset {
            values,
            scale,
            column_names,
        })
    }

    /// Dataset with generated column names `V1..Vd`.
    pub fn from_array(values: Array2<S>, scale: Scale) -> Result<Self> {
        let names = default_names(values.ncols());
        Self::new(values, scale, names)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn values(&self) -> ArrayView2<'_, S> {
        self.values.view()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, S> {
        self.values.column(j)
    }

    pub fn into_values(self) -> Array2<S> {
        self.values
    }

    /// Reorders columns; `order[k]` is the source column of output column `k`.
    pub fn select_columns(&self, order: &[usize]) -> Result<Self> {
        let values = self.values.select(Axis(1), order);
        let names = order.iter().map(|&j| self.column_names[j].clone()).collect();
        Dataset::new(values, self.scale, names)
    }

    /// Rank transform `rank/(n+1)` with average ranks for ties.
    pub fn to_pseudo_observations(&self) -> Result<Self> {
        if self.scale != Scale::X {
            return Err(Error::Contract(format!(
                "pseudo-observations require x-scale input, got {:?}",
                self.scale
            )));
        }
        let n = self.n();
        let denom = S::lit((n + 1) as f64);
        let mut out = Array2::<S>::zeros(self.values.dim());
        for (j, col) in self.values.axis_iter(Axis(1)).enumerate() {
            let ranks = average_ranks(col);
            if ranks.iter().all(|&r| r == ranks[0]) {
                return Err(Error::DegenerateMargin { column: j + 1 });
            }
            for (i, r) in ranks.into_iter().enumerate() {
                out[[i, j]] = S::lit(r) / denom;
            }
        }
        Dataset::new(out, Scale::U, self.column_names.clone())
    }

    /// Entrywise `Φ⁻¹` of u-scale data.
    pub fn to_z_scale(&self) -> Result<Self> {
        if self.scale != Scale::U {
            return Err(Error::Contract(format!(
                "z-scale transform requires u-scale input, got {:?}",
                self.scale
            )));
        }
        let mut out = Array2::<S>::zeros(self.values.dim());
        for ((i, j), u) in self.values.indexed_iter() {
            let z = special::norm_quantile(u.as_f64());
            if !z.is_finite() {
                return Err(Error::Domain(format!(
                    "infinite normal quantile at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            out[[i, j]] = S::lit(z);
        }
        Dataset::new(out, Scale::Z, self.column_names.clone())
    }

    /// Entrywise `Φ` of z-scale data.
    pub fn to_u_scale(&self) -> Result<Self> {
        if self.scale != Scale::Z {
            return Err(Error::Contract(format!(
                "u-scale transform requires z-scale input, got {:?}",
                self.scale
            )));
        }
        let out = self.values.mapv(|z| S::lit(special::norm_cdf(z.as_f64())));
        Dataset::new(out, Scale::U, self.column_names.clone())
    }

    /// Re-tags the data, re-checking the invariants of the new scale.
    pub fn with_scale(self, scale: Scale) -> Result<Self> {
        Dataset::new(self.values, scale, self.column_names)
    }

    /// Writes the matrix as CSV with a header line.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.column_names)?;
        for row in self.values.axis_iter(Axis(0)) {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("V{j}")).collect()
}

/// 1-based average ranks.
pub(crate) fn average_ranks<S: Scalar>(col: ArrayView1<'_, S>) -> Vec<f64> {
    let n = col.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && col[idx[end]] == col[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Loads a comma-separated numeric table on the x-scale.
pub fn load_csv<S: Scalar>(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset<S>> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, has_header)
}

pub fn read_csv<S: Scalar, R: Read>(reader: R, has_header: bool) -> Result<Dataset<S>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Option<Vec<String>> = if has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };
    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut width = names.as_ref().map(Vec::len);
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let line = r + 1 + usize::from(has_header);
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Shape(format!(
                "row {line} has {} fields, expected {w}",
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(w);
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: line,
                col: c + 1,
                msg: format!("'{field}' is not a number"),
            })?;
            row.push(S::lit(v));
        }
        rows.push(row);
    }
    let d = width.unwrap_or(0);
    let n = rows.len();
    let flat: Vec<S> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((n, d), flat)
        .map_err(|e| Error::Shape(e.to_string()))?;
    let names = names.unwrap_or_else(|| default_names(d));
    Dataset::new(values, Scale::X, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn x(values: Array2<f64>) -> Dataset<f64> {
        Dataset::from_array(values, Scale::X).unwrap()
    }

    #[test]
    fn loads_headerless_table() {
        let ds: Dataset<f64> = read_csv("1.0,2.0\n3.0,4.0\n5.0,6.5\n".as_bytes(), false).unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 2));
        assert_eq!(ds.scale(), Scale::X);
        assert_eq!(ds.column_names(), &["V1", "V2"]);
    }

    #[test]
    fn header_names_pass_through() {
        let ds: Dataset<f64> = read_csv("A,B\n1,2\n3,4\n".as_bytes(), true).unwrap();
        assert_eq!(ds.column_names(), &["A", "B"]);
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let err = read_csv::<f64, _>("1,2\nabc,4\n".as_bytes(), false).unwrap_err();
        match err {
            Error::Parse { row, col, .. } => assert_eq!((row, col), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_shape_errors() {
        let err = read_csv::<f64, _>("1,2\n3\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn pseudo_observations_of_distinct_values() {
        let u = x(array![[3.0, 1.0], [1.0, 2.0], [2.0, 3.0]])
            .to_pseudo_observations()
            .unwrap();
        assert_eq!(u.column(0).to_vec(), vec![0.75, 0.25, 0.5]);
    }

    #[test]
    fn ties_get_average_rank() {
        // sorted: 1,1,2 -> ranks (1+2)/2, (1+2)/2, 3 over n+1 = 4
        let u = x(array![[1.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
            .to_pseudo_observations()
            .unwrap();
        assert_eq!(u.column(0).to_vec(), vec![0.375, 0.375, 0.75]);
    }

    #[test]
    fn constant_column_is_degenerate() {
        let err = x(array![[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])
            .to_pseudo_observations()
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateMargin { column: 1 }));
    }

    #[test]
    fn z_scale_values() {
        let u = Dataset::<f64>::from_array(array![[0.5, 0.975], [0.25, 0.5]], Scale::U).unwrap();
        let z = u.to_z_scale().unwrap();
        assert_eq!(z.values()[[0, 0]], 0.0);
        assert!((z.values()[[0, 1]] - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn boundary_u_is_rejected() {
        let err = Dataset::from_array(array![[1.0, 0.5], [0.2, 0.5]], Scale::U).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn works_in_single_precision() {
        let ds = Dataset::<f32>::from_array(array![[3.0f32, 1.0], [1.0, 2.0], [2.0, 3.0]], Scale::X)
            .unwrap();
        let z = ds.to_pseudo_observations().unwrap().to_z_scale().unwrap();
        assert_eq!(z.values()[[2, 0]], 0.0f32);
    }
}
