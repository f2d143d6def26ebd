//! Discrete probability measures mu = sum_i a_i delta_{x_i} on R^d.
//!
//! Construction validates the simplex invariants once, so downstream code can
//! rely on strictly positive weights that sum to one and on a single shared
//! point dimension.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{CoreError, IoError};
use crate::linalg::pairwise_sum;

/// Tolerance on |sum(weights) - 1| accepted at construction.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A weighted point cloud with strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Array2<f64>,
    weights: Array1<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureDto {
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl DiscreteMeasure {
    /// Builds a measure from an (n, d) point matrix and n weights.
    ///
    /// # Errors
    /// Rejects empty inputs, d = 0, non-finite coordinates, weights that are
    /// not strictly positive and finite, and weight sums outside
    /// 1 +/- [`WEIGHT_SUM_TOL`].
    pub fn new(points: Array2<f64>, weights: Array1<f64>) -> Result<Self, CoreError> {
        let (n, d) = points.dim();
        if n == 0 {
            return Err(CoreError::EmptyMeasure);
        }
        if d == 0 {
            return Err(CoreError::ZeroDimension);
        }
        if weights.len() != n {
            return Err(CoreError::LengthMismatch {
                context: "measure weights",
                expected: n,
                got: weights.len(),
            });
        }
        for (index, row) in points.rows().into_iter().enumerate() {
            if row.iter().any(|c| !c.is_finite()) {
                return Err(CoreError::NonFinitePoint { index });
            }
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(CoreError::InvalidWeight { index, value });
            }
        }
        let sum = pairwise_sum(weights.as_slice().expect("weights are contiguous"));
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(CoreError::WeightSum {
                sum,
                tol: WEIGHT_SUM_TOL,
            });
        }
        Ok(Self { points, weights })
    }

    /// Builds a uniformly weighted measure on the given points.
    pub fn uniform(points: Array2<f64>) -> Result<Self, CoreError> {
        let n = points.nrows();
        if n == 0 {
            return Err(CoreError::EmptyMeasure);
        }
        let weights = Array1::from_elem(n, 1.0 / n as f64);
        Self::new(points, weights)
    }

    /// Builds a measure from row vectors, validating that all rows share one
    /// dimension. `weights = None` gives uniform weights.
    pub fn from_rows(rows: &[Vec<f64>], weights: Option<&[f64]>) -> Result<Self, CoreError> {
        if rows.is_empty() {
            return Err(CoreError::EmptyMeasure);
        }
        let d = rows[0].len();
        for (index, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(CoreError::RaggedPoint {
                    index,
                    expected: d,
                    got: row.len(),
                });
            }
        }
        if d == 0 {
            return Err(CoreError::ZeroDimension);
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat)
            .expect("row-major layout matches shape");
        match weights {
            Some(w) => Self::new(points, Array1::from(w.to_vec())),
            None => Self::uniform(points),
        }
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    /// Always false: construction rejects empty supports.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// The (n, d) matrix of support points, one point per row.
    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    /// The i-th support point.
    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    /// The weight vector a with a_i > 0 and sum(a) = 1.
    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    /// Largest Euclidean norm over the support points.
    pub fn max_norm(&self) -> f64 {
        self.points
            .rows()
            .into_iter()
            .map(|row| crate::linalg::dot(row.as_slice().unwrap(), row.as_slice().unwrap()).sqrt())
            .fold(0.0, f64::max)
    }

    /// Reads a measure from CSV: one point per row, d float columns.
    ///
    /// A header row is detected when the first record fails to parse as
    /// floats. With a header whose last column is named `weight`
    /// (case-insensitive), that column supplies the weights; otherwise the
    /// weights are uniform.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let file = std::fs::File::open(path)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(BufReader::new(file));

        let mut records: Vec<csv::StringRecord> = Vec::new();
        for record in reader.records() {
            records.push(record?);
        }
        if records.is_empty() {
            return Err(IoError::NoRows);
        }

        let first_is_header = records[0].iter().any(|f| f.parse::<f64>().is_err());
        let has_weight_col = first_is_header
            && records[0]
                .iter()
                .next_back()
                .is_some_and(|name| name.eq_ignore_ascii_case("weight"));
        let start = usize::from(first_is_header);
        if records.len() == start {
            return Err(IoError::NoRows);
        }

        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(records.len() - start);
        let mut weights: Vec<f64> = Vec::new();
        for (offset, record) in records[start..].iter().enumerate() {
            let mut row: Vec<f64> = Vec::with_capacity(record.len());
            for (col, field) in record.iter().enumerate() {
                let value = field.parse::<f64>().map_err(|_| IoError::BadField {
                    row: start + offset + 1,
                    col: col + 1,
                    field: field.to_string(),
                })?;
                row.push(value);
            }
            if has_weight_col {
                let w = row.pop().ok_or(IoError::NoRows)?;
                weights.push(w);
            }
            rows.push(row);
        }

        let measure = if has_weight_col {
            Self::from_rows(&rows, Some(&weights))?
        } else {
            Self::from_rows(&rows, None)?
        };
        Ok(measure)
    }

    /// Writes the measure as CSV with header `x0,..,x{d-1},weight`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let file = std::fs::File::create(path)?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        let mut header: Vec<String> = (0..self.dim()).map(|j| format!("x{j}")).collect();
        header.push("weight".to_string());
        writer.write_record(&header)?;
        for (row, &w) in self.points.rows().into_iter().zip(self.weights.iter()) {
            let mut record: Vec<String> = row.iter().map(|c| format!("{c:.17e}")).collect();
            record.push(format!("{w:.17e}"));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads a measure from JSON `{"points": [[..]], "weights": [..]}`.
    /// Omitted weights are uniform.
    pub fn read_json(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let file = std::fs::File::open(path)?;
        let dto: MeasureDto = serde_json::from_reader(BufReader::new(file))?;
        Ok(Self::from_rows(&dto.points, dto.weights.as_deref())?)
    }

    /// Writes the measure as JSON with explicit weights.
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let dto = MeasureDto {
            points: self.points.rows().into_iter().map(|r| r.to_vec()).collect(),
            weights: Some(self.weights.to_vec()),
        };
        let file = std::fs::File::create(path)?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer(&mut writer, &dto)?;
        writer.flush()?;
        Ok(())
    }
}
