//! Small dense real linear algebra.
//!
//! Every reduction accumulates left to right in row-major order, so repeated
//! evaluation on identical inputs is bit-identical.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// A dense vector of finite `f64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

fn check_finite(entries: &[f64]) -> Result<()> {
    match entries.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

impl DenseVector {
    /// Checked constructor: rejects empty input and NaN/Inf entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(&entries)?;
        Ok(DenseVector { entries })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "DenseVector must be non-empty");
        DenseVector {
            entries: vec![0.0; n],
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        assert!(n > 0, "DenseVector must be non-empty");
        DenseVector {
            entries: (0..n).map(f).collect(),
        }
    }

    /// Wraps arithmetic results. Finite inputs can still overflow, so
    /// callers that need the invariant check [`DenseVector::is_finite`].
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        DenseVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        self.same_len("dot", other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |acc, (a, b)| acc + a * b))
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc + v.abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// `self + a * x`, entrywise.
    pub fn axpy(&self, a: f64, x: &DenseVector) -> Result<DenseVector> {
        self.same_len("axpy", x)?;
        Ok(DenseVector::from_raw(
            self.entries
                .iter()
                .zip(&x.entries)
                .map(|(y, x)| y + a * x)
                .collect(),
        ))
    }

    /// `self - a * x`, entrywise. This is the subgradient update.
    pub fn sub_scaled(&self, a: f64, x: &DenseVector) -> Result<DenseVector> {
        self.same_len("sub_scaled", x)?;
        Ok(DenseVector::from_raw(
            self.entries
                .iter()
                .zip(&x.entries)
                .map(|(y, x)| y - a * x)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> DenseVector {
        DenseVector::from_raw(self.entries.iter().map(|v| a * v).collect())
    }

    /// Euclidean distance computed entrywise, without forming the difference.
    pub fn distance(&self, other: &DenseVector) -> Result<f64> {
        self.same_len("distance", other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |acc, (a, b)| acc + (a - b) * (a - b))
            .sqrt())
    }

    fn same_len(&self, op: &'static str, other: &DenseVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Shape {
                op,
                left: (self.len(), 1),
                right: (other.len(), 1),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// A dense row-major matrix of finite `f64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if rows * cols != data.len() {
            return Err(Error::Shape {
                op: "DenseMatrix::new",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        check_finite(&data)?;
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).ok_or(Error::Empty)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Shape {
                op: "DenseMatrix::from_rows",
                left: (rows.len(), cols),
                right: (1, bad.len()),
            });
        }
        DenseMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "DenseMatrix must be non-empty");
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Entrywise ℓ1 norm.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc + v.abs())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc + v * v)
    }

    /// Entrywise max norm, the dual of the entrywise ℓ1 norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Entrywise sign with `tie` returned at exact zeros.
    pub fn sign_matrix(&self, tie: f64) -> Result<DenseMatrix> {
        if !(-1.0..=1.0).contains(&tie) {
            return Err(Error::InvalidSelection(tie));
        }
        Ok(DenseMatrix::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        tie
                    }
                })
                .collect(),
        ))
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        DenseMatrix::from_raw(self.cols, self.rows, data)
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.cols {
                let mut acc = 0.0;
                for (k, a_ik) in a.iter().enumerate() {
                    acc += a_ik * other.data[k * other.cols + j];
                }
                data.push(acc);
            }
        }
        Ok(DenseMatrix::from_raw(self.rows, other.cols, data))
    }

    /// `self · otherᵀ`, without materializing the transpose.
    pub fn matmul_transpose(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::Shape {
                op: "matmul_transpose",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut data = Vec::with_capacity(self.rows * other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                data.push(a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y));
            }
        }
        Ok(DenseMatrix::from_raw(self.rows, other.rows, data))
    }

    /// `selfᵀ · other`, without materializing the transpose.
    pub fn transpose_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::Shape {
                op: "transpose_matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut data = Vec::with_capacity(self.cols * other.cols);
        for i in 0..self.cols {
            for j in 0..other.cols {
                let mut acc = 0.0;
                for k in 0..self.rows {
                    acc += self.get(k, i) * other.get(k, j);
                }
                data.push(acc);
            }
        }
        Ok(DenseMatrix::from_raw(self.cols, other.cols, data))
    }

    /// `self + a * other`, entrywise.
    pub fn axpy(&self, a: f64, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                op: "axpy",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(DenseMatrix::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(y, x)| y + a * x)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> DenseMatrix {
        DenseMatrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| a * v).collect(),
        )
    }

    /// Submatrix of the first `k` rows.
    pub fn top_rows(&self, k: usize) -> DenseMatrix {
        assert!(k > 0 && k <= self.rows);
        DenseMatrix::from_raw(k, self.cols, self.data[..k * self.cols].to_vec())
    }

    /// Determinant of a square matrix by Gaussian elimination with partial
    /// pivoting. Only used for small invertibility checks.
    pub fn determinant(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::Shape {
                op: "determinant",
                left: self.shape(),
                right: self.shape(),
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
                .expect("non-empty pivot range");
            if a[pivot * n + col] == 0.0 {
                return Ok(0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for i in col + 1..n {
                let factor = a[i * n + col] / d;
                for j in col..n {
                    a[i * n + j] -= factor * a[col * n + j];
                }
            }
        }
        Ok(det)
    }

    /// Parses comma-separated rows, one per line, no header. Blank lines are
    /// skipped; ragged rows are rejected.
    pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::MalformedCsv {
                        line: lineno + 1,
                        reason: format!("`{}`: {e}", tok.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::MalformedCsv {
                        line: lineno + 1,
                        reason: format!(
                            "ragged row: {} fields, expected {}",
                            row.len(),
                            first.len()
                        ),
                    });
                }
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::MalformedCsv {
                    line: lineno + 1,
                    reason: format!("non-finite value in column {}", j + 1),
                });
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::MalformedCsv {
                line: 0,
                reason: "no rows".into(),
            });
        }
        DenseMatrix::from_rows(&rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
        let text = std::fs::read_to_string(path)?;
        DenseMatrix::parse_csv(&text)
    }

    /// Serializes with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{:?}", self.row(i))?;
        }
        Ok(())
    }
}
