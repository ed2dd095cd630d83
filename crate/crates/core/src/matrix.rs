//! Dense square-matrix storage shared by the domain types.
//!
//! Player counts are small (tens, not thousands), so everything is stored
//! dense and row-major. The domain wrappers in [`crate::hodge`] and
//! [`crate::game`] add their invariants on top of this type.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix must not be empty")]
    Empty,
    #[error("matrix must be square: row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("entry ({i},{j}) is not finite")]
    NonFinite { i: usize, j: usize },
}

/// Row-major dense square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Builds a matrix by evaluating `f(i, j)` at every position.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Validates shape and finiteness of externally supplied rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(MatrixError::Empty);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(MatrixError::NotSquare {
                    row: i,
                    found: row.len(),
                    expected: dim,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MatrixError::NonFinite { i, j });
                }
                data.push(v);
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise (Hadamard) product. Dimensions must match.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "hadamard: dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "sub: dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// Square root of the sum of squared entries.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sum of the element-wise product, the inner product under which the
    /// transitive and cyclic parts of a skew matrix are orthogonal.
    pub fn inner_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "inner_product: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_ragged_input() {
        let err = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(
            err,
            MatrixError::NotSquare {
                row: 1,
                found: 1,
                expected: 2
            }
        );
    }

    #[test]
    fn from_rows_rejects_nan() {
        let err = SquareMatrix::from_rows(&[vec![0.0, f64::NAN], vec![0.0, 0.0]]).unwrap_err();
        assert_eq!(err, MatrixError::NonFinite { i: 0, j: 1 });
    }

    #[test]
    fn from_rows_rejects_empty() {
        assert_eq!(SquareMatrix::from_rows(&[]).unwrap_err(), MatrixError::Empty);
    }

    #[test]
    fn roundtrip_rows() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let m = SquareMatrix::from_rows(&rows).unwrap();
        assert_eq!(m.rows(), rows);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn frobenius_of_zero_is_zero() {
        assert_eq!(SquareMatrix::zeros(4).frobenius_norm(), 0.0);
    }
}
