//! Sparse non-negative matrices in sorted triplet form.
//!
//! Products are accumulated in triplet order, so results are bitwise
//! reproducible for a given matrix.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    /// `(row, col, value)`, sorted by `(row, col)`, no duplicates, no zeros.
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    /// Builds a matrix from triplets. Explicit zeros are dropped; duplicate
    /// positions and negative or non-finite values are rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for (k, &(r, c, v)) in entries.iter().enumerate() {
            if r >= rows {
                return Err(Error::IndexOutOfRange { index: r, n: rows });
            }
            if c >= cols {
                return Err(Error::IndexOutOfRange { index: c, n: cols });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { index: k, value: v });
            }
        }
        entries.retain(|e| e.2 != 0.0);
        entries.sort_by_key(|a| (a.0, a.1));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::Precondition(format!(
                "duplicate entry at ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Dense row-major input.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut trip = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                trip.push((r, c, v));
            }
        }
        Self::from_triplets(m, n, trip)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &SparseMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.cols,
            });
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|&(r, c, v)| (r + self.rows, c, v)));
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
        out
    }

    /// `Aᵀ y`.
    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            out[c] += v * y[r];
        }
        out
    }

    /// `‖A_{:i}‖∞` for every column.
    pub fn col_max(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.cols];
        for &(_, c, v) in &self.entries {
            out[c] = out[c].max(v);
        }
        out
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(row, col)))
            .map_or(0.0, |k| self.entries[k].2)
    }

    pub(crate) fn map_entries(&mut self, mut f: impl FnMut(usize, usize, f64) -> f64) {
        for e in &mut self.entries {
            e.2 = f(e.0, e.1, e.2);
        }
        self.entries.retain(|e| e.2 != 0.0);
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_norms() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 0.5, 4.0]]).unwrap();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.mul(&[1.0, 1.0, 1.0]), vec![3.0, 4.5]);
        assert_eq!(a.mul_t(&[1.0, 2.0]), vec![1.0, 3.0, 8.0]);
        assert_eq!(a.col_max(), vec![1.0, 2.0, 4.0]);
        assert_eq!(a.get(1, 2), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn rejects_bad_triplets() {
        assert!(SparseMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseMatrix::from_triplets(1, 2, vec![(0, 1, -1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(1, 2, vec![(2, 1, 1.0)]).is_err());
    }

    #[test]
    fn vstack_offsets_rows() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap();
        let b = a.vstack(&SparseMatrix::identity(2)).unwrap();
        assert_eq!(b.rows(), 3);
        assert_eq!(b.mul(&[0.25, 0.5]), vec![0.75, 0.25, 0.5]);
    }
}
