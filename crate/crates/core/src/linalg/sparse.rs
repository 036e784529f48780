//! Compressed sparse row storage with deterministic kernels.
//!
//! Every kernel accumulates in index-sorted order, so results are bit-identical
//! across runs and across thread counts.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Real sparse matrix in CSR form.
///
/// Column indices within a row are strictly increasing and no stored value is
/// exactly zero. Column-oriented access goes through [`CsrMatrix::transpose`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        indptr.push(0);
        for (i, &v) in diag.iter().enumerate() {
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            rows: n,
            cols: n,
            indptr,
            indices,
            values,
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// in input order; entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            per_row[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in per_row {
            // stable: duplicates keep their input order when summed
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut acc = 0.0;
                while k < row.len() && row[k].0 == c {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != 0.0 {
                    indices.push(c);
                    values.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    fn from_rows(rows: usize, cols: usize, row_data: Vec<(Vec<usize>, Vec<f64>)>) -> Self {
        let nnz = row_data.iter().map(|(i, _)| i.len()).sum();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (idx, val) in row_data {
            indices.extend(idx);
            values.extend(val);
            indptr.push(indices.len());
        }
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let row_data = (0..dense.nrows())
            .map(|i| {
                let mut idx = Vec::new();
                let mut val = Vec::new();
                for j in 0..dense.ncols() {
                    let v = dense[(i, j)];
                    if v != 0.0 {
                        idx.push(j);
                        val.push(v);
                    }
                }
                (idx, val)
            })
            .collect();
        Self::from_rows(dense.nrows(), dense.ncols(), row_data)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&j) {
            Ok(k) => val[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, val) = self.row(i);
            idx.iter().zip(val).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                let slot = next[j];
                indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    /// Sparse product `self · rhs`.
    pub fn matmul(&self, rhs: &CsrMatrix) -> Result<CsrMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let cols = rhs.cols;
        let row_data: Vec<(Vec<usize>, Vec<f64>)> = (0..self.rows)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; cols], vec![false; cols]),
                |(acc, seen), i| {
                    let mut touched = Vec::new();
                    let (a_idx, a_val) = self.row(i);
                    for (&k, &a) in a_idx.iter().zip(a_val) {
                        let (b_idx, b_val) = rhs.row(k);
                        for (&j, &b) in b_idx.iter().zip(b_val) {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let mut idx = Vec::with_capacity(touched.len());
                    let mut val = Vec::with_capacity(touched.len());
                    for j in touched {
                        let v = acc[j];
                        acc[j] = 0.0;
                        seen[j] = false;
                        if v != 0.0 {
                            idx.push(j);
                            val.push(v);
                        }
                    }
                    (idx, val)
                },
            )
            .collect();
        Ok(Self::from_rows(self.rows, cols, row_data))
    }

    /// Matrix-vector product into `out`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        assert_eq!(out.len(), self.rows, "output length must equal row count");
        for (i, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            *o = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `diag(scale) · self`.
    pub fn scale_rows(&self, scale: &[f64]) -> Self {
        assert_eq!(scale.len(), self.rows);
        let mut out = self.clone();
        for (i, &s) in scale.iter().enumerate() {
            for v in &mut out.values[self.indptr[i]..self.indptr[i + 1]] {
                *v *= s;
            }
        }
        out.drop_zeros()
    }

    /// `self · diag(scale)`.
    pub fn scale_cols(&self, scale: &[f64]) -> Self {
        assert_eq!(scale.len(), self.cols);
        let mut out = self.clone();
        for (v, &j) in out.values.iter_mut().zip(&self.indices) {
            *v *= scale[j];
        }
        out.drop_zeros()
    }

    /// Applies `f` to every stored value; entries mapped to zero are dropped.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = f(*v);
        }
        out.drop_zeros()
    }

    /// Keeps entries for which `keep(row, col, value)` holds.
    pub fn filter(&self, keep: impl Fn(usize, usize, f64) -> bool) -> Self {
        let row_data = (0..self.rows)
            .map(|i| {
                let (idx, val) = self.row(i);
                idx.iter()
                    .zip(val)
                    .filter(|(&j, &v)| keep(i, j, v))
                    .map(|(&j, &v)| (j, v))
                    .unzip()
            })
            .collect();
        Self::from_rows(self.rows, self.cols, row_data)
    }

    pub fn without_diagonal(&self) -> Self {
        self.filter(|i, j, _| i != j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// `alpha·self + beta·other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let row_data = (0..self.rows)
            .map(|i| {
                let (ai, av) = self.row(i);
                let (bi, bv) = other.row(i);
                let (mut p, mut q) = (0, 0);
                let mut idx = Vec::with_capacity(ai.len() + bi.len());
                let mut val = Vec::with_capacity(ai.len() + bi.len());
                while p < ai.len() || q < bi.len() {
                    let (j, v) = if q == bi.len() || (p < ai.len() && ai[p] < bi[q]) {
                        p += 1;
                        (ai[p - 1], alpha * av[p - 1])
                    } else if p == ai.len() || bi[q] < ai[p] {
                        q += 1;
                        (bi[q - 1], beta * bv[q - 1])
                    } else {
                        p += 1;
                        q += 1;
                        (ai[p - 1], alpha * av[p - 1] + beta * bv[q - 1])
                    };
                    if v != 0.0 {
                        idx.push(j);
                        val.push(v);
                    }
                }
                (idx, val)
            })
            .collect();
        Ok(Self::from_rows(self.rows, self.cols, row_data))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Column sums, accumulated in row order.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (j, v) in self.indices.iter().zip(&self.values) {
            out[*j] += v;
        }
        out
    }

    /// Exact (bitwise) symmetry check.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn drop_zeros(self) -> Self {
        if self.values.iter().all(|&v| v != 0.0) {
            return self;
        }
        self.filter(|_, _, v| v != 0.0)
    }
}
