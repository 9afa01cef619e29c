//! Minimal matrix plumbing shared by the spectral routines.
//!
//! Graph matrices are sparse (CSR); population matrices are dense. Both sit
//! behind [`Matrix`] so the eigen routines only need a matrix-vector product.

use nalgebra::DMatrix;

use crate::graph::Graph;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Adjacency matrix of `graph` with unit weights.
    pub fn adjacency(graph: &Graph) -> Self {
        let n = graph.n();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(2 * graph.edge_count());
        indptr.push(0);
        for i in 0..n {
            indices.extend_from_slice(graph.neighbors(i));
            indptr.push(indices.len());
        }
        let values = vec![1.0; indices.len()];
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.ncols];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            sq[j] += v * v;
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Returns `diag(rows) * self * diag(cols)`.
    pub fn scaled(&self, rows: &[f64], cols: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.values[k] *= rows[i] * cols[self.indices[k]];
            }
        }
        out
    }

    /// Replaces column `j` with the standard basis vector e₁.
    fn with_unit_columns(&self, columns: &[usize]) -> Self {
        if columns.is_empty() {
            return self.clone();
        }
        let mut dense_rows: Vec<Vec<(usize, f64)>> =
            (0..self.nrows).map(|i| self.row(i).collect()).collect();
        for &j in columns {
            if self.nrows > 0 {
                dense_rows[0].push((j, 1.0));
                dense_rows[0].sort_by_key(|&(c, _)| c);
            }
        }
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for row in dense_rows {
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// A dense or sparse real matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

impl Matrix {
    pub fn nrows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.nrows(),
            Matrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.ncols(),
            Matrix::Sparse(m) => m.ncols(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Matrix::Dense(m) => m[(i, j)],
            Matrix::Sparse(m) => m.get(i, j),
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Matrix::Dense(m) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Matrix::Sparse(m) => m.matvec(x, y),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        match self {
            Matrix::Dense(m) => m.row_iter().map(|r| r.sum()).collect(),
            Matrix::Sparse(m) => m.row_sums(),
        }
    }

    pub fn column_norms(&self) -> Vec<f64> {
        match self {
            Matrix::Dense(m) => m.column_iter().map(|c| c.norm()).collect(),
            Matrix::Sparse(m) => m.column_norms(),
        }
    }

    /// Returns `diag(rows) * self * diag(cols)`.
    pub fn scaled(&self, rows: &[f64], cols: &[f64]) -> Matrix {
        match self {
            Matrix::Dense(m) => {
                Matrix::Dense(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                    m[(i, j)] * rows[i] * cols[j]
                }))
            }
            Matrix::Sparse(m) => Matrix::Sparse(m.scaled(rows, cols)),
        }
    }

    pub(crate) fn with_unit_columns(&self, columns: &[usize]) -> Matrix {
        match self {
            Matrix::Dense(m) => {
                let mut m = m.clone();
                for &j in columns {
                    m.column_mut(j).fill(0.0);
                    if m.nrows() > 0 {
                        m[(0, j)] = 1.0;
                    }
                }
                Matrix::Dense(m)
            }
            Matrix::Sparse(m) => Matrix::Sparse(m.with_unit_columns(columns)),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    /// Largest `|M[i][j] - M[j][i]|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..d.nrows() {
            for j in 0..i {
                worst = worst.max((d[(i, j)] - d[(j, i)]).abs());
            }
        }
        worst
    }
}

impl From<DMatrix<f64>> for Matrix {
    fn from(m: DMatrix<f64>) -> Self {
        Matrix::Dense(m)
    }
}

impl From<CsrMatrix> for Matrix {
    fn from(m: CsrMatrix) -> Self {
        Matrix::Sparse(m)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
