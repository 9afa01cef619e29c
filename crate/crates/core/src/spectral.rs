//! Regularised Laplacians, column-normalised matrices and eigenvalue-weighted
//! embeddings.

use nalgebra::DMatrix;

use crate::eigen::{symmetric_top, EigenBasis, Solver};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{CsrMatrix, Matrix};

/// Row-normalisation treats rows below this fraction of the largest row norm as zero.
pub const ZERO_ROW_TOL: f64 = 1e-12;

/// `D_τ^{-1/2} A D_τ^{-1/2}` with `D_τ = diag(degrees) + τI`.
pub fn regularized_laplacian(graph: &Graph, tau: f64) -> Result<Matrix> {
    degree_normalized(&Matrix::Sparse(CsrMatrix::adjacency(graph)), tau)
}

/// Symmetric degree normalisation of any nonnegative matrix, using its row sums as degrees.
pub fn degree_normalized(matrix: &Matrix, tau: f64) -> Result<Matrix> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    let degrees = matrix.row_sums();
    let mut scale = Vec::with_capacity(degrees.len());
    for (node, d) in degrees.iter().enumerate() {
        let reg = d + tau;
        if reg <= 0.0 {
            return Err(Error::ZeroDegree { node });
        }
        scale.push(reg.sqrt().recip());
    }
    Ok(matrix.scaled(&scale, &scale))
}

/// Average node degree, the usual regulariser.
pub fn default_tau(graph: &Graph) -> Result<f64> {
    graph.mean_degree().ok_or(Error::EmptyGraph)
}

/// Scales each column to unit 2-norm; zero columns become e₁.
pub fn column_normalize(matrix: &Matrix) -> Matrix {
    let norms = matrix.column_norms();
    let zero: Vec<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0.0)
        .map(|(j, _)| j)
        .collect();
    let ones = vec![1.0; matrix.nrows()];
    let inv: Vec<f64> = norms
        .iter()
        .map(|&c| if c == 0.0 { 1.0 } else { c.recip() })
        .collect();
    matrix.scaled(&ones, &inv).with_unit_columns(&zero)
}

pub fn top_eigenpairs_symmetric(matrix: &Matrix, m: usize) -> Result<EigenBasis> {
    symmetric_top(matrix, m, Solver::Auto)
}

/// Leading eigenpairs of the column-normalised matrix `N = Y·U`, `U = diag(1/‖Y_j‖)`.
///
/// `N` is not symmetric, but it is similar to `S = U^{1/2} Y U^{1/2}`, which
/// is. So the spectrum is real and comes from `S`; each right eigenvector of
/// `N` is `U^{-1/2} w` for an eigenvector `w` of `S`, rescaled to unit norm.
pub fn top_eigenpairs_colnorm(y: &Matrix, m: usize) -> Result<EigenBasis> {
    top_eigenpairs_colnorm_with(y, m, Solver::Auto)
}

pub fn top_eigenpairs_colnorm_with(y: &Matrix, m: usize, solver: Solver) -> Result<EigenBasis> {
    let norms = y.column_norms();
    if let Some(column) = norms.iter().position(|&c| c == 0.0) {
        return Err(Error::ZeroColumn { column });
    }
    let half: Vec<f64> = norms.iter().map(|c| c.sqrt().recip()).collect();
    let similar = y.scaled(&half, &half);
    let basis = symmetric_top(&similar, m, solver)?;
    let mut vectors = basis.vectors().clone();
    for mut col in vectors.column_iter_mut() {
        for (v, c) in col.iter_mut().zip(&norms) {
            *v *= c.sqrt();
        }
        let len = col.norm();
        col /= len;
    }
    Ok(EigenBasis::from_pairs(basis.values().to_vec(), vectors))
}

/// Eigenvalue-weighted coordinates `X = V·E` and their row-normalised form.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub x: DMatrix<f64>,
    pub x_star: DMatrix<f64>,
    /// Rows whose norm was numerically zero; their `x_star` row is e₁.
    pub zero_rows: Vec<usize>,
}

pub fn embed(basis: &EigenBasis) -> Embedding {
    let mut x = basis.vectors().clone();
    for (mut col, &lambda) in x.column_iter_mut().zip(basis.values()) {
        col *= lambda;
    }
    let (x_star, zero_rows) = row_normalize(&x);
    Embedding {
        x,
        x_star,
        zero_rows,
    }
}

/// Scales rows to unit length. Rows with norm below `ZERO_ROW_TOL` times the
/// largest row norm are replaced by e₁ and reported.
pub fn row_normalize(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let norms: Vec<f64> = x.row_iter().map(|r| r.norm()).collect();
    let cutoff = ZERO_ROW_TOL * norms.iter().copied().fold(0.0, f64::max);
    let mut out = x.clone();
    let mut zero_rows = Vec::new();
    for (i, &len) in norms.iter().enumerate() {
        let mut row = out.row_mut(i);
        if len <= cutoff || len == 0.0 {
            row.fill(0.0);
            if !row.is_empty() {
                row[0] = 1.0;
            }
            zero_rows.push(i);
        } else {
            row /= len;
        }
    }
    (out, zero_rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn laplacian_of_triangle() {
        let l = regularized_laplacian(&triangle(), 1.0).unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.0 } else { 1.0 / 3.0 };
                assert!((l[(i, j)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_of_regular_graph_without_regularizer() {
        // 4-cycle is 2-regular
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let l = regularized_laplacian(&g, 0.0).unwrap().to_dense();
        assert!((l - g.to_dense() / 2.0).abs().max() < 1e-15);
    }

    #[test]
    fn zero_degree_needs_regularizer() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            regularized_laplacian(&g, 0.0),
            Err(Error::ZeroDegree { node: 2 })
        ));
        assert!(regularized_laplacian(&g, 0.5).is_ok());
        assert!(regularized_laplacian(&g, -1.0).is_err());
    }

    #[test]
    fn default_tau_is_mean_degree() {
        assert_eq!(default_tau(&triangle()).unwrap(), 2.0);
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(default_tau(&g).unwrap(), 2.0);
        assert!(default_tau(&Graph::empty()).is_err());
    }

    #[test]
    fn column_normalize_examples() {
        let id = Matrix::Dense(DMatrix::identity(4, 4));
        assert_eq!(column_normalize(&id).to_dense(), DMatrix::identity(4, 4));

        let m = Matrix::Dense(DMatrix::from_column_slice(2, 2, &[3.0, 4.0, 0.0, 0.0]));
        let n = column_normalize(&m).to_dense();
        assert!((n[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((n[(1, 0)] - 0.8).abs() < 1e-15);
        assert_eq!(n.column(1).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn colnorm_of_identity() {
        let b = top_eigenpairs_colnorm(&Matrix::Dense(DMatrix::identity(5, 5)), 5).unwrap();
        assert!(b.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn colnorm_rejects_zero_column() {
        let m = Matrix::Dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(
            top_eigenpairs_colnorm(&m, 1),
            Err(Error::ZeroColumn { column: 1 })
        ));
    }

    #[test]
    fn embed_single_axis() {
        let mut v = DMatrix::zeros(3, 1);
        v[(0, 0)] = 1.0;
        let basis = EigenBasis::from_pairs(vec![2.0], v);
        let e = embed(&basis);
        assert_eq!(e.x.column(0).as_slice(), &[2.0, 0.0, 0.0]);
        assert_eq!(e.x_star.column(0).as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(e.zero_rows, vec![1, 2]);
    }
}
