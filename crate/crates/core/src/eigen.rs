//! Magnitude-leading eigenpairs of real symmetric matrices.
//!
//! Small matrices go through a dense symmetric decomposition. Larger ones use
//! a thick-restart Lanczos iteration (Krylov-Schur form for the symmetric
//! case) with full reorthogonalisation, which only needs matrix-vector
//! products and so stays cheap on sparse graph matrices.
//!
//! Output is canonical: eigenvalues by descending magnitude (positive value
//! first on exact ties), and every eigenvector has its largest-magnitude entry
//! positive (lowest index on ties).

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

/// Matrices up to this order are decomposed densely.
pub const DENSE_LIMIT: usize = 200;

/// Residual bound every returned pair must meet, relative to `max(1, |λ₁|)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

const RITZ_TOL: f64 = 1e-11;
const MAX_RESTARTS: usize = 3000;
const START_SEED: u64 = 0x5eed_1a9c;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Solver {
    /// Dense up to [`DENSE_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Leading eigenvalues with unit-norm (right) eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl EigenBasis {
    /// Canonicalises ordering and signs of raw eigenpairs.
    pub fn from_pairs(values: Vec<f64>, vectors: DMatrix<f64>) -> Self {
        assert_eq!(values.len(), vectors.ncols());
        let order = magnitude_order(&values);
        let n = vectors.nrows();
        let mut sorted = DMatrix::zeros(n, order.len());
        for (dst, &src) in order.iter().enumerate() {
            let mut col = vectors.column(src).clone_owned();
            canonical_sign(col.as_mut_slice());
            sorted.set_column(dst, &col);
        }
        EigenBasis {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: sorted,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// The first `m` pairs.
    pub fn truncated(&self, m: usize) -> EigenBasis {
        let m = m.min(self.len());
        EigenBasis {
            values: self.values[..m].to_vec(),
            vectors: self.vectors.columns(0, m).clone_owned(),
        }
    }

    /// Largest `‖M v − λ v‖` over the stored pairs.
    pub fn max_residual(&self, matrix: &Matrix) -> f64 {
        let n = self.dim();
        let mut y = vec![0.0; n];
        (0..self.len())
            .map(|k| {
                let v = self.vectors.column(k);
                matrix.matvec(v.as_slice(), &mut y);
                y.iter()
                    .zip(v.iter())
                    .map(|(a, b)| (a - self.values[k] * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max(1, |λ₁|)`, the scale residuals are measured against.
    pub fn scale(&self) -> f64 {
        self.values.first().map_or(1.0, |v| v.abs().max(1.0))
    }
}

/// Indices of `values` by descending magnitude; positive first on ties, then index.
pub fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        y.abs()
            .total_cmp(&x.abs())
            .then_with(|| (y > 0.0).cmp(&(x > 0.0)))
            .then(a.cmp(&b))
    });
    order
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `m` magnitude-leading eigenpairs of a symmetric matrix.
pub fn symmetric_top(matrix: &Matrix, m: usize, solver: Solver) -> Result<EigenBasis> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {n}x{}",
            matrix.ncols()
        )));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let use_dense = match solver {
        Solver::Dense => true,
        Solver::Lanczos => false,
        Solver::Auto => n <= DENSE_LIMIT,
    };
    if use_dense {
        Ok(dense_top(matrix.to_dense(), m))
    } else {
        let basis = lanczos_top(matrix, m)?;
        let residual = basis.max_residual(matrix);
        if residual.is_nan() || residual > RESIDUAL_TOL * basis.scale() {
            return Err(Error::NoConvergence {
                n,
                tol: RESIDUAL_TOL,
                iterations: MAX_RESTARTS,
            });
        }
        Ok(basis)
    }
}

fn dense_top(mut d: DMatrix<f64>, m: usize) -> EigenBasis {
    // average out rounding asymmetry so the symmetric solver sees one triangle's worth
    let t = d.transpose();
    d += t;
    d *= 0.5;
    let eig = SymmetricEigen::new(d);
    let order = magnitude_order(eig.eigenvalues.as_slice());
    let keep: Vec<usize> = order.into_iter().take(m).collect();
    let values = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(&keep);
    EigenBasis::from_pairs(values, vectors)
}

/// Orthogonalises `w` against `basis` with two classical Gram-Schmidt passes,
/// returning the accumulated projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = dot(v, w);
            *c += h;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
    }
    coeffs
}

/// A unit vector orthogonal to `basis`, or `None` when the basis spans everything.
fn fresh_direction(basis: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    if basis.len() >= n {
        return None;
    }
    for _ in 0..8 {
        let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let before = norm(&w);
        orthogonalize(basis, &mut w);
        let after = norm(&w);
        if after > 1e-8 * before {
            w.iter_mut().for_each(|x| *x /= after);
            return Some(w);
        }
    }
    None
}

fn lanczos_top(op: &Matrix, m: usize) -> Result<EigenBasis> {
    let n = op.nrows();
    let max_basis = (2 * m + 20).max(40).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis + 1);
    basis.push(fresh_direction(&[], n, &mut rng).expect("n > 0"));
    let mut h = DMatrix::<f64>::zeros(max_basis, max_basis);
    let mut w = vec![0.0; n];

    for _restart in 0..MAX_RESTARTS {
        // expand the basis to max_basis vectors; `residual` is the part of A·v_last
        // left over after projection, which couples the next restart
        let mut residual: Option<(Vec<f64>, f64)> = None;
        let mut j = basis.len() - 1;
        loop {
            op.matvec(&basis[j], &mut w);
            let scale = norm(&w);
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, &c) in coeffs.iter().enumerate() {
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
            let beta = norm(&w);
            let broke_down = beta <= 1e-10 * scale || beta == 0.0;
            if j + 1 == max_basis {
                if !broke_down {
                    residual = Some((w.iter().map(|x| x / beta).collect(), beta));
                }
                break;
            }
            let next = if broke_down {
                match fresh_direction(&basis, n, &mut rng) {
                    Some(v) => v,
                    None => break,
                }
            } else {
                w.iter().map(|x| x / beta).collect()
            };
            basis.push(next);
            j += 1;
        }

        let p = basis.len();
        let eig = SymmetricEigen::new(h.view((0, 0), (p, p)).clone_owned());
        let order = magnitude_order(eig.eigenvalues.as_slice());
        let beta = residual.as_ref().map_or(0.0, |(_, b)| *b);
        let top = eig.eigenvalues[order[0]].abs().max(1.0);
        let converged = order
            .iter()
            .take(m)
            .all(|&i| (beta * eig.eigenvectors[(p - 1, i)]).abs() <= RITZ_TOL * top);

        let ritz = |cols: &[usize]| -> Vec<Vec<f64>> {
            cols.iter()
                .map(|&c| {
                    let mut x = vec![0.0; n];
                    for (l, v) in basis.iter().enumerate() {
                        let y = eig.eigenvectors[(l, c)];
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi += y * vi;
                        }
                    }
                    x
                })
                .collect()
        };

        if converged || residual.is_none() && p == n {
            let wanted: Vec<usize> = order.iter().copied().take(m).collect();
            let vectors = ritz(&wanted);
            let mut out = DMatrix::zeros(n, m);
            for (k, x) in vectors.iter().enumerate() {
                let len = norm(x);
                for (i, v) in x.iter().enumerate() {
                    out[(i, k)] = v / len;
                }
            }
            let values = wanted.iter().map(|&i| eig.eigenvalues[i]).collect();
            return Ok(EigenBasis::from_pairs(values, out));
        }

        // thick restart: keep the leading Ritz vectors plus the residual direction
        let keep = (m + (p - m) / 2).clamp(m, p - 1);
        let kept: Vec<usize> = order.iter().copied().take(keep).collect();
        let mut new_basis = ritz(&kept);
        h.fill(0.0);
        for (k, &c) in kept.iter().enumerate() {
            h[(k, k)] = eig.eigenvalues[c];
        }
        let next = match residual {
            Some((f, _)) => {
                // f is orthogonal to the old basis and hence to its Ritz vectors
                let mut f = f;
                orthogonalize(&new_basis, &mut f);
                let len = norm(&f);
                f.iter_mut().for_each(|x| *x /= len);
                Some(f)
            }
            None => fresh_direction(&new_basis, n, &mut rng),
        };
        match next {
            Some(v) => new_basis.push(v),
            None => {
                return Err(Error::NoConvergence {
                    n,
                    tol: RITZ_TOL,
                    iterations: MAX_RESTARTS,
                })
            }
        }
        basis = new_basis;
    }
    Err(Error::NoConvergence {
        n,
        tol: RITZ_TOL,
        iterations: MAX_RESTARTS,
    })
}
