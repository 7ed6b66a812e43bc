//! Small dense helpers built on `nalgebra`: Gram accumulation, rank decisions
//! and minimum-norm least squares through the normal equations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Default relative threshold on `lambda_min / lambda_max` of a Gram matrix.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Running sufficient statistics of a least-squares subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct GramAccumulator {
    pub gram: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub yy: f64,
    pub count: usize,
}

impl GramAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            gram: DMatrix::zeros(dim, dim),
            rhs: DVector::zeros(dim),
            yy: 0.0,
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn add(&mut self, x: &[f64], y: f64) {
        self.update(x, y, 1.0);
        self.count += 1;
    }

    pub fn remove(&mut self, x: &[f64], y: f64) {
        self.update(x, y, -1.0);
        self.count -= 1;
    }

    fn update(&mut self, x: &[f64], y: f64, sign: f64) {
        let n = x.len();
        for i in 0..n {
            let xi = sign * x[i];
            self.rhs[i] += xi * y;
            for j in 0..n {
                self.gram[(i, j)] += xi * x[j];
            }
        }
        self.yy += sign * y * y;
    }

    /// Minimum-norm least-squares solution and whether the Gram was singular.
    pub fn solve(&self, rank_tol: f64) -> LeastSquares {
        min_norm_solve(&self.gram, &self.rhs, rank_tol)
    }
}

/// Result of a (possibly rank-deficient) least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub theta: Vec<f64>,
    pub rank_deficient: bool,
}

/// Gram matrix `sum x x^T` over the selected rows of a row-major matrix.
pub fn gram_of_rows<'a, I>(rows: I, dim: usize) -> DMatrix<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut g = DMatrix::zeros(dim, dim);
    for x in rows {
        for i in 0..dim {
            for j in 0..dim {
                g[(i, j)] += x[i] * x[j];
            }
        }
    }
    g
}

/// Scale-invariant nonsingularity test for a symmetric positive semidefinite matrix:
/// the smallest eigenvalue must exceed `rel_tol` times the largest.
/// The zero matrix is singular.
pub fn is_nonsingular(gram: &DMatrix<f64>, rel_tol: f64) -> bool {
    if gram.nrows() == 0 {
        return false;
    }
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    max > 0.0 && min > rel_tol * max
}

/// Solve `gram * theta = rhs` in the minimum-norm sense.
///
/// A well-conditioned Gram goes through Cholesky; otherwise the eigen
/// pseudo-inverse is applied, which gives the minimum-norm least-squares
/// solution of the underlying regression.
pub fn min_norm_solve(gram: &DMatrix<f64>, rhs: &DVector<f64>, rel_tol: f64) -> LeastSquares {
    let n = rhs.len();
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    if max <= 0.0 {
        return LeastSquares {
            theta: vec![0.0; n],
            rank_deficient: true,
        };
    }
    let cutoff = rel_tol * max;
    let rank_deficient = eig.eigenvalues.iter().any(|&l| l <= cutoff);
    if !rank_deficient {
        if let Some(chol) = gram.clone().cholesky() {
            return LeastSquares {
                theta: chol.solve(rhs).iter().copied().collect(),
                rank_deficient: false,
            };
        }
    }
    let mut theta = DVector::zeros(n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            let coef = v.dot(rhs) / lambda;
            theta += v * coef;
        }
    }
    LeastSquares {
        theta: theta.iter().copied().collect(),
        rank_deficient,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
