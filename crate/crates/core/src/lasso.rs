//! Weighted lasso by cyclic coordinate descent on a precomputed Gram matrix.

use nalgebra::DVector;

use crate::linalg::RMatrix;

/// `min_β (2n)^{-1}‖y − Xβ‖² + λ Σ_j w_j |β_j|` given `G = XᵀX`, `c = Xᵀy`,
/// `yᵀy` and `n`.
#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    gram: &'a RMatrix,
    xty: DVector<f64>,
    yty: f64,
    n: f64,
}

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub beta: DVector<f64>,
    pub sweeps: usize,
    /// Objective value after each full sweep.
    pub objective_trace: Vec<f64>,
}

pub const CD_TOL: f64 = 1e-8;
pub const CD_MAX_SWEEPS: usize = 1000;

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

impl<'a> LassoProblem<'a> {
    pub fn new(gram: &'a RMatrix, xty: DVector<f64>, yty: f64, n: usize) -> Self {
        Self {
            gram,
            xty,
            yty,
            n: n as f64,
        }
    }

    pub fn gram(&self) -> &RMatrix {
        self.gram
    }

    pub fn xty(&self) -> &DVector<f64> {
        &self.xty
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    pub fn rss(&self, beta: &DVector<f64>) -> f64 {
        let quad = beta.dot(&(self.gram * beta));
        (self.yty - 2.0 * beta.dot(&self.xty) + quad).max(0.0)
    }

    pub fn objective(&self, beta: &DVector<f64>, lambda: f64, weights: &[f64]) -> f64 {
        let pen: f64 = beta.iter().zip(weights).map(|(b, w)| w * b.abs()).sum();
        self.rss(beta) / (2.0 * self.n) + lambda * pen
    }

    /// Smallest `λ` at which the all-zero vector is optimal.
    pub fn lambda_max(&self, weights: &[f64]) -> f64 {
        self.xty
            .iter()
            .zip(weights)
            .map(|(c, w)| c.abs() / (self.n * w))
            .fold(0.0, f64::max)
    }

    pub fn solve(&self, lambda: f64, weights: &[f64], warm: Option<&DVector<f64>>) -> LassoFit {
        self.solve_with(lambda, weights, warm, CD_TOL, CD_MAX_SWEEPS)
    }

    pub fn solve_with(
        &self,
        lambda: f64,
        weights: &[f64],
        warm: Option<&DVector<f64>>,
        tol: f64,
        max_sweeps: usize,
    ) -> LassoFit {
        let d = self.dim();
        let mut beta = warm.cloned().unwrap_or_else(|| DVector::zeros(d));
        // residual correlation r = c − Gβ
        let mut r = &self.xty - self.gram * &beta;
        let mut trace = Vec::new();
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for j in 0..d {
                let gjj = self.gram[(j, j)];
                let old = beta[j];
                let new = if gjj <= 0.0 {
                    0.0
                } else {
                    soft_threshold(r[j] + gjj * old, self.n * lambda * weights[j]) / gjj
                };
                let delta = new - old;
                if delta != 0.0 {
                    r.axpy(-delta, &self.gram.column(j), 1.0);
                    beta[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            trace.push(self.objective(&beta, lambda, weights));
            if max_change < tol {
                break;
            }
        }
        LassoFit {
            beta,
            sweeps,
            objective_trace: trace,
        }
    }
}
