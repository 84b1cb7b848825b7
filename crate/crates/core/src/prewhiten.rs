//! Sparse VAR prewhitening: row-wise adaptive lasso fit with BIC-selected
//! penalties, time-domain filtering and frequency-domain recoloring.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lasso::LassoProblem;
use crate::linalg::{cis, companion_radius, condition_number, hermitian_part, inverse, is_hermitian, CMatrix, RMatrix};
use crate::spectral::MultivariateSeries;

pub const PENALTY_GRID_LEN: usize = 50;
pub const PENALTY_GRID_RATIO: f64 = 1e-3;
pub const RIDGE_SCALE: f64 = 1e-3;
pub const WEIGHT_OFFSET: f64 = 1e-6;
pub const MAX_TRANSFER_CONDITION: f64 = 1e12;

/// Per-row outcome of the adaptive lasso fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFit {
    pub row: usize,
    pub lambda: f64,
    pub bic: f64,
    pub nonzero: usize,
    /// Set when the ridge initialiser failed; the row is then all zeros.
    pub failed: bool,
}

/// `X_t = Σ_j Φ_j X_{t−j} + e_t` with sparse coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    p: usize,
    coefficients: Vec<RMatrix>,
    diagnostics: Vec<RowFit>,
}

impl VarModel {
    /// Order-0 model; every operation with it is the identity.
    pub fn identity(p: usize) -> Self {
        Self {
            p,
            coefficients: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn new(coefficients: Vec<RMatrix>) -> Result<Self> {
        let p = coefficients
            .first()
            .map(|c| c.nrows())
            .ok_or_else(|| Error::InvalidInput("use VarModel::identity for order 0".into()))?;
        if coefficients.iter().any(|c| c.nrows() != p || c.ncols() != p) {
            return Err(Error::InvalidInput("VAR coefficients must all be p x p".into()));
        }
        Ok(Self {
            p,
            coefficients,
            diagnostics: Vec::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coefficients(&self) -> &[RMatrix] {
        &self.coefficients
    }

    pub fn diagnostics(&self) -> &[RowFit] {
        &self.diagnostics
    }

    pub fn nonzero_count(&self) -> usize {
        self.coefficients.iter().map(|c| c.iter().filter(|x| x.abs() > 0.0).count()).sum()
    }

    /// Spectral radius of the companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        companion_radius(&self.coefficients)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }
}

/// `⌈log₁₀ n⌉`.
pub fn default_order(n: usize) -> usize {
    (n as f64).log10().ceil() as usize
}

/// Row-wise adaptive lasso VAR(m) fit; each row's penalty minimises
/// `log(RSS/n_eff) + k·(log n_eff / n_eff)·log(p)`.
pub fn fit_sparse_var(series: &MultivariateSeries, order: usize, exec: Exec) -> Result<VarModel> {
    let n = series.n();
    let p = series.p();
    if order == 0 {
        return Ok(VarModel::identity(p));
    }
    if 10 * order >= n {
        return Err(Error::InvalidOrder { order, n });
    }
    let x = series.values();
    let n_eff = n - order;
    let dim = p * order;
    let design = RMatrix::from_fn(n_eff, dim, |t, col| {
        let (lag, comp) = (col / p, col % p);
        x[(order + t - lag - 1, comp)]
    });
    let response = x.rows(order, n_eff).into_owned();
    let gram = design.tr_mul(&design);
    let cross = design.tr_mul(&response);
    let c_n = (p.max(2) as f64).ln();

    let rows: Vec<(DVector<f64>, RowFit)> = exec.map_range(p, |i| {
        let y = response.column(i);
        let problem = LassoProblem::new(&gram, cross.column(i).into_owned(), y.dot(&y), n_eff);
        fit_row(&problem, i, p, n_eff, c_n)
    });

    let mut coefficients = vec![RMatrix::zeros(p, p); order];
    let mut diagnostics = Vec::with_capacity(p);
    for (i, (beta, fit)) in rows.into_iter().enumerate() {
        for col in 0..dim {
            coefficients[col / p][(i, col % p)] = beta[col];
        }
        diagnostics.push(fit);
    }
    let model = VarModel {
        p,
        coefficients,
        diagnostics,
    };
    if !model.is_stable() {
        log::warn!("fitted VAR filter is not stable (spectral radius {:.4})", model.spectral_radius());
    }
    Ok(model)
}

fn fit_row(problem: &LassoProblem<'_>, row: usize, p: usize, n_eff: usize, c_n: f64) -> (DVector<f64>, RowFit) {
    let dim = problem.dim();
    let nf = n_eff as f64;
    let bic_of = |beta: &DVector<f64>| {
        let k = beta.iter().filter(|b| **b != 0.0).count();
        (problem.rss(beta) / nf).max(1e-300).ln() + k as f64 * nf.ln() / nf * c_n
    };
    let zero_fit = |failed: bool| {
        let z = DVector::zeros(dim);
        let bic = bic_of(&z);
        let fit = RowFit {
            row,
            lambda: f64::INFINITY,
            bic,
            nonzero: 0,
            failed,
        };
        (z, fit)
    };

    // ridge initialiser for the adaptive weights
    let mut lhs = problem.gram() / nf;
    let ridge = RIDGE_SCALE * lhs.trace() / p as f64;
    for j in 0..dim {
        lhs[(j, j)] += ridge;
    }
    let init = match lhs.cholesky() {
        Some(ch) if ridge > 0.0 => ch.solve(&(problem.xty() / nf)),
        _ => {
            log::warn!("sparse VAR row {row}: singular design after weighting, row set to zero");
            return zero_fit(true);
        }
    };
    let weights: Vec<f64> = init.iter().map(|b| 1.0 / (b.abs() + WEIGHT_OFFSET)).collect();
    let lambda_max = problem.lambda_max(&weights);
    if !(lambda_max > 0.0) {
        return zero_fit(false);
    }

    let mut beta = DVector::zeros(dim);
    let mut best = (beta.clone(), lambda_max, bic_of(&beta));
    for step in 0..PENALTY_GRID_LEN {
        let frac = step as f64 / (PENALTY_GRID_LEN - 1) as f64;
        let lambda = lambda_max * PENALTY_GRID_RATIO.powf(frac);
        beta = problem.solve(lambda, &weights, Some(&beta)).beta;
        let bic = bic_of(&beta);
        if bic < best.2 {
            best = (beta.clone(), lambda, bic);
        }
    }
    let nonzero = best.0.iter().filter(|b| **b != 0.0).count();
    let fit = RowFit {
        row,
        lambda: best.1,
        bic: best.2,
        nonzero,
        failed: false,
    };
    (best.0, fit)
}

/// `Y_t = X_t − Σ_j Φ_j X_{t−j}`, `t = m+1..n`; row `t` of the output is
/// original time `t + m`.
pub fn apply_filter(series: &MultivariateSeries, model: &VarModel) -> Result<MultivariateSeries> {
    let n = series.n();
    let m = model.order();
    if m == 0 {
        return Ok(series.clone());
    }
    if model.p() != series.p() {
        return Err(Error::InvalidInput("model and series dimensions differ".into()));
    }
    if n <= m + 1 {
        return Err(Error::InvalidInput(format!("cannot filter {n} observations with an order-{m} model")));
    }
    let x = series.values();
    let mut y = x.rows(m, n - m).into_owned();
    for (j, phi) in model.coefficients().iter().enumerate() {
        let lagged = x.rows(m - j - 1, n - m);
        y -= lagged * phi.transpose();
    }
    let out = MultivariateSeries::from_values(y)?;
    match series.sampling_rate() {
        Some(hz) => out.with_sampling_rate(hz),
        None => Ok(out),
    }
}

/// `Φ(ω) = I − Σ_j Φ_j e^{−iωj}`.
pub fn transfer_function(model: &VarModel, omega: f64) -> CMatrix {
    let p = model.p();
    let mut out = CMatrix::identity(p, p);
    for (j, phi) in model.coefficients().iter().enumerate() {
        let e = cis(-omega * (j + 1) as f64);
        out -= phi.map(|x| e * x);
    }
    out
}

/// `Φ(ω)^{-1} S Φ(ω)^{-H}`.
pub fn recolor_spectrum(model: &VarModel, whitened_sum: &CMatrix, omega: f64) -> Result<CMatrix> {
    if model.order() == 0 {
        return Ok(whitened_sum.clone());
    }
    let phi = transfer_function(model, omega);
    let condition = condition_number(&phi);
    if !(condition < MAX_TRANSFER_CONDITION) {
        return Err(Error::SingularTransfer { omega, condition });
    }
    let inv = inverse(&phi).ok_or(Error::SingularTransfer { omega, condition })?;
    let out = &inv * whitened_sum * inv.adjoint();
    Ok(if is_hermitian(whitened_sum, 1e-12) {
        hermitian_part(&out)
    } else {
        out
    })
}
