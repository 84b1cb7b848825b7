use serde::Serialize;

use super::glasso::glasso_solve_warm;
use super::{clime_solve, InverseEstimate, InverseMethod};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{hermitian_logdet, max_diag_re, CMatrix};
use crate::spectral::{FieldKind, SpectralField};

pub const BIC_GRID_LEN: usize = 30;
pub const BIC_GRID_RATIO: f64 = 0.01;

/// Selected penalty and estimate at one frequency.
#[derive(Debug, Clone)]
pub struct BicSelection {
    pub omega: f64,
    pub lambda: f64,
    pub bic: f64,
    pub estimate: InverseEstimate,
    /// `(λ, BIC, upper nonzero count)` along the grid, largest λ first.
    pub path: Vec<(f64, f64, usize)>,
}

/// `−log det B + Re tr(S B) + k·(log n_eff / n_eff)·C_n` with
/// `C_n = log log max(p, 3)`; `+∞` if `B` is not positive definite.
pub fn bic_score(s: &CMatrix, est: &InverseEstimate, n_eff: usize) -> f64 {
    let p = s.nrows();
    let Some(logdet) = hermitian_logdet(&est.matrix) else {
        return f64::INFINITY;
    };
    let nf = n_eff as f64;
    let c_n = (p.max(3) as f64).ln().ln();
    let trace = (s * &est.matrix).trace().re;
    -logdet + trace + est.upper_nonzero() as f64 * nf.ln() / nf * c_n
}

/// Penalty grid for one frequency, largest first.
fn lambda_grid(s: &CMatrix, method: InverseMethod) -> Vec<f64> {
    let top = match method {
        // CLIME's constraint is scale free; the zero matrix is feasible from λ = 1 on.
        InverseMethod::Clime => 1.0,
        InverseMethod::Glasso => {
            let p = s.nrows();
            let mut m: f64 = 0.0;
            for j in 0..p {
                for k in 0..p {
                    if j != k {
                        m = m.max(s[(j, k)].re.abs()).max(s[(j, k)].im.abs());
                    }
                }
            }
            m.max(1e-6 * max_diag_re(s).max(f64::MIN_POSITIVE))
        }
    };
    (0..BIC_GRID_LEN)
        .map(|i| top * BIC_GRID_RATIO.powf(i as f64 / (BIC_GRID_LEN - 1) as f64))
        .collect()
}

fn select_one(omega: f64, s: &CMatrix, n_eff: usize, method: InverseMethod) -> Result<BicSelection> {
    let grid = lambda_grid(s, method);
    let mut best: Option<(f64, f64, InverseEstimate)> = None;
    let mut path = Vec::with_capacity(grid.len());
    let mut warm = None;
    for &lambda in &grid {
        let est = match method {
            InverseMethod::Glasso => match glasso_solve_warm(s, lambda, warm.as_ref()) {
                Ok((est, state)) => {
                    warm = Some(state);
                    Ok(est)
                }
                Err(e) => Err(e),
            },
            InverseMethod::Clime => clime_solve(s, lambda),
        };
        let est = match est {
            Ok(est) => est,
            Err(Error::InfeasiblePenalty { .. }) | Err(Error::ConvergenceFailure { .. }) => {
                path.push((lambda, f64::INFINITY, 0));
                continue;
            }
            Err(e) => return Err(e),
        };
        let bic = bic_score(s, &est, n_eff);
        path.push((lambda, bic, est.upper_nonzero()));
        // strict improvement only: ties keep the larger penalty
        if best.as_ref().is_none_or(|b| bic < b.1) {
            best = Some((lambda, bic, est));
        }
    }
    let (lambda, bic, estimate) = best.ok_or_else(|| {
        Error::DegenerateInverse(format!("no penalty on the grid produced an estimate at omega = {omega}"))
    })?;
    if !bic.is_finite() {
        log::warn!("no positive-definite inverse estimate on the penalty grid at omega = {omega}");
    }
    Ok(BicSelection {
        omega,
        lambda,
        bic,
        estimate,
        path,
    })
}

/// Per-frequency BIC selection of the penalty.
pub fn select_lambda_bic(
    field: &SpectralField,
    n_eff: usize,
    method: InverseMethod,
    exec: Exec,
) -> Result<Vec<BicSelection>> {
    if field.kind != FieldKind::Density {
        return Err(Error::InvalidInput("penalty selection needs a density field".into()));
    }
    if field.is_empty() {
        return Err(Error::InvalidInput("penalty selection on an empty frequency grid".into()));
    }
    if n_eff < 2 {
        return Err(Error::InvalidInput(format!("effective sample size {n_eff} too small for BIC")));
    }
    let idx: Vec<usize> = (0..field.len()).collect();
    exec.map(&idx, |&i| select_one(field.frequencies[i], &field.matrices[i], n_eff, method))
        .into_iter()
        .collect()
}

/// Serializable summary of a selection.
#[derive(Debug, Clone, Serialize)]
pub struct BicSummary {
    pub omega: f64,
    pub lambda: f64,
    pub bic: f64,
}

impl From<&BicSelection> for BicSummary {
    fn from(s: &BicSelection) -> Self {
        Self {
            omega: s.omega,
            lambda: s.lambda,
            bic: s.bic,
        }
    }
}
