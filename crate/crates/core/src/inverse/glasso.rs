use nalgebra::DVector;

use super::embed::{complex_recover, real_embed};
use super::{residual_gap, InverseEstimate, InverseMethod};
use crate::error::{Error, Result};
use crate::lasso::LassoProblem;
use crate::linalg::{hermitian_part, sym_logdet, RMatrix};
use crate::linalg::CMatrix;

pub const GLASSO_MAX_SWEEPS: usize = 500;
const INNER_TOL: f64 = 1e-12;
const INNER_MAX_SWEEPS: usize = 10_000;
const PSD_CLIP: f64 = 1e-8;
/// Outer sweeps also stop only once `W` moves less than this, relative to `‖S‖_max`.
const W_TOL: f64 = 1e-10;

/// Iterate of the blockwise coordinate descent, reusable as a warm start
/// along a penalty path.
#[derive(Debug, Clone)]
pub struct GlassoState {
    /// Current estimate of the covariance `W ≈ Θ^{-1}` on the embedding.
    pub w: RMatrix,
    /// Column `j` holds the regression coefficients of coordinate `j` on the
    /// others (entry `j` unused).
    pub beta: RMatrix,
    pub sweeps: usize,
    /// Primal objective after each outer sweep.
    pub primal_trace: Vec<f64>,
    /// Dual objective `log det W + 2p` after each outer sweep.
    pub dual_trace: Vec<f64>,
}

/// Graphical lasso with off-diagonal penalty on the real embedding of `S`.
pub fn glasso_solve(s: &CMatrix, lambda: f64) -> Result<InverseEstimate> {
    glasso_solve_warm(s, lambda, None).map(|(est, _)| est)
}

pub fn glasso_solve_warm(
    s: &CMatrix,
    lambda: f64,
    warm: Option<&GlassoState>,
) -> Result<(InverseEstimate, GlassoState)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("glasso penalty must be positive, got {lambda}")));
    }
    let sr = psd_project(real_embed(s)?.into_matrix());
    let dim = sr.nrows();
    let p = dim / 2;
    let target_gap = 1e-6 * p as f64;

    let mut state = match warm {
        Some(st) if st.w.nrows() == dim => {
            let mut w = st.w.clone();
            // pull the warm start back into the feasible box of the new λ
            for i in 0..dim {
                for j in 0..dim {
                    w[(i, j)] = if i == j {
                        sr[(i, i)]
                    } else {
                        sr[(i, j)] + (w[(i, j)] - sr[(i, j)]).clamp(-lambda, lambda)
                    };
                }
            }
            GlassoState {
                w,
                beta: st.beta.clone(),
                sweeps: 0,
                primal_trace: Vec::new(),
                dual_trace: Vec::new(),
            }
        }
        _ => GlassoState {
            w: sr.clone(),
            beta: RMatrix::zeros(dim, dim),
            sweeps: 0,
            primal_trace: Vec::new(),
            dual_trace: Vec::new(),
        },
    };

    let ones = vec![1.0; dim - 1];
    let mut gap = f64::INFINITY;
    let w_tol = W_TOL * sr.amax().max(f64::MIN_POSITIVE);
    while state.sweeps < GLASSO_MAX_SWEEPS {
        state.sweeps += 1;
        let mut w_change: f64 = 0.0;
        for j in 0..dim {
            let idx: Vec<usize> = (0..dim).filter(|&i| i != j).collect();
            let w11 = state.w.select_rows(&idx).select_columns(&idx);
            let s12 = DVector::from_iterator(dim - 1, idx.iter().map(|&i| sr[(i, j)]));
            let warm_beta = DVector::from_iterator(dim - 1, idx.iter().map(|&i| state.beta[(i, j)]));
            let problem = LassoProblem::new(&w11, s12, 0.0, 1);
            let fit = problem.solve_with(lambda, &ones, Some(&warm_beta), INNER_TOL, INNER_MAX_SWEEPS);
            let w12 = &w11 * &fit.beta;
            for (a, &i) in idx.iter().enumerate() {
                w_change = w_change.max((state.w[(i, j)] - w12[a]).abs());
                state.beta[(i, j)] = fit.beta[a];
                state.w[(i, j)] = w12[a];
                state.w[(j, i)] = w12[a];
            }
        }
        let theta = precision_from(&state.w, &state.beta);
        let primal = primal_objective(&sr, &theta, lambda);
        let dual = dual_objective(&sr, &state.w, lambda);
        state.primal_trace.push(primal);
        state.dual_trace.push(dual);
        gap = primal - dual;
        if gap <= target_gap && w_change <= w_tol {
            break;
        }
    }

    let theta = precision_from(&state.w, &state.beta);
    let matrix = hermitian_part(&complex_recover(&theta));
    let est = InverseEstimate {
        feasibility_gap: residual_gap(s, &matrix),
        matrix,
        lambda,
        method: InverseMethod::Glasso,
        duality_gap: Some(gap),
    };
    if gap > target_gap {
        return Err(Error::ConvergenceFailure {
            sweeps: state.sweeps,
            last: Box::new(est),
        });
    }
    Ok((est, state))
}

/// Eigenvalues below `1e-8·λ_max` are raised to that floor.
fn psd_project(a: RMatrix) -> RMatrix {
    let eig = a.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, &x| m.max(x));
    let floor = PSD_CLIP * top;
    if eig.eigenvalues.iter().all(|&x| x >= floor) {
        return a;
    }
    let clipped = eig.eigenvalues.map(|x| x.max(floor));
    let v = &eig.eigenvectors;
    let out = v * RMatrix::from_diagonal(&clipped) * v.transpose();
    (&out + out.transpose()) * 0.5
}

/// `θ_jj = 1/(w_jj − w_12ᵀβ)`, `θ_12 = −β θ_jj`, symmetrised.
fn precision_from(w: &RMatrix, beta: &RMatrix) -> RMatrix {
    let dim = w.nrows();
    let mut theta = RMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut inner = 0.0;
        for i in 0..dim {
            if i != j {
                inner += w[(i, j)] * beta[(i, j)];
            }
        }
        let tjj = 1.0 / (w[(j, j)] - inner);
        theta[(j, j)] = tjj;
        for i in 0..dim {
            if i != j {
                theta[(i, j)] = -beta[(i, j)] * tjj;
            }
        }
    }
    (&theta + theta.transpose()) * 0.5
}

fn off_l1(a: &RMatrix) -> f64 {
    let mut acc = 0.0;
    for ((i, j), x) in a.iter().enumerate().map(|(k, x)| ((k % a.nrows(), k / a.nrows()), x)) {
        if i != j {
            acc += x.abs();
        }
    }
    acc
}

/// `−log det Θ + tr(SΘ) + λ‖Θ‖_{1,off}`; `+∞` when `Θ` is not PD.
pub(crate) fn primal_objective(s: &RMatrix, theta: &RMatrix, lambda: f64) -> f64 {
    match sym_logdet(theta) {
        Some(ld) => -ld + s.dot(theta) + lambda * off_l1(theta),
        None => f64::INFINITY,
    }
}

/// `log det W + dim` with `W` clipped into `{|W − S|_off ≤ λ, W_ii = S_ii}`.
pub(crate) fn dual_objective(s: &RMatrix, w: &RMatrix, lambda: f64) -> f64 {
    let dim = s.nrows();
    let clipped = RMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            s[(i, i)]
        } else {
            s[(i, j)] + (0.5 * (w[(i, j)] + w[(j, i)]) - s[(i, j)]).clamp(-lambda, lambda)
        }
    });
    match sym_logdet(&clipped) {
        Some(ld) => ld + dim as f64,
        None => f64::NEG_INFINITY,
    }
}
