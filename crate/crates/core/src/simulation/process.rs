use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::model::VarmaModel;
use crate::coherence::rho_from_inverse;
use crate::error::{Error, Result};
use crate::linalg::{cis, condition_number, hermitian_part, inverse, max_abs_real, CMatrix, RMatrix};
use crate::spectral::MultivariateSeries;

pub const BURN_IN: usize = 500;
/// Autocovariances are dropped once their largest entry falls below this.
pub const AUTOCOV_TOL: f64 = 1e-14;
const MAX_AUTOCOV_LAGS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Innovations {
    #[default]
    Gaussian,
    /// Centered uniform with unit variance, mixed through `chol(Σ_ε)`.
    Uniform,
}

fn transfer(coefs: &[RMatrix], omega: f64, sign: f64) -> CMatrix {
    let p = coefs.first().map_or(0, |c| c.nrows());
    let mut out = CMatrix::identity(p, p);
    for (j, c) in coefs.iter().enumerate() {
        let e = cis(-omega * (j + 1) as f64) * sign;
        out += c.map(|x| e * x);
    }
    out
}

/// `f(ω) = (2π)^{-1} A(ω)^{-1} B(ω) Σ_ε B(ω)^H A(ω)^{-H}` with
/// `A(ω) = I − Σ A_j e^{−iωj}`, `B(ω) = I + Σ B_j e^{−iωj}`.
pub fn true_spectral_density(model: &VarmaModel, omega: f64) -> Result<CMatrix> {
    let p = model.p();
    let a = if model.ar.is_empty() {
        CMatrix::identity(p, p)
    } else {
        transfer(&model.ar, omega, -1.0)
    };
    let b = if model.ma.is_empty() {
        CMatrix::identity(p, p)
    } else {
        transfer(&model.ma, omega, 1.0)
    };
    let condition = condition_number(&a);
    if !(condition < 1e12) {
        return Err(Error::SingularTransfer { omega, condition });
    }
    let a_inv = inverse(&a).ok_or(Error::SingularTransfer { omega, condition })?;
    let psi = a_inv * b;
    let sigma = crate::linalg::to_complex(&model.sigma_eps);
    let f = &psi * sigma * psi.adjoint() / Complex64::new(2.0 * PI, 0.0);
    Ok(hermitian_part(&f))
}

/// Matrix of `ρ_{u,v}(ω) = −f^{-1}_{u,v}/√(f^{-1}_{u,u} f^{-1}_{v,v})`, zero diagonal.
pub fn true_partial_coherence_matrix(model: &VarmaModel, omega: f64) -> Result<CMatrix> {
    let f = true_spectral_density(model, omega)?;
    let fi = inverse(&f)
        .ok_or_else(|| Error::DegenerateSpectrum(format!("true spectral density singular at omega = {omega}")))?;
    let p = f.nrows();
    let mut out = CMatrix::zeros(p, p);
    for u in 0..p {
        for v in 0..p {
            if u != v {
                out[(u, v)] = rho_from_inverse(&fi, u, v)
                    .map_err(|_| Error::DegenerateSpectrum(format!("inverse spectral density at omega = {omega}")))?;
            }
        }
    }
    Ok(out)
}

pub fn true_partial_coherence(model: &VarmaModel, u: usize, v: usize, omega: f64) -> Result<Complex64> {
    let p = model.p();
    if u >= p || v >= p || u == v {
        return Err(Error::InvalidInput(format!("pair ({u}, {v}) invalid for p = {p}")));
    }
    Ok(true_partial_coherence_matrix(model, omega)?[(u, v)])
}

/// State-space form `s_t = F s_{t−1} + G ε_t` with
/// `s_t = (X_t, …, X_{t−a+1}, ε_t, …, ε_{t−q+1})`.
fn state_space(model: &VarmaModel) -> (RMatrix, RMatrix) {
    let p = model.p();
    let a = model.ar.len().max(1);
    let q = model.ma.len();
    let dim = p * (a + q);
    let mut f = RMatrix::zeros(dim, dim);
    let mut g = RMatrix::zeros(dim, p);
    for (j, c) in model.ar.iter().enumerate() {
        f.view_mut((0, j * p), (p, p)).copy_from(c);
    }
    for (j, c) in model.ma.iter().enumerate() {
        f.view_mut((0, (a + j) * p), (p, p)).copy_from(c);
    }
    for i in p..a * p {
        f[(i, i - p)] = 1.0;
    }
    for i in (a + 1) * p..dim {
        f[(i, i - p)] = 1.0;
    }
    g.view_mut((0, 0), (p, p)).fill_with_identity();
    if q > 0 {
        g.view_mut((a * p, 0), (p, p)).fill_with_identity();
    }
    (f, g)
}

/// Solves `P = F P Fᵀ + Q` by doubling.
fn lyapunov(f: &RMatrix, q: &RMatrix) -> RMatrix {
    let mut p = q.clone();
    let mut fk = f.clone();
    for _ in 0..64 {
        let step = &fk * &p * fk.transpose();
        p += &step;
        fk = &fk * &fk;
        if max_abs_real(&step) <= 1e-17 * max_abs_real(&p) || max_abs_real(&fk) == 0.0 {
            break;
        }
    }
    (&p + p.transpose()) * 0.5
}

/// `Γ(k) = E[X_{t+k} X_tᵀ]` for `k = 0, 1, …` until the entries drop below
/// `AUTOCOV_TOL` or `max_lag` is reached.
pub fn model_autocovariances(model: &VarmaModel, max_lag: usize) -> Vec<RMatrix> {
    let p = model.p();
    let (f, g) = state_space(model);
    let q = &g * &model.sigma_eps * g.transpose();
    let mut cur = lyapunov(&f, &q);
    let mut out = Vec::new();
    for k in 0..=max_lag.min(MAX_AUTOCOV_LAGS) {
        let gamma = cur.view((0, 0), (p, p)).into_owned();
        if k > 0 && max_abs_real(&gamma) < AUTOCOV_TOL {
            break;
        }
        out.push(gamma);
        cur = &f * cur;
    }
    out
}

/// `Σ_n(ω) = (2π)^{-1} Σ_{|k|<n} (1 − |k|/n) Γ(k) e^{−iωk}`.
pub fn exact_dft_variance(model: &VarmaModel, n: usize, omega: f64) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let gammas = model_autocovariances(model, n - 1);
    let p = model.p();
    let mut out = crate::linalg::to_complex(&gammas[0]);
    for (k, g) in gammas.iter().enumerate().skip(1) {
        let w = 1.0 - k as f64 / n as f64;
        let e = cis(-omega * k as f64) * w;
        for a in 0..p {
            for b in 0..p {
                out[(a, b)] += e * g[(a, b)] + e.conj() * g[(b, a)];
            }
        }
    }
    Ok(hermitian_part(&out) / Complex64::new(2.0 * PI, 0.0))
}

/// Path of length `n` after `BURN_IN` discarded steps; deterministic in `seed`.
pub fn simulate_path(model: &VarmaModel, n: usize, seed: u64, innovations: Innovations) -> Result<MultivariateSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with_rng(model, n, &mut rng, innovations)
}

pub(crate) fn simulate_with_rng(
    model: &VarmaModel,
    n: usize,
    rng: &mut ChaCha8Rng,
    innovations: Innovations,
) -> Result<MultivariateSeries> {
    if n < 2 {
        return Err(Error::InvalidInput("path length must be at least 2".into()));
    }
    let p = model.p();
    let chol = model
        .sigma_eps
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("innovation covariance is not positive definite".into()))?
        .l();
    let total = n + BURN_IN;
    let uniform = Uniform::new(-(3.0f64.sqrt()), 3.0f64.sqrt()).expect("valid bounds");
    let mut eps = RMatrix::zeros(total, p);
    let mut z = nalgebra::DVector::zeros(p);
    for t in 0..total {
        for zi in z.iter_mut() {
            *zi = match innovations {
                Innovations::Gaussian => StandardNormal.sample(rng),
                Innovations::Uniform => uniform.sample(rng),
            };
        }
        eps.row_mut(t).copy_from(&(&chol * &z).transpose());
    }
    let mut x = RMatrix::zeros(total, p);
    for t in 0..total {
        let mut row = eps.row(t).into_owned();
        for (j, a) in model.ar.iter().enumerate() {
            if t > j {
                row += x.row(t - j - 1) * a.transpose();
            }
        }
        for (j, b) in model.ma.iter().enumerate() {
            if t > j {
                row += eps.row(t - j - 1) * b.transpose();
            }
        }
        x.row_mut(t).copy_from(&row);
    }
    MultivariateSeries::from_values(x.rows(BURN_IN, n).into_owned())
}
