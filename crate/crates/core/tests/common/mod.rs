//! Naive double-loop references, written straight from the definitions and
//! sharing no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;
pub type CM = DMatrix<C>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Bartlett,
    Uniform,
}

pub fn window(w: Window, x: f64) -> f64 {
    match w {
        Window::Bartlett => (1.0 - x.abs()).max(0.0),
        Window::Uniform => {
            if x.abs() <= 1.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `x[t][j]`, `t = 0..n` standing for times `1..=n`.
pub fn random_series(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Z(ω)_j = (2πn)^{-1/2} Σ_{t=1}^n x_{t,j} e^{-iωt}`.
pub fn dft(x: &[Vec<f64>], omega: f64) -> Vec<C> {
    let n = x.len();
    let p = x[0].len();
    let mut z = vec![C::new(0.0, 0.0); p];
    for (j, zj) in z.iter_mut().enumerate() {
        for t in 1..=n {
            *zj += C::from_polar(x[t - 1][j], -omega * t as f64);
        }
        *zj /= (2.0 * PI * n as f64).sqrt();
    }
    z
}

/// `Γ(h)_{ab} = n^{-1} Σ_t x_{t+h,a} x_{t,b}` for any sign of `h`.
pub fn autocov(x: &[Vec<f64>], h: i64) -> DMatrix<f64> {
    let n = x.len() as i64;
    let p = x[0].len();
    let mut g = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let mut s = 0.0;
            for t in 0..n {
                let u = t + h;
                if (0..n).contains(&u) {
                    s += x[u as usize][a] * x[t as usize][b];
                }
            }
            g[(a, b)] = s / n as f64;
        }
    }
    g
}

/// `(2π)^{-1} Σ_{|h|<n} K(h/M) Γ(h) e^{-ihω}`.
pub fn lag_window(x: &[Vec<f64>], w: Window, m: usize, omega: f64) -> CM {
    let n = x.len() as i64;
    let p = x[0].len();
    let mut f = CM::zeros(p, p);
    for h in -(n - 1)..n {
        let k = window(w, h as f64 / m as f64);
        if k == 0.0 {
            continue;
        }
        let g = autocov(x, h);
        let e = C::from_polar(k / (2.0 * PI), -(h as f64) * omega);
        for a in 0..p {
            for b in 0..p {
                f[(a, b)] += e * g[(a, b)];
            }
        }
    }
    f
}

/// `κ_M(ω) = M^{-1} Σ_{|u|<n} K(u/M) e^{-iuω}` summed as a complex number.
pub fn kappa(w: Window, m: usize, n: usize, omega: f64) -> C {
    let n = n as i64;
    let mut s = C::new(0.0, 0.0);
    for u in -(n - 1)..n {
        s += C::from_polar(window(w, u as f64 / m as f64), -(u as f64) * omega);
    }
    s / m as f64
}

/// `Σ_{k=1}^n κ_M(ω − ω_k) Z(ω_k) Z(ω_k)^H`.
pub fn kernel_sum(x: &[Vec<f64>], w: Window, m: usize, omega: f64) -> CM {
    let n = x.len();
    let p = x[0].len();
    let mut s = CM::zeros(p, p);
    for k in 1..=n {
        let wk = 2.0 * PI * k as f64 / n as f64;
        let z = dft(x, wk);
        let kap = kappa(w, m, n, omega - wk);
        for a in 0..p {
            for b in 0..p {
                s[(a, b)] += kap * z[a] * z[b].conj();
            }
        }
    }
    s
}

/// `(M/n) Σ_k κ_M(ω − ω_k) Z(ω_k) Z(ω_k)^H`.
pub fn smoothed_periodogram(x: &[Vec<f64>], w: Window, m: usize, omega: f64) -> CM {
    kernel_sum(x, w, m, omega) * C::new(m as f64 / x.len() as f64, 0.0)
}

/// Random Hermitian positive definite matrix `B B^H + p I / 2`.
pub fn random_hpd(rng: &mut ChaCha8Rng, p: usize) -> CM {
    let b = CM::from_fn(p, p, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    &b * b.adjoint() + CM::identity(p, p) * C::new(p as f64 / 2.0, 0.0)
}

/// De-biased regression coefficient from its sum-over-frequencies form:
/// residual `Z_v − β_v^H Z_{−v}` against the rotation `Z_{−v}^H γ`, with
/// `β_v = −Θ_{−v,v}/Θ_vv` and `γ^H = Θ_vv Θ_{u,−v} − Θ_uv Θ_{v,−v}`.
pub fn beta_debiased(x: &[Vec<f64>], theta: &CM, w: Window, m: usize, u: usize, v: usize, omega: f64) -> C {
    let n = x.len();
    let p = x[0].len();
    let tvv = theta[(v, v)];
    let others: Vec<usize> = (0..p).filter(|&j| j != v).collect();
    let beta: Vec<C> = others.iter().map(|&j| -theta[(j, v)] / tvv).collect();
    let gamma_h: Vec<C> = others.iter().map(|&j| tvv * theta[(u, j)] - theta[(u, v)] * theta[(v, j)]).collect();
    let gamma: Vec<C> = gamma_h.iter().map(|g| g.conj()).collect();
    let mut num = C::new(0.0, 0.0);
    let mut den = C::new(0.0, 0.0);
    for k in 1..=n {
        let wk = 2.0 * PI * k as f64 / n as f64;
        let z = dft(x, wk);
        let kap = kappa(w, m, n, omega - wk);
        let mut resid = z[v];
        for (i, &j) in others.iter().enumerate() {
            resid -= beta[i].conj() * z[j];
        }
        let mut rot = C::new(0.0, 0.0);
        for (i, &j) in others.iter().enumerate() {
            rot += z[j].conj() * gamma[i];
        }
        num += kap * resid * rot;
        den += kap * z[u] * rot;
    }
    -theta[(u, v)] / tvv + num / den
}

pub fn max_diff(a: &CM, b: &CM) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
