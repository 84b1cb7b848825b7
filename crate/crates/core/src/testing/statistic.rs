use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::coherence::DebiasedEstimate;
use crate::error::{Error, Result};

/// Moduli are clamped to this before inverting the asymptotic covariance.
pub const RHO_CLAMP: f64 = 1.0 - 1e-6;

/// Which partial coherence estimate enters `V̂^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VhatSource {
    #[default]
    Plugin,
    Debiased,
}

/// Settings of the max-type statistic and the tests built on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    pub delta: f64,
    pub alpha: f64,
    /// Sample size entering the `n/M` scaling.
    pub n: usize,
    pub m: usize,
    pub c_k2: f64,
    pub vhat: VhatSource,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidInput(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.m == 0 || self.n == 0 || !(self.c_k2 > 0.0) {
            return Err(Error::InvalidInput("n, M and C_K2 must be positive".into()));
        }
        Ok(())
    }
}

/// `V̂^{-1} = 2/(C_{K₂}(1−|ρ|²)²)·[[1−Im², Re·Im], [Re·Im, 1−Re²]]`; the
/// flag reports whether `|ρ|` had to be clamped.
pub fn vhat_inverse(rho: Complex64, c_k2: f64) -> (Matrix2<f64>, bool) {
    let r = rho.norm();
    let (rho, clamped) = if r > RHO_CLAMP {
        (rho * (RHO_CLAMP / r), true)
    } else {
        (rho, false)
    };
    let r2 = rho.norm_sqr();
    let pre = 2.0 / (c_k2 * (1.0 - r2) * (1.0 - r2));
    let (re, im) = (rho.re, rho.im);
    let m = Matrix2::new(1.0 - im * im, re * im, re * im, 1.0 - re * re) * pre;
    (m, clamped)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyRecord {
    pub omega: f64,
    pub rho_de: Complex64,
    pub rho_plugin: Complex64,
    /// `(n/M)·wᵀ V̂^{-1} w`.
    pub quad: f64,
}

/// `T_n^{(u,v)}` with its per-frequency ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatistic {
    pub u: usize,
    pub v: usize,
    pub t: f64,
    pub per_frequency: Vec<FrequencyRecord>,
    /// `max_l |ρ̂^{(de)}(ω'_l)| > δ`.
    pub exceeded: bool,
    pub max_rho_de: f64,
    pub clamped: bool,
    pub unstable: bool,
}

/// `T = 1(max_l |ρ̂^{(de)}| > δ) · max_l (n/M) w_lᵀ V̂^{-1} w_l`,
/// `w_l = (|ρ̂^{(de)}| − δ)(cos ω̃_l, sin ω̃_l)`, `ω̃_l = arg ρ̂^{(de)}`.
pub fn pair_statistic(estimates: &[DebiasedEstimate], config: &TestConfig) -> Result<PairStatistic> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::InvalidInput("pair statistic needs at least one frequency".into()))?;
    let (u, v) = (first.u, first.v);
    if estimates.iter().any(|e| e.u != u || e.v != v) {
        return Err(Error::InvalidInput("estimates of different pairs mixed in one statistic".into()));
    }
    let scale = config.n as f64 / config.m as f64;
    let mut per_frequency = Vec::with_capacity(estimates.len());
    let mut clamped = false;
    let mut best: f64 = 0.0;
    let mut max_rho: f64 = 0.0;
    for e in estimates {
        let source = match config.vhat {
            VhatSource::Plugin => e.rho_plugin,
            VhatSource::Debiased => e.rho_de,
        };
        let (vinv, c) = vhat_inverse(source, config.c_k2);
        clamped |= c;
        let r = e.rho_de.norm();
        let theta = if r > 0.0 { e.rho_de.arg() } else { 0.0 };
        let w = Vector2::new(theta.cos(), theta.sin()) * (r - config.delta);
        let quad = scale * w.dot(&(vinv * w));
        best = best.max(quad);
        max_rho = max_rho.max(r);
        per_frequency.push(FrequencyRecord {
            omega: e.omega,
            rho_de: e.rho_de,
            rho_plugin: e.rho_plugin,
            quad,
        });
    }
    let exceeded = max_rho > config.delta;
    Ok(PairStatistic {
        u,
        v,
        t: if exceeded { best } else { 0.0 },
        per_frequency,
        exceeded,
        max_rho_de: max_rho,
        clamped,
        unstable: estimates.iter().any(|e| e.unstable),
    })
}
