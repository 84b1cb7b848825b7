use serde::Serialize;

use super::estimate::sample_autocov;
use super::kernel::Kernel;
use super::MultivariateSeries;
use crate::error::{Error, Result};

/// Tuning constants of the automatic truncation-lag rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthRule {
    /// Number of consecutive lags that must look uncorrelated.
    pub k_n: usize,
    pub c_thres: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self { k_n: 5, c_thres: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthChoice {
    /// Selected truncation lag `M`.
    pub m: usize,
    /// First lag after which the autocorrelations look negligible; `None`
    /// when no such lag exists below `n/4`.
    pub m_hat: Option<usize>,
    /// `true` when `M` was clamped to `n/4` because no cut-off was found.
    pub clamped: bool,
}

/// Size of the normalised lag-`h` autocorrelation matrix
/// `‖D^{-1/2} Γ̂(h) D^{-1/2}‖_F / p` (root mean square over entries).
pub fn autocorrelation_magnitude(series: &MultivariateSeries, h: usize) -> Result<f64> {
    let g0 = sample_autocov(series, 0)?;
    let scale: Vec<f64> = g0.diagonal().iter().map(|d| 1.0 / d.sqrt()).collect();
    magnitude(series, h, &scale)
}

fn magnitude(series: &MultivariateSeries, h: usize, inv_sd: &[f64]) -> Result<f64> {
    let g = sample_autocov(series, h as isize)?;
    let p = series.p();
    let mut ss = 0.0;
    for a in 0..p {
        for b in 0..p {
            ss += (g[(a, b)] * inv_sd[a] * inv_sd[b]).powi(2);
        }
    }
    Ok(ss.sqrt() / p as f64)
}

/// Adaptive truncation lag: find the smallest `m̂ ≥ 1` such that the
/// autocorrelation magnitude stays below `c_thres·√(log₁₀ n / n)` for all
/// lags in `[m̂, m̂ + k_n]`, take `2m̂`, apply the kernel's equivalent
/// bandwidth factor and clamp to `[4, n/4]`.
pub fn bandwidth_select(series: &MultivariateSeries, kernel: &Kernel, rule: BandwidthRule) -> Result<BandwidthChoice> {
    let n = series.n();
    if n < 20 {
        return Err(Error::InvalidInput(format!(
            "automatic bandwidth selection needs n >= 20, got {n}"
        )));
    }
    series.require_nondegenerate()?;
    let upper = n / 4;
    let threshold = rule.c_thres * ((n as f64).log10() / n as f64).sqrt();
    let g0 = sample_autocov(series, 0)?;
    let inv_sd: Vec<f64> = g0.diagonal().iter().map(|d| 1.0 / d.sqrt()).collect();

    // Length of the current run of consecutive lags below the threshold.
    let mut run = 0usize;
    let mut h = 1usize;
    let mut m_hat = None;
    while h < n && h < upper + rule.k_n + 1 {
        if magnitude(series, h, &inv_sd)? < threshold {
            run += 1;
            if run == rule.k_n + 1 {
                m_hat = Some(h - rule.k_n);
                break;
            }
        } else {
            run = 0;
        }
        h += 1;
    }
    let m_hat = m_hat.filter(|&m| m < upper);
    Ok(match m_hat {
        Some(mh) => {
            let raw = (2.0 * mh as f64 * kernel.jenkins_factor()).ceil() as usize;
            BandwidthChoice {
                m: raw.clamp(4, upper.max(4)),
                m_hat: Some(mh),
                clamped: false,
            }
        }
        None => {
            log::warn!("no autocorrelation cut-off below n/4; using M = {upper}");
            BandwidthChoice {
                m: upper.max(4),
                m_hat: None,
                clamped: true,
            }
        }
    })
}
