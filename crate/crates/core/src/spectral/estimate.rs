use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::dft::{fourier_frequency, DftTable};
use super::kernel::{fourier_re, Kernel};
use super::MultivariateSeries;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{CMatrix, RMatrix};

/// `Γ̂(u) = n^{-1} Σ_t X_{t+u} X_tᵀ` with divisor `n`.
pub fn sample_autocov(series: &MultivariateSeries, lag: isize) -> Result<RMatrix> {
    let n = series.n();
    if lag.unsigned_abs() >= n {
        return Err(Error::InvalidLag { lag, n });
    }
    let g = autocov_nonneg(series.values(), lag.unsigned_abs());
    Ok(if lag >= 0 { g } else { g.transpose() })
}

fn autocov_nonneg(x: &RMatrix, u: usize) -> RMatrix {
    let n = x.nrows();
    let lead = x.rows(u, n - u);
    let lagged = x.rows(0, n - u);
    lead.tr_mul(&lagged) / n as f64
}

/// `Γ̂(0), …, Γ̂(max_lag)`.
pub fn autocovariances(series: &MultivariateSeries, max_lag: usize) -> Result<Vec<RMatrix>> {
    if max_lag >= series.n() {
        return Err(Error::InvalidLag {
            lag: max_lag as isize,
            n: series.n(),
        });
    }
    Ok((0..=max_lag).map(|u| autocov_nonneg(series.values(), u)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Density,
    InverseDensity,
    DftVariance,
}

/// Frequency-indexed `p × p` Hermitian matrices.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub frequencies: Vec<f64>,
    pub matrices: Vec<CMatrix>,
    pub kind: FieldKind,
}

impl SpectralField {
    pub fn new(frequencies: Vec<f64>, matrices: Vec<CMatrix>, kind: FieldKind) -> Result<Self> {
        if frequencies.len() != matrices.len() {
            return Err(Error::InvalidInput("frequency and matrix counts differ".into()));
        }
        Ok(Self {
            frequencies,
            matrices,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Matrix at exactly `omega` (no interpolation).
    pub fn at(&self, omega: f64) -> Option<&CMatrix> {
        self.frequencies
            .iter()
            .position(|&w| (w - omega).abs() <= 1e-12 * (1.0 + omega.abs()))
            .map(|i| &self.matrices[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &CMatrix)> {
        self.frequencies.iter().copied().zip(self.matrices.iter())
    }
}

fn check_lag_window(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n - 1 {
        return Err(Error::InvalidBandwidth {
            m,
            reason: format!("lag-window estimate needs 1 <= M <= n - 1 = {}", n - 1),
        });
    }
    Ok(())
}

/// Precomputed autocovariances and kernel weights for repeated lag-window
/// evaluation at many frequencies.
#[derive(Debug, Clone)]
pub struct LagWindow {
    gammas: Vec<RMatrix>,
    weights: Vec<f64>,
}

impl LagWindow {
    pub fn new(series: &MultivariateSeries, kernel: &Kernel, m: usize) -> Result<Self> {
        check_lag_window(m, series.n())?;
        let max_lag = m.min(series.n() - 1);
        let weights = kernel.lag_weights(m, max_lag);
        let used = weights.iter().rposition(|&w| w != 0.0).unwrap_or(0);
        Ok(Self {
            gammas: autocovariances(series, used)?,
            weights: weights[..=used].to_vec(),
        })
    }

    /// `f̂_M(ω) = (2π)^{-1} Σ_u K(u/M) Γ̂(u) e^{−iuω}`.
    pub fn at(&self, omega: f64) -> CMatrix {
        let p = self.gammas[0].nrows();
        let g0 = &self.gammas[0];
        let mut out = CMatrix::from_fn(p, p, |a, b| Complex64::new(0.5 * (g0[(a, b)] + g0[(b, a)]), 0.0));
        for (u, (g, &w)) in self.gammas.iter().zip(&self.weights).enumerate().skip(1) {
            if w == 0.0 {
                continue;
            }
            let (s, c) = (u as f64 * omega).sin_cos();
            for a in 0..p {
                for b in 0..p {
                    // Γ(u)e^{−iuω} + Γ(u)ᵀe^{iuω}
                    out[(a, b)] += Complex64::new(w * c * (g[(a, b)] + g[(b, a)]), w * s * (g[(b, a)] - g[(a, b)]));
                }
            }
        }
        out.unscale(2.0 * PI)
    }
}

/// Lag-window spectral density estimate at each requested frequency.
pub fn lag_window_estimate(
    series: &MultivariateSeries,
    kernel: &Kernel,
    m: usize,
    frequencies: &[f64],
    exec: Exec,
) -> Result<SpectralField> {
    let lw = LagWindow::new(series, kernel, m)?;
    let matrices = exec.map(frequencies, |&w| lw.at(w));
    SpectralField::new(frequencies.to_vec(), matrices, FieldKind::Density)
}

fn check_periodogram(m: usize, n: usize) -> Result<()> {
    if m == 0 || 2 * m >= n {
        return Err(Error::InvalidBandwidth {
            m,
            reason: format!("smoothed periodogram needs 1 <= M < n/2 = {}", n as f64 / 2.0),
        });
    }
    Ok(())
}

/// `Σ_{k=1}^{n} κ_M(ω − ω_k) Z(ω_k) Z(ω_k)^H` without the `M/n` prefactor.
///
/// The smoothed periodogram and the de-biased regression share this exact
/// accumulator.
pub fn weighted_periodogram_sum(table: &DftTable, kernel: &Kernel, m: usize, omega: f64) -> Result<CMatrix> {
    let n = table.n();
    check_periodogram(m, n)?;
    let lag_weights = kernel.lag_weights(m, m.min(n - 1));
    let z = table.values();
    let mut scaled = z.map(|c| c.conj());
    for k in 0..n {
        let w = fourier_re(&lag_weights, m, omega - fourier_frequency(k, n));
        scaled.row_mut(k).scale_mut(w);
    }
    let s = z.tr_mul(&scaled);
    Ok((&s + s.adjoint()).map(|c| c * 0.5))
}

/// `f̂_M(ω) = (M/n) Σ_k κ_M(ω − ω_k) Z(ω_k) Z(ω_k)^H`.
pub fn smoothed_periodogram(series: &MultivariateSeries, kernel: &Kernel, m: usize, omega: f64) -> Result<CMatrix> {
    let table = DftTable::new(series);
    smoothed_periodogram_from_table(&table, kernel, m, omega)
}

pub fn smoothed_periodogram_from_table(table: &DftTable, kernel: &Kernel, m: usize, omega: f64) -> Result<CMatrix> {
    let s = weighted_periodogram_sum(table, kernel, m, omega)?;
    Ok(s * Complex64::new(m as f64 / table.n() as f64, 0.0))
}
