use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::Kernel;

const BAND_TOL: f64 = 1e-12;

/// `ω'_l = π l N / M` restricted to a band inside `(0, π)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub m: usize,
    pub spacing: usize,
    pub bands: Vec<(f64, f64)>,
    /// Grid indices `l`, increasing.
    pub indices: Vec<usize>,
    pub frequencies: Vec<f64>,
}

impl FrequencyGrid {
    pub fn d(&self) -> usize {
        self.frequencies.len()
    }
}

/// Checks `0 ≤ lo < hi ≤ π` for every band.
pub fn validate_bands(bands: &[(f64, f64)]) -> Result<()> {
    if bands.is_empty() {
        return Err(Error::InvalidInput("at least one frequency band is required".into()));
    }
    for &(lo, hi) in bands {
        if !(lo.is_finite() && hi.is_finite()) || lo < -BAND_TOL || hi > PI + BAND_TOL || !(lo < hi) {
            return Err(Error::InvalidInput(format!(
                "band [{lo}, {hi}] must satisfy 0 <= lo < hi <= pi"
            )));
        }
    }
    Ok(())
}

pub fn build_grid(m: usize, kernel: &Kernel, bands: &[(f64, f64)]) -> Result<FrequencyGrid> {
    if m < 4 {
        return Err(Error::InvalidBandwidth {
            m,
            reason: "the testing grid needs M >= 4".into(),
        });
    }
    validate_bands(bands)?;
    let spacing = kernel.grid_spacing(m);
    let step = PI * spacing as f64 / m as f64;
    let mut indices = Vec::new();
    let mut frequencies = Vec::new();
    let mut l = 1;
    loop {
        let w = step * l as f64;
        if w >= PI - BAND_TOL {
            break;
        }
        if bands.iter().any(|&(lo, hi)| w >= lo - BAND_TOL && w <= hi + BAND_TOL) {
            indices.push(l);
            frequencies.push(w);
        }
        l += 1;
    }
    if frequencies.is_empty() {
        return Err(Error::EmptyGrid(format!(
            "no grid point pi*l*{spacing}/{m} falls inside the requested band"
        )));
    }
    Ok(FrequencyGrid {
        m,
        spacing,
        bands: bands.to_vec(),
        indices,
        frequencies,
    })
}
