use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::MultivariateSeries;
use crate::linalg::{cis, CMatrix, CVector};

pub fn fourier_frequency(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// `Z_n(ω) = (2πn)^{−1/2} Σ_{t=1}^{n} X_t e^{−iωt}` by direct summation.
pub fn dft(series: &MultivariateSeries, omega: f64) -> CVector {
    let n = series.n();
    let omega = omega.rem_euclid(2.0 * PI);
    let phases: Vec<Complex64> = (1..=n).map(|t| cis(-omega * t as f64)).collect();
    let norm = 1.0 / (2.0 * PI * n as f64).sqrt();
    CVector::from_iterator(
        series.p(),
        series.values().column_iter().map(|col| {
            col.iter()
                .zip(&phases)
                .map(|(&x, &ph)| ph * x)
                .sum::<Complex64>()
                * norm
        }),
    )
}

/// `Z_n(ω_k)` at all Fourier frequencies `ω_k = 2πk/n`, computed by FFT.
#[derive(Debug, Clone)]
pub struct DftTable {
    /// Row `k` holds `Z_n(ω_k)^T`, `k = 0..n`; row 0 is the same as `k = n`.
    values: CMatrix,
}

impl DftTable {
    pub fn new(series: &MultivariateSeries) -> Self {
        let n = series.n();
        let p = series.p();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let norm = 1.0 / (2.0 * PI * n as f64).sqrt();
        // The FFT sums over s = 0..n−1 with x_{s+1}; shifting to t = 1..n
        // multiplies bin k by e^{−iω_k}.
        let shift: Vec<Complex64> = (0..n).map(|k| cis(-fourier_frequency(k, n)) * norm).collect();
        let mut values = CMatrix::zeros(n, p);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, col) in series.values().column_iter().enumerate() {
            for (b, &x) in buf.iter_mut().zip(col.iter()) {
                *b = Complex64::new(x, 0.0);
            }
            fft.process(&mut buf);
            for k in 0..n {
                values[(k, j)] = buf[k] * shift[k];
            }
        }
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn at(&self, k: usize) -> CVector {
        self.values.row(k % self.n()).transpose()
    }
}
