use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelKind {
    /// `K(u) = (1 − |u|)` on `[−1, 1]`; positive definite.
    BartlettModified,
    /// `K(u) = 1` on `[−1, 1]`.
    Uniform,
    UserDefined { name: String, func: KernelFn },
}

/// Lag-window kernel together with the constants the tests need.
#[derive(Clone)]
pub struct Kernel {
    kind: KernelKind,
    c_k2: f64,
    decay_order: f64,
    jenkins_factor: f64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name())
            .field("c_k2", &self.c_k2)
            .field("decay_order", &self.decay_order)
            .finish()
    }
}

impl Kernel {
    pub fn bartlett_modified() -> Self {
        Self {
            kind: KernelKind::BartlettModified,
            c_k2: 2.0 / 3.0,
            decay_order: 2.0,
            jenkins_factor: 1.5,
        }
    }

    pub fn uniform() -> Self {
        Self {
            kind: KernelKind::Uniform,
            c_k2: 2.0,
            // Fourier coefficients of the uniform kernel vanish beyond M, so
            // any order works; 16 stands in for "arbitrarily large".
            decay_order: 16.0,
            jenkins_factor: 1.0,
        }
    }

    /// A user-supplied even kernel with `K(0) = 1`, supported on `[−1, 1]`.
    /// `∫K²` is obtained by composite Simpson quadrature.
    pub fn user_defined<F>(name: &str, func: F, decay_order: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(decay_order > 0.0) {
            return Err(Error::InvalidInput("kernel decay order must be positive".into()));
        }
        if (func(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("kernel must satisfy K(0) = 1".into()));
        }
        for i in 1..=64 {
            let u = i as f64 / 64.0;
            if (func(u) - func(-u)).abs() > 1e-12 {
                return Err(Error::InvalidInput("kernel must be even".into()));
            }
        }
        let steps = 20_000;
        let h = 2.0 / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let u = -1.0 + i as f64 * h;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * func(u).powi(2);
        }
        Ok(Self {
            kind: KernelKind::UserDefined {
                name: name.to_string(),
                func: Arc::new(func),
            },
            c_k2: acc * h / 3.0,
            decay_order,
            jenkins_factor: 1.0,
        })
    }

    /// Parses `bartlett`, `bartlett_modified` or `uniform`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bartlett" | "bartlett_modified" => Ok(Self::bartlett_modified()),
            "uniform" | "truncated" => Ok(Self::uniform()),
            other => Err(Error::InvalidInput(format!("unknown kernel `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            KernelKind::BartlettModified => "bartlett_modified",
            KernelKind::Uniform => "uniform",
            KernelKind::UserDefined { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// `∫_{−1}^{1} K²(u) du`.
    pub fn c_k2(&self) -> f64 {
        self.c_k2
    }

    pub fn decay_order(&self) -> f64 {
        self.decay_order
    }

    /// Equivalent-bandwidth correction applied to the automatic truncation lag.
    pub fn jenkins_factor(&self) -> f64 {
        self.jenkins_factor
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        match &self.kind {
            KernelKind::BartlettModified => 1.0 - u.abs(),
            KernelKind::Uniform => 1.0,
            KernelKind::UserDefined { func, .. } => func(u),
        }
    }

    /// Grid spacing parameter `N = max(1, round(log(M)^{2/r}))`; the uniform
    /// kernel uses `N = 1`.
    pub fn grid_spacing(&self, m: usize) -> usize {
        if matches!(self.kind, KernelKind::Uniform) {
            return 1;
        }
        let n = (m as f64).ln().max(0.0).powf(2.0 / self.decay_order).round();
        (n as usize).max(1)
    }

    /// `K(u/M)` for `u = 0..=max_lag`.
    pub fn lag_weights(&self, m: usize, max_lag: usize) -> Vec<f64> {
        (0..=max_lag).map(|u| self.eval(u as f64 / m as f64)).collect()
    }

    /// `κ_M(ω) = M^{-1} Σ_{|u|<n} K(u/M) e^{−iuω}`.
    pub fn fourier(&self, m: usize, omega: f64, n: usize) -> Result<Complex64> {
        if m == 0 || m >= n {
            return Err(Error::InvalidBandwidth {
                m,
                reason: format!("need 1 <= M < n = {n}"),
            });
        }
        let weights = self.lag_weights(m, m.min(n - 1));
        Ok(fourier_from_weights(&weights, m, omega))
    }
}

/// `κ_M(ω)` from precomputed `K(u/M)`, `u ≥ 0`, for an even kernel.
pub(crate) fn fourier_from_weights(weights: &[f64], m: usize, omega: f64) -> Complex64 {
    Complex64::new(fourier_re(weights, m, omega), 0.0)
}

/// `κ_M` is real for even kernels: `K(u/M)e^{-iuω} + K(-u/M)e^{iuω} = 2K(u/M)cos(uω)`.
pub(crate) fn fourier_re(weights: &[f64], m: usize, omega: f64) -> f64 {
    let mut re = weights[0];
    for (u, &w) in weights.iter().enumerate().skip(1) {
        re += 2.0 * w * (u as f64 * omega).cos();
    }
    re / m as f64
}
