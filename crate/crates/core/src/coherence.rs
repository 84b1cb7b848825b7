//! Coherence, plug-in partial coherence and the de-biased regression
//! estimators of the complex partial coherence.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inverse::InverseEstimate;
use crate::linalg::{max_abs, CMatrix, CVector};
use crate::prewhiten::{recolor_spectrum, VarModel};
use crate::spectral::{weighted_periodogram_sum, DftTable, Kernel, SpectralField};

/// Relative size below which the de-biasing denominator is treated as zero.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

/// `s_{u,v}(ω) = f_{u,v}/√(f_{u,u} f_{v,v})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherencePair {
    pub u: usize,
    pub v: usize,
    pub omega: f64,
    pub s_hat: Complex64,
    pub magnitude: f64,
}

pub fn coherence_at(f: &CMatrix, u: usize, v: usize, omega: f64) -> Result<CoherencePair> {
    check_pair_index(f.nrows(), u, v, true)?;
    let (fuu, fvv) = (f[(u, u)].re, f[(v, v)].re);
    if !(fuu > 0.0 && fvv > 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "non-positive diagonal entry at omega = {omega} for pair ({u}, {v})"
        )));
    }
    let s_hat = if u == v {
        Complex64::new(1.0, 0.0)
    } else {
        f[(u, v)] / (fuu * fvv).sqrt()
    };
    Ok(CoherencePair {
        u,
        v,
        omega,
        s_hat,
        magnitude: s_hat.norm(),
    })
}

/// Coherence from a spectral field at one of its frequencies.
pub fn coherence_hat(field: &SpectralField, u: usize, v: usize, omega: f64) -> Result<CoherencePair> {
    let f = field
        .at(omega)
        .ok_or_else(|| Error::InvalidInput(format!("frequency {omega} is not in the field")))?;
    coherence_at(f, u, v, omega)
}

fn check_pair_index(p: usize, u: usize, v: usize, allow_equal: bool) -> Result<()> {
    if u >= p || v >= p {
        return Err(Error::InvalidInput(format!("pair ({u}, {v}) out of range for p = {p}")));
    }
    if !allow_equal && u == v {
        return Err(Error::InvalidInput(format!("pair ({u}, {u}) is on the diagonal")));
    }
    Ok(())
}

fn positive_diagonal(theta: &CMatrix, u: usize, v: usize) -> Result<(f64, f64)> {
    let (tu, tv) = (theta[(u, u)].re, theta[(v, v)].re);
    if !(tu > 0.0 && tv > 0.0) {
        return Err(Error::DegenerateInverse(format!(
            "non-positive diagonal of the inverse estimate at ({u}, {v})"
        )));
    }
    Ok((tu, tv))
}

/// `ρ_{u,v} = −Θ_{u,v}/√(Θ_{u,u} Θ_{v,v})` for `Θ` an estimate of `f^{-1}`.
pub fn rho_from_inverse(theta: &CMatrix, u: usize, v: usize) -> Result<Complex64> {
    check_pair_index(theta.nrows(), u, v, false)?;
    let (tu, tv) = positive_diagonal(theta, u, v)?;
    Ok(-theta[(u, v)] / (tu * tv).sqrt())
}

pub fn rho_plugin(f_inv: &InverseEstimate, u: usize, v: usize) -> Result<Complex64> {
    rho_from_inverse(&f_inv.matrix, u, v)
}

/// `β̂_v = −Θ_{−v,v}/Θ_{v,v}` and `γ̂_{−v,ũ}` with entries
/// `Θ_{v,v}Θ_{j,u} − Θ_{v,u}Θ_{j,v}`, both indexed over `{0..p} \ {v}`.
pub fn beta_gamma_hat(f_inv: &InverseEstimate, u: usize, v: usize) -> Result<(CVector, CVector)> {
    let theta = &f_inv.matrix;
    check_pair_index(theta.nrows(), u, v, false)?;
    let (_, tv) = positive_diagonal(theta, u, v)?;
    let others: Vec<usize> = (0..theta.nrows()).filter(|&j| j != v).collect();
    let beta = CVector::from_iterator(others.len(), others.iter().map(|&j| -theta[(j, v)] / tv));
    let gamma = CVector::from_iterator(
        others.len(),
        others.iter().map(|&j| tv * theta[(j, u)] - theta[(v, u)] * theta[(j, v)]),
    );
    Ok((beta, gamma))
}

/// `β̂^{(de)}_{v,ũ}` together with the parts of the correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaDebiased {
    pub value: Complex64,
    pub plugin: Complex64,
    pub numerator: Complex64,
    pub denominator: Complex64,
    /// The denominator was negligible and the plug-in value was used.
    pub unstable: bool,
}

/// De-biased estimates for one ordered pair at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebiasedEstimate {
    pub u: usize,
    pub v: usize,
    pub omega: f64,
    pub rho_de: Complex64,
    pub rho_plugin: Complex64,
    /// `β̂^{(de)}_{v,ũ}`: coefficient of `u` when regressing `v` on the rest.
    pub beta_de_vu: Complex64,
    /// `β̂^{(de)}_{u,ṽ}`.
    pub beta_de_uv: Complex64,
    pub denominators: [Complex64; 2],
    pub unstable: bool,
}

/// Per-frequency state shared by all pairs: the inverse estimate and the
/// kernel-weighted outer-product sum `A = Σ_k κ_M(ω − ω_k) Z(ω_k)Z(ω_k)^H`.
///
/// The `M/n` prefactor cancels between numerator and denominator and is
/// left out.
#[derive(Debug, Clone)]
pub struct DebiasContext {
    pub omega: f64,
    pub theta: CMatrix,
    pub accumulator: CMatrix,
}

/// `A(ω)` from a DFT table, recolored with `Φ(ω)^{-1}·A·Φ(ω)^{-H}` when the
/// table belongs to a prewhitened series.
pub fn debias_accumulator(
    table: &DftTable,
    kernel: &Kernel,
    m: usize,
    omega: f64,
    prewhiten: Option<&VarModel>,
) -> Result<CMatrix> {
    let sum = weighted_periodogram_sum(table, kernel, m, omega)?;
    match prewhiten {
        Some(model) => recolor_spectrum(model, &sum, omega),
        None => Ok(sum),
    }
}

impl DebiasContext {
    pub fn new(omega: f64, theta: CMatrix, accumulator: CMatrix) -> Result<Self> {
        if theta.nrows() != accumulator.nrows() || !theta.is_square() || !accumulator.is_square() {
            return Err(Error::InvalidInput("inverse estimate and accumulator sizes differ".into()));
        }
        Ok(Self {
            omega,
            theta,
            accumulator,
        })
    }

    pub fn p(&self) -> usize {
        self.theta.nrows()
    }

    /// `β̂^{(de)}_{v,ũ} = β̂_{v,ũ} + aᴴ A Iγ / (e_uᵀ A Iγ)` with
    /// `a = e_v − I_{p,−v} β̂_v` and `Iγ` the zero-padded `γ̂`.
    pub fn beta_debiased(&self, u: usize, v: usize) -> Result<BetaDebiased> {
        let theta = &self.theta;
        check_pair_index(theta.nrows(), u, v, false)?;
        let (_, tv) = positive_diagonal(theta, u, v)?;
        let p = theta.nrows();
        let a = CVector::from_fn(p, |j, _| theta[(j, v)] / tv);
        let tvu = theta[(v, u)];
        let g = CVector::from_fn(p, |j, _| {
            if j == v {
                Complex64::new(0.0, 0.0)
            } else {
                tv * theta[(j, u)] - tvu * theta[(j, v)]
            }
        });
        let ag = &self.accumulator * &g;
        let numerator = a.dotc(&ag);
        let denominator = ag[u];
        let plugin = -theta[(u, v)] / tv;
        let scale = max_abs(&self.accumulator) * g.iter().map(|z| z.norm()).sum::<f64>();
        let unstable = !(denominator.norm() > DENOMINATOR_GUARD * scale);
        let value = if unstable {
            plugin
        } else {
            plugin + numerator / denominator
        };
        Ok(BetaDebiased {
            value,
            plugin,
            numerator,
            denominator,
            unstable,
        })
    }

    pub fn estimate(&self, u: usize, v: usize) -> Result<DebiasedEstimate> {
        let b_vu = self.beta_debiased(u, v)?;
        let b_uv = self.beta_debiased(v, u)?;
        let rho_de = rho_debiased(b_vu.value, b_uv.value, &self.theta, u, v)?;
        Ok(DebiasedEstimate {
            u,
            v,
            omega: self.omega,
            rho_de,
            rho_plugin: rho_from_inverse(&self.theta, u, v)?,
            beta_de_vu: b_vu.value,
            beta_de_uv: b_uv.value,
            denominators: [b_vu.denominator, b_uv.denominator],
            unstable: b_vu.unstable || b_uv.unstable,
        })
    }
}

/// `β̂^{(de)}_{v,ũ}` straight from a DFT table.
#[allow(clippy::too_many_arguments)]
pub fn beta_debiased(
    table: &DftTable,
    f_inv: &InverseEstimate,
    kernel: &Kernel,
    m: usize,
    u: usize,
    v: usize,
    omega: f64,
    prewhiten: Option<&VarModel>,
) -> Result<BetaDebiased> {
    let acc = debias_accumulator(table, kernel, m, omega, prewhiten)?;
    DebiasContext::new(omega, f_inv.matrix.clone(), acc)?.beta_debiased(u, v)
}

/// `ρ̂^{(de)}_{u,v} = ½(β̂^{(de)}_{v,ũ}√(Θ_vv/Θ_uu) + conj(β̂^{(de)}_{u,ṽ})√(Θ_uu/Θ_vv))`.
///
/// With plug-in coefficients both terms equal `−Θ_uv/√(Θ_uu Θ_vv)`, and
/// swapping `(u, v)` conjugates the result exactly.
pub fn rho_debiased(
    beta_de_vu: Complex64,
    beta_de_uv: Complex64,
    theta: &CMatrix,
    u: usize,
    v: usize,
) -> Result<Complex64> {
    check_pair_index(theta.nrows(), u, v, false)?;
    let (tu, tv) = positive_diagonal(theta, u, v)?;
    Ok((beta_de_vu * (tv / tu).sqrt() + beta_de_uv.conj() * (tu / tv).sqrt()) * 0.5)
}
