use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::process::true_partial_coherence_matrix;
use crate::error::{Error, Result};
use crate::linalg::{companion_radius, RMatrix};

/// Largest allowed companion spectral radius of generated AR and MA parts.
pub const MAX_RADIUS: f64 = 0.7;
const RESCALE_ATTEMPTS: usize = 100;
/// Number of frequencies in `[0, π]` used to classify true partial coherences.
pub const TRUTH_GRID_LEN: usize = 64;
/// Partial coherences below this modulus count as exactly zero.
pub const ZERO_TOL: f64 = 1e-10;
/// Threshold defining the second sparsity summary.
pub const S2_LEVEL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DgpKind {
    Varma11,
    Vma5,
}

impl DgpKind {
    pub const ALL: [DgpKind; 2] = [DgpKind::Varma11, DgpKind::Vma5];

    pub fn name(self) -> &'static str {
        match self {
            DgpKind::Varma11 => "varma11",
            DgpKind::Vma5 => "vma5",
        }
    }
}

impl std::str::FromStr for DgpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DgpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown process kind '{s}'")))
    }
}

/// `X_t = Σ_j A_j X_{t−j} + ε_t + Σ_j B_j ε_{t−j}`, `ε_t ~ (0, Σ_ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarmaModel {
    pub ar: Vec<RMatrix>,
    pub ma: Vec<RMatrix>,
    pub sigma_eps: RMatrix,
    pub seed: u64,
    /// Fraction of off-diagonal pairs with a nonzero partial coherence.
    pub s1: f64,
    /// Fraction of off-diagonal pairs whose partial coherence modulus exceeds 0.2.
    pub s2: f64,
}

impl VarmaModel {
    /// Validates dimensions, stability, invertibility and `Σ_ε ≻ 0`, then
    /// records the sparsity summaries.
    pub fn new(ar: Vec<RMatrix>, ma: Vec<RMatrix>, sigma_eps: RMatrix, seed: u64) -> Result<Self> {
        let p = sigma_eps.nrows();
        if p == 0 || !sigma_eps.is_square() {
            return Err(Error::InvalidInput("innovation covariance must be square and non-empty".into()));
        }
        if ar.iter().chain(&ma).any(|c| c.nrows() != p || c.ncols() != p) {
            return Err(Error::InvalidInput("coefficient matrices must all be p x p".into()));
        }
        if sigma_eps.clone().cholesky().is_none() {
            return Err(Error::InvalidInput("innovation covariance is not positive definite".into()));
        }
        if companion_radius(&ar) >= 1.0 {
            return Err(Error::InvalidInput("AR part is not stable".into()));
        }
        if companion_radius(&negated(&ma)) >= 1.0 {
            return Err(Error::InvalidInput("MA part is not invertible".into()));
        }
        let mut model = Self {
            ar,
            ma,
            sigma_eps,
            seed,
            s1: 0.0,
            s2: 0.0,
        };
        if p >= 2 {
            let (s1, s2) = sparsity_summary(&model)?;
            model.s1 = s1;
            model.s2 = s2;
        }
        Ok(model)
    }

    pub fn p(&self) -> usize {
        self.sigma_eps.nrows()
    }

    pub fn ar_radius(&self) -> f64 {
        companion_radius(&self.ar)
    }

    pub fn ma_radius(&self) -> f64 {
        companion_radius(&negated(&self.ma))
    }
}

fn negated(cs: &[RMatrix]) -> Vec<RMatrix> {
    cs.iter().map(|c| -c).collect()
}

/// `max_ω |ρ_{u,v}(ω)|` over `TRUTH_GRID_LEN` points of `[0, π]`, one entry
/// per pair `u < v` in lexicographic order.
pub fn max_partial_coherence(model: &VarmaModel) -> Result<Vec<((usize, usize), f64)>> {
    let p = model.p();
    let mut best = vec![0.0_f64; p * p];
    for k in 0..TRUTH_GRID_LEN {
        let omega = PI * k as f64 / (TRUTH_GRID_LEN - 1) as f64;
        let rho = true_partial_coherence_matrix(model, omega)?;
        for (slot, z) in best.iter_mut().zip(rho.iter()) {
            *slot = slot.max(z.norm());
        }
    }
    Ok((0..p)
        .flat_map(|u| (u + 1..p).map(move |v| (u, v)))
        .map(|(u, v)| ((u, v), best[u + v * p]))
        .collect())
}

fn sparsity_summary(model: &VarmaModel) -> Result<(f64, f64)> {
    let maxima = max_partial_coherence(model)?;
    let q = maxima.len() as f64;
    let s1 = maxima.iter().filter(|(_, r)| *r > ZERO_TOL).count() as f64 / q;
    let s2 = maxima.iter().filter(|(_, r)| *r > S2_LEVEL).count() as f64 / q;
    Ok((s1, s2))
}

fn check_generation(p: usize, density: f64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidInput("process generation needs p >= 2".into()));
    }
    if !(0.0..=0.2).contains(&density) {
        return Err(Error::InvalidInput(format!("density must lie in [0, 0.2], got {density}")));
    }
    Ok(())
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let x = rng.random_range(lo..hi);
    if rng.random::<bool>() {
        x
    } else {
        -x
    }
}

/// Scales `cs` by 0.95 until the companion radius of `sign·cs` is at most
/// `MAX_RADIUS`.
fn rescale(mut cs: Vec<RMatrix>, sign: f64) -> Result<Vec<RMatrix>> {
    for _ in 0..RESCALE_ATTEMPTS {
        let signed: Vec<RMatrix> = cs.iter().map(|c| c * sign).collect();
        if companion_radius(&signed) <= MAX_RADIUS {
            return Ok(cs);
        }
        for c in cs.iter_mut() {
            *c *= 0.95;
        }
    }
    Err(Error::GenerationFailure(format!(
        "companion radius still above {MAX_RADIUS} after {RESCALE_ATTEMPTS} rescalings"
    )))
}

/// Sparse VAR(1) coefficient with diagonal `Σ_ε`. With a diagonal MA part the
/// inverse spectral density is `2π A(ω)^H D(ω) A(ω)` with `D` diagonal, so its
/// support is that of `A₁ + A₁ᵀ + A₁ᵀA₁`; off-diagonal entries are added
/// greedily until this support has the requested size.
fn sparse_ar1(p: usize, density: f64, rng: &mut ChaCha8Rng) -> RMatrix {
    let q = p * (p - 1) / 2;
    let target = (density * q as f64).round() as usize;
    let mut a = RMatrix::zeros(p, p);
    for i in 0..p {
        a[(i, i)] = signed(rng, 0.2, 0.5);
    }
    let mut candidates: Vec<(usize, usize)> =
        (0..p).flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    candidates.shuffle(rng);

    let key = |i: usize, j: usize| (i.min(j), i.max(j));
    let mut support: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); p];
    for (i, j) in candidates {
        if support.len() == target {
            break;
        }
        let mut added: BTreeSet<(usize, usize)> = BTreeSet::new();
        added.insert(key(i, j));
        for &k in &rows[i] {
            added.insert(key(j, k));
        }
        let new_len = support.union(&added).count();
        if new_len.abs_diff(target) < support.len().abs_diff(target) {
            support.extend(added);
            rows[i].push(j);
            a[(i, j)] = signed(rng, 0.3, 0.5);
        }
    }
    a
}

fn diagonal_sigma(p: usize, rng: &mut ChaCha8Rng) -> RMatrix {
    RMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |_, _| rng.random_range(0.5..2.0)))
}

/// Sparse stable VARMA(1,1) (`Varma11`) or block-diagonal VMA(5) (`Vma5`)
/// with roughly `density` of the off-diagonal partial coherences nonzero.
pub fn generate_sparse_varma(p: usize, kind: DgpKind, density: f64, seed: u64) -> Result<VarmaModel> {
    check_generation(p, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        DgpKind::Varma11 => {
            let a = rescale(vec![sparse_ar1(p, density, &mut rng)], 1.0)?;
            let b = RMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |_, _| rng.random_range(-0.4..0.4)));
            let sigma = diagonal_sigma(p, &mut rng);
            VarmaModel::new(a, vec![b], sigma, seed)
        }
        DgpKind::Vma5 => {
            let block = 1 + (density * (p - 1) as f64).round() as usize;
            let mut order: Vec<usize> = (0..p).collect();
            order.shuffle(&mut rng);
            let groups: Vec<&[usize]> = order.chunks(block).collect();
            let ma: Vec<RMatrix> = (1..=5)
                .map(|lag| {
                    let mut b = RMatrix::zeros(p, p);
                    for g in &groups {
                        for &i in g.iter() {
                            for &j in g.iter() {
                                let scale = if i == j { 0.5 } else { 0.4 } / lag as f64;
                                b[(i, j)] = signed(&mut rng, 0.3 * scale, scale);
                            }
                        }
                    }
                    b
                })
                .collect();
            let ma = rescale(ma, -1.0)?;
            let sigma = diagonal_sigma(p, &mut rng);
            VarmaModel::new(Vec::new(), ma, sigma, seed)
        }
    }
}

/// Sparse stable VAR(1) built like the AR part of `Varma11`, without MA terms.
pub fn sparse_var1(p: usize, density: f64, seed: u64) -> Result<VarmaModel> {
    check_generation(p, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rescale(vec![sparse_ar1(p, density, &mut rng)], 1.0)?;
    let sigma = diagonal_sigma(p, &mut rng);
    VarmaModel::new(a, Vec::new(), sigma, seed)
}
