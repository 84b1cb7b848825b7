use std::collections::BTreeSet;

use crate::coherence::DebiasedEstimate;
use crate::error::{Error, Result};
use crate::exec::Exec;

use super::statistic::{pair_statistic, PairStatistic, TestConfig};

/// `G_d(t) = 1 − (1 − e^{−t/2})^d`, the upper tail of the maximum of `d`
/// independent `χ²₂` variables.
pub fn g_tail(d: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    -(d as f64 * (-(-t / 2.0).exp()).ln_1p()).exp_m1()
}

/// Upper `α` quantile of `G_d`: `−2 log(1 − (1 − α)^{1/d})`.
pub fn single_test_quantile(d: usize, alpha: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidInput("grid size d must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(quantile_unchecked(d, alpha))
}

fn quantile_unchecked(d: usize, alpha: f64) -> f64 {
    let root = ((-alpha).ln_1p() / d as f64).exp_m1(); // (1−α)^{1/d} − 1
    -2.0 * (-root).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Reject,
    Retain,
}

/// Rejects iff `T ≥ G_d^{-1}(α)`.
pub fn single_test(stat: &PairStatistic, d: usize, alpha: f64) -> Result<Decision> {
    if stat.per_frequency.len() != d {
        return Err(Error::InvalidInput(format!(
            "statistic built on {} frequencies, test asked for d = {d}",
            stat.per_frequency.len()
        )));
    }
    let q = single_test_quantile(d, alpha)?;
    Ok(if stat.t >= q { Decision::Reject } else { Decision::Retain })
}

/// Outcome of the threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdrThreshold {
    pub t_hat: f64,
    /// The criterion held somewhere in `[0, b]`, `b = 2 log(d q)`.
    pub feasible: bool,
    pub upper: f64,
}

impl FdrThreshold {
    /// Whether a statistic is rejected under this threshold. When the
    /// search failed and `b = 0` nothing is rejected.
    pub fn rejects(&self, t: f64) -> bool {
        if !self.feasible && self.upper <= 0.0 {
            return false;
        }
        t >= self.t_hat
    }
}

/// Exact search for
/// `t̂ = inf{0 ≤ t ≤ b : N(t) / max(1, #{T ≥ t}) ≤ α}` where `N` is
/// continuous and decreasing with pseudo-inverse `inv`.
fn threshold_search(ts: &[f64], alpha: f64, upper: f64, inv: impl Fn(f64) -> f64) -> FdrThreshold {
    let mut distinct: Vec<f64> = ts.iter().map(|t| t.max(0.0)).collect();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let count_at_least = |t: f64| ts.iter().filter(|&&x| x.max(0.0) >= t).count();

    let mut best: Option<f64> = None;
    // interval j is (distinct[j], distinct[j-1]] with distinct[-1] = ∞; the last one is [0, distinct[r-1]]
    for j in 0..=distinct.len() {
        let hi = if j == 0 { f64::INFINITY } else { distinct[j - 1] };
        let lo = distinct.get(j).copied().unwrap_or(0.0);
        let count = if j == 0 { 0 } else { count_at_least(hi) };
        let need = inv(alpha * count.max(1) as f64);
        let cand = lo.max(need);
        if cand <= hi && cand <= upper {
            best = Some(best.map_or(cand, |b: f64| b.min(cand)));
        }
    }
    match best {
        Some(t_hat) => FdrThreshold {
            t_hat,
            feasible: true,
            upper,
        },
        None => FdrThreshold {
            t_hat: upper,
            feasible: false,
            upper,
        },
    }
}

/// `t̂ = inf{0 ≤ t ≤ 2 log(dq) : G_d(t)·q / max(1, #{T ≥ t}) ≤ α}`.
pub fn fdr_threshold(ts: &[f64], d: usize, alpha: f64) -> Result<FdrThreshold> {
    let q = ts.len();
    if q == 0 || d == 0 {
        return Err(Error::InvalidInput("FDR threshold needs q >= 1 and d >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let upper = 2.0 * ((d * q) as f64).ln();
    Ok(threshold_search(ts, alpha, upper, |level| {
        let y = level / q as f64;
        if y >= 1.0 {
            0.0
        } else {
            quantile_unchecked(d, y)
        }
    }))
}

/// Threshold with pair-specific grid sizes: the numerator is
/// `Σ_{(u,v)} G_{d_{u,v}}(t)`; `b = 2 log(max d · q)`.
pub fn fdr_threshold_multiband(ts: &[f64], ds: &[usize], alpha: f64) -> Result<FdrThreshold> {
    let q = ts.len();
    if q == 0 || ds.len() != q || ds.contains(&0) {
        return Err(Error::InvalidInput("one positive grid size per statistic is required".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let d_max = *ds.iter().max().unwrap_or(&1);
    let upper = 2.0 * ((d_max * q) as f64).ln();
    let numerator = |t: f64| ds.iter().map(|&d| g_tail(d, t)).sum::<f64>();
    Ok(threshold_search(ts, alpha, upper, |level| invert_decreasing(&numerator, level)))
}

/// Smallest `t ≥ 0` with `f(t) ≤ level` for continuous decreasing `f`.
fn invert_decreasing(f: &impl Fn(f64) -> f64, level: f64) -> f64 {
    if f(0.0) <= level {
        return 0.0;
    }
    let mut hi = 1.0;
    while f(hi) > level {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Unordered, off-diagonal pairs `(u, v)` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(usize, usize)>,
}

impl PairSet {
    pub fn new(pairs: &[(usize, usize)], p: usize) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in pairs {
            if u == v {
                return Err(Error::InvalidInput(format!("pair ({u}, {v}) is on the diagonal")));
            }
            if u >= p || v >= p {
                return Err(Error::InvalidInput(format!("pair ({u}, {v}) out of range for p = {p}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        if set.is_empty() {
            return Err(Error::InvalidInput("the pair set is empty".into()));
        }
        Ok(Self {
            pairs: set.into_iter().collect(),
        })
    }

    /// All `p(p−1)/2` pairs.
    pub fn all(p: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..p).flat_map(|u| (u + 1..p).map(move |v| (u, v))).collect();
        Self::new(&pairs, p)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTestResult {
    pub alpha: f64,
    pub delta: f64,
    pub threshold: FdrThreshold,
    pub rejected: Vec<(usize, usize)>,
    /// One per tested pair, sorted by pair.
    pub statistics: Vec<PairStatistic>,
    pub q: usize,
    pub d: usize,
}

impl MultiTestResult {
    pub fn t_hat(&self) -> f64 {
        self.threshold.t_hat
    }
}

/// FDR-controlled selection over pairs from their per-frequency estimates
/// (one list per pair, all on the same grid).
pub fn multiple_test(estimates: &[Vec<DebiasedEstimate>], config: &TestConfig, exec: Exec) -> Result<MultiTestResult> {
    config.validate()?;
    let d = estimates.first().map_or(0, |e| e.len());
    if d == 0 || estimates.iter().any(|e| e.len() != d) {
        return Err(Error::InvalidInput("every pair needs estimates on the same non-empty grid".into()));
    }
    let p = estimates.iter().flatten().map(|e| e.u.max(e.v) + 1).max().unwrap_or(0);
    let keys: Vec<(usize, usize)> = estimates.iter().map(|e| (e[0].u, e[0].v)).collect();
    let pairs = PairSet::new(&keys, p)?;
    if pairs.len() != keys.len() {
        return Err(Error::InvalidInput("a pair appears more than once".into()));
    }
    let mut statistics: Vec<PairStatistic> = exec
        .map(estimates, |e| pair_statistic(e, config))
        .into_iter()
        .collect::<Result<_>>()?;
    statistics.sort_by_key(|s| (s.u.min(s.v), s.u.max(s.v)));
    let ts: Vec<f64> = statistics.iter().map(|s| s.t).collect();
    let threshold = fdr_threshold(&ts, d, config.alpha)?;
    let rejected = statistics
        .iter()
        .filter(|s| threshold.rejects(s.t))
        .map(|s| (s.u.min(s.v), s.u.max(s.v)))
        .collect();
    Ok(MultiTestResult {
        alpha: config.alpha,
        delta: config.delta,
        threshold,
        rejected,
        q: statistics.len(),
        statistics,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_values() {
        assert!((single_test_quantile(1, 0.05).unwrap() - 5.991464547107979).abs() < 1e-12);
        let t = single_test_quantile(10, 0.05).unwrap();
        assert!((t - 10.5513).abs() < 1e-3);
        assert!((g_tail(10, t) - 0.05).abs() < 1e-12);
        assert!(single_test_quantile(3, 0.0).is_err());
        assert!(single_test_quantile(3, 1.0).is_err());
        assert!(single_test_quantile(0, 0.5).is_err());
    }

    #[test]
    fn single_pair_no_room_below_bound() {
        // q = d = 1 leaves b = 0, so nothing can be rejected
        let th = fdr_threshold(&[10.0], 1, 0.1).unwrap();
        assert!(!th.feasible);
        assert_eq!(th.t_hat, 0.0);
        assert!(!th.rejects(10.0));
        let th = fdr_threshold(&[0.0], 1, 0.05).unwrap();
        assert!(!th.rejects(0.0));
    }

    #[test]
    fn threshold_satisfies_criterion() {
        let mut ts = vec![25.0, 18.0, 17.5, 3.0, 1.0, 0.0, 0.0, 12.0, 0.5, 2.0];
        ts.extend((0..12).map(|i| 14.0 + i as f64));
        ts.extend((0..8).map(|i| 0.7 * i as f64));
        let d = 4;
        let th = fdr_threshold(&ts, d, 0.1).unwrap();
        assert!(th.feasible);
        let count = ts.iter().filter(|&&t| t >= th.t_hat).count();
        let q = ts.len() as f64;
        assert!(g_tail(d, th.t_hat) * q / count.max(1) as f64 <= 0.1 * (1.0 + 1e-9));
        // nothing smaller on a fine scan is feasible
        let mut t = 0.0;
        while t < th.t_hat - 1e-6 {
            let c = ts.iter().filter(|&&x| x >= t).count();
            assert!(g_tail(d, t) * q / c.max(1) as f64 > 0.1);
            t += 1e-3;
        }
        assert!(th.t_hat <= 2.0 * (d as f64 * q).ln());
    }

    #[test]
    fn multiband_reduces_to_common_d() {
        let ts = [25.0, 18.0, 3.0, 1.0, 0.0, 12.0];
        let a = fdr_threshold(&ts, 3, 0.1).unwrap();
        let b = fdr_threshold_multiband(&ts, &[3; 6], 0.1).unwrap();
        assert!((a.t_hat - b.t_hat).abs() < 1e-9);
        assert_eq!(a.feasible, b.feasible);
    }

    #[test]
    fn pair_set_rules() {
        assert!(PairSet::new(&[(1, 1)], 3).is_err());
        assert!(PairSet::new(&[(0, 3)], 3).is_err());
        let s = PairSet::new(&[(2, 0), (0, 1), (0, 2)], 3).unwrap();
        assert_eq!(s.pairs(), &[(0, 1), (0, 2)]);
        assert_eq!(PairSet::all(4).unwrap().len(), 6);
    }
}
