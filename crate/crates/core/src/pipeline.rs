//! End-to-end analysis: prewhitening, truncation lag, grid, inverse spectral
//! estimation, de-biased partial coherence and FDR-controlled graph selection.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::coherence::{debias_accumulator, DebiasContext, DebiasedEstimate};
use crate::error::Error;
use crate::exec::Exec;
use crate::inverse::{select_lambda_bic, solve_inverse, threshold_inverse, InverseEstimate, InverseMethod};
use crate::prewhiten::{apply_filter, default_order, fit_sparse_var, recolor_spectrum, VarModel};
use crate::spectral::{
    bandwidth_select, center_series, BandwidthChoice, BandwidthRule, DftTable, FieldKind, Kernel, LagWindow,
    MultivariateSeries, SpectralField,
};
use crate::testing::{build_grid, multiple_test, FrequencyGrid, MultiTestResult, PairSet, TestConfig, VhatSource};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSpec {
    Auto(BandwidthRule),
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Bic,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub kernel: Kernel,
    pub bandwidth: BandwidthSpec,
    pub prewhiten: bool,
    /// VAR order; `None` uses `⌈log₁₀ n⌉`.
    pub order: Option<usize>,
    pub inverse: InverseMethod,
    pub lambda: LambdaSpec,
    /// Sub-intervals of `[0, π]` in radians.
    pub bands: Vec<(f64, f64)>,
    pub delta: f64,
    pub alpha: f64,
    /// Pairs to test (0-based); `None` tests all pairs.
    pub pairs: Option<Vec<(usize, usize)>>,
    pub vhat: VhatSource,
    pub exec: Exec,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            kernel: Kernel::bartlett_modified(),
            bandwidth: BandwidthSpec::Auto(BandwidthRule::default()),
            prewhiten: true,
            order: None,
            inverse: InverseMethod::Glasso,
            lambda: LambdaSpec::Bic,
            bands: vec![(0.0, PI)],
            delta: 0.0,
            alpha: 0.1,
            pairs: None,
            vhat: VhatSource::Plugin,
            exec: Exec::Parallel,
        }
    }
}

/// Pipeline step in which a failure occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    Prewhiten,
    Bandwidth,
    Grid,
    SpectralEstimate,
    InverseEstimate,
    Debias,
    Testing,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Prewhiten => "prewhiten",
            Stage::Bandwidth => "bandwidth",
            Stage::Grid => "grid",
            Stage::SpectralEstimate => "spectral_estimate",
            Stage::InverseEstimate => "inverse_estimate",
            Stage::Debias => "debias",
            Stage::Testing => "testing",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

fn at(stage: Stage) -> impl FnOnce(Error) -> PipelineError {
    move |source| PipelineError { stage, source }
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub n: usize,
    pub p: usize,
    /// Length of the (possibly) filtered series used from the bandwidth step on.
    pub n_filtered: usize,
    pub var_model: VarModel,
    pub bandwidth: BandwidthChoice,
    pub grid: FrequencyGrid,
    /// Recolored lag-window estimate on the grid.
    pub spectrum: SpectralField,
    /// One inverse estimate per grid frequency.
    pub inverse: Vec<InverseEstimate>,
    /// Effective sample size passed to the BIC.
    pub bic_n_eff: usize,
    /// Per pair (in `test.statistics` order), one estimate per grid frequency.
    pub estimates: Vec<Vec<DebiasedEstimate>>,
    pub config: TestConfig,
    pub test: MultiTestResult,
}

impl AnalysisResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.inverse.iter().map(|e| e.lambda).collect()
    }

    /// Edges of the thresholded inverse estimate: a pair is selected when its
    /// entry survives thresholding at `λ` at some grid frequency.
    pub fn regularizing_edges(&self) -> Vec<(usize, usize)> {
        let thresholded: Vec<InverseEstimate> = self.inverse.iter().map(|e| threshold_inverse(e, e.lambda)).collect();
        self.test
            .statistics
            .iter()
            .map(|s| (s.u.min(s.v), s.u.max(s.v)))
            .filter(|&(u, v)| thresholded.iter().any(|e| e.matrix[(u, v)].norm() > 0.0))
            .collect()
    }
}

/// Runs the full analysis on a raw (uncentered) series.
pub fn analyze(raw: &MultivariateSeries, options: &AnalysisOptions) -> Result<AnalysisResult, PipelineError> {
    let exec = options.exec;
    let series = center_series(raw.values().clone()).map_err(at(Stage::Input))?;
    series.require_nondegenerate().map_err(at(Stage::Input))?;
    let (n, p) = (series.n(), series.p());
    if p < 2 {
        return Err(at(Stage::Input)(Error::InvalidInput(
            "partial coherence needs at least two components".into(),
        )));
    }
    let pairs = match &options.pairs {
        Some(list) => PairSet::new(list, p),
        None => PairSet::all(p),
    }
    .map_err(at(Stage::Input))?;

    let var_model = if options.prewhiten {
        let order = options.order.unwrap_or_else(|| default_order(n));
        fit_sparse_var(&series, order, exec).map_err(at(Stage::Prewhiten))?
    } else {
        VarModel::identity(p)
    };
    let filtered = apply_filter(&series, &var_model).map_err(at(Stage::Prewhiten))?;
    let n_filtered = filtered.n();

    let bandwidth = match options.bandwidth {
        BandwidthSpec::Auto(rule) => {
            bandwidth_select(&filtered, &options.kernel, rule).map_err(at(Stage::Bandwidth))?
        }
        BandwidthSpec::Fixed(m) => BandwidthChoice {
            m,
            m_hat: None,
            clamped: false,
        },
    };
    let m = bandwidth.m;
    if m == 0 || 2 * m >= n_filtered {
        return Err(at(Stage::Bandwidth)(Error::InvalidBandwidth {
            m,
            reason: format!("needs 1 <= M < n/2 for n = {n_filtered}"),
        }));
    }
    let grid = build_grid(m, &options.kernel, &options.bands).map_err(at(Stage::Grid))?;
    let freqs = grid.frequencies.clone();

    let lw = LagWindow::new(&filtered, &options.kernel, m).map_err(at(Stage::SpectralEstimate))?;
    let recolored: Vec<_> = exec
        .map(&freqs, |&w| recolor_spectrum(&var_model, &lw.at(w), w))
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(at(Stage::SpectralEstimate))?;
    let spectrum =
        SpectralField::new(freqs.clone(), recolored, FieldKind::Density).map_err(at(Stage::SpectralEstimate))?;

    let bic_n_eff = ((n_filtered as f64 / m as f64).round() as usize).max(2);
    let inverse: Vec<InverseEstimate> = match options.lambda {
        LambdaSpec::Bic => select_lambda_bic(&spectrum, bic_n_eff, options.inverse, exec)
            .map_err(at(Stage::InverseEstimate))?
            .into_iter()
            .map(|s| s.estimate)
            .collect(),
        LambdaSpec::Fixed(lambda) => exec
            .map(&spectrum.matrices, |s| solve_inverse(s, lambda, options.inverse))
            .into_iter()
            .collect::<Result<_, _>>()
            .map_err(at(Stage::InverseEstimate))?,
    };

    let table = DftTable::new(&filtered);
    let whitening = (var_model.order() > 0).then_some(&var_model);
    let idx: Vec<usize> = (0..freqs.len()).collect();
    let contexts: Vec<DebiasContext> = exec
        .map(&idx, |&i| {
            let acc = debias_accumulator(&table, &options.kernel, m, freqs[i], whitening)?;
            DebiasContext::new(freqs[i], inverse[i].matrix.clone(), acc)
        })
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(at(Stage::Debias))?;
    let estimates: Vec<Vec<DebiasedEstimate>> = exec
        .map(pairs.pairs(), |&(u, v)| contexts.iter().map(|c| c.estimate(u, v)).collect::<Result<Vec<_>, _>>())
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(at(Stage::Debias))?;

    let config = TestConfig {
        delta: options.delta,
        alpha: options.alpha,
        n: n_filtered,
        m,
        c_k2: options.kernel.c_k2(),
        vhat: options.vhat,
    };
    let test = multiple_test(&estimates, &config, exec).map_err(at(Stage::Testing))?;

    Ok(AnalysisResult {
        n,
        p,
        n_filtered,
        var_model,
        bandwidth,
        grid,
        spectrum,
        inverse,
        bic_n_eff,
        estimates,
        config,
        test,
    })
}
