use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{generate_sparse_varma, max_partial_coherence, DgpKind, VarmaModel, ZERO_TOL};
use super::process::{simulate_with_rng, Innovations};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pipeline::{analyze, AnalysisOptions};

/// Pairs whose true partial coherence exceeds `δ + STRONG_MARGIN` somewhere
/// form the strong-signal set.
pub const STRONG_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// De-biased partial coherence with FDR-controlled max-type tests.
    Testing,
    /// Graphical lasso estimate thresholded at its own penalty.
    Regularizing,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Testing => "testing",
            Method::Regularizing => "regularizing",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "testing" => Ok(Method::Testing),
            "regularizing" => Ok(Method::Regularizing),
            other => Err(Error::InvalidInput(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: DgpKind,
    pub p: usize,
    pub n: usize,
    /// Target fraction of nonzero partial coherences.
    pub density: f64,
    pub alpha: f64,
    pub delta: f64,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub seed: u64,
    pub innovations: Innovations,
    /// Remaining analysis settings; `alpha` and `delta` are taken from above.
    pub analysis: AnalysisOptions,
    pub exec: Exec,
}

impl ExperimentConfig {
    pub fn new(kind: DgpKind, p: usize, n: usize) -> Self {
        Self {
            kind,
            p,
            n,
            density: 0.05,
            alpha: 0.1,
            delta: 0.0,
            methods: vec![Method::Testing, Method::Regularizing],
            replications: 100,
            seed: 0,
            innovations: Innovations::Gaussian,
            analysis: AnalysisOptions::default(),
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub rejections: usize,
    pub false_rejections: usize,
    pub detected: usize,
    pub strong_detected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    /// Stage and message when the analysis failed.
    pub error: Option<String>,
    pub outcomes: Vec<MethodOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub fdr_mean: f64,
    pub fdr_sd: f64,
    /// `None` when the model has no alternatives.
    pub power_mean: Option<f64>,
    pub power_sd: Option<f64>,
    pub strong_power_mean: Option<f64>,
    pub strong_power_sd: Option<f64>,
    pub mean_rejections: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub p: usize,
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub replications: usize,
    pub seed: u64,
    pub s1: f64,
    pub s2: f64,
    pub alternatives: Vec<(usize, usize)>,
    pub strong_alternatives: Vec<(usize, usize)>,
    pub failed_replications: usize,
    pub methods: Vec<MethodSummary>,
    pub per_replication: Vec<ReplicationOutcome>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn fmt_opt(mean: Option<f64>, sd: Option<f64>) -> String {
    match (mean, sd) {
        (Some(m), Some(s)) => format!("{m:.3} ({s:.3})"),
        _ => "NA".to_string(),
    }
}

impl ExperimentReport {
    /// Plain-text table with columns method, α, FDR(sd), Power(sd).
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} p={} n={} delta={} reps={} S1={:.3} S2={:.3}",
            self.kind, self.p, self.n, self.delta, self.replications, self.s1, self.s2
        );
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>16} {:>16} {:>16}",
            "method", "alpha", "FDR(sd)", "Power(sd)", "StrongPower(sd)"
        );
        for m in &self.methods {
            let _ = writeln!(
                out,
                "{:<14} {:>6} {:>16} {:>16} {:>16}",
                m.method.name(),
                format!("{}", self.alpha),
                format!("{:.3} ({:.3})", m.fdr_mean, m.fdr_sd),
                fmt_opt(m.power_mean, m.power_sd),
                fmt_opt(m.strong_power_mean, m.strong_power_sd),
            );
        }
        out
    }
}

/// Generates the model for `config.kind` and runs the experiment on it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let model = generate_sparse_varma(config.p, config.kind, config.density, config.seed)?;
    run_experiment_with_model(&model, config.kind.name(), config)
}

/// Replication `r` draws its path from stream `r + 1` of a ChaCha8 generator
/// seeded with `config.seed`, so results do not depend on scheduling.
pub fn run_experiment_with_model(model: &VarmaModel, label: &str, config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.replications == 0 {
        return Err(Error::InvalidInput("at least one replication is required".into()));
    }
    if config.methods.is_empty() {
        return Err(Error::InvalidInput("no method selected".into()));
    }
    let maxima = max_partial_coherence(model)?;
    let alt_level = config.delta.max(ZERO_TOL);
    let alternatives: Vec<(usize, usize)> = maxima.iter().filter(|(_, r)| *r > alt_level).map(|(k, _)| *k).collect();
    let strong: Vec<(usize, usize)> = maxima
        .iter()
        .filter(|(_, r)| *r > config.delta + STRONG_MARGIN)
        .map(|(k, _)| *k)
        .collect();
    let alt_set: BTreeSet<(usize, usize)> = alternatives.iter().copied().collect();
    let strong_set: BTreeSet<(usize, usize)> = strong.iter().copied().collect();

    let mut options = config.analysis.clone();
    options.alpha = config.alpha;
    options.delta = config.delta;
    if config.exec.is_parallel() {
        options.exec = Exec::Sequential;
    }

    let per_replication: Vec<ReplicationOutcome> = config.exec.map_range(config.replications, |rep| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(rep as u64 + 1);
        let result = simulate_with_rng(model, config.n, &mut rng, config.innovations)
            .map_err(|e| format!("simulation: {e}"))
            .and_then(|x| analyze(&x, &options).map_err(|e| e.to_string()));
        match result {
            Err(error) => ReplicationOutcome {
                replication: rep,
                error: Some(error),
                outcomes: Vec::new(),
            },
            Ok(analysis) => {
                let outcomes = config
                    .methods
                    .iter()
                    .map(|&method| {
                        let edges = match method {
                            Method::Testing => analysis.test.rejected.clone(),
                            Method::Regularizing => analysis.regularizing_edges(),
                        };
                        MethodOutcome {
                            method,
                            rejections: edges.len(),
                            false_rejections: edges.iter().filter(|e| !alt_set.contains(e)).count(),
                            detected: edges.iter().filter(|e| alt_set.contains(e)).count(),
                            strong_detected: edges.iter().filter(|e| strong_set.contains(e)).count(),
                        }
                    })
                    .collect();
                ReplicationOutcome {
                    replication: rep,
                    error: None,
                    outcomes,
                }
            }
        }
    });

    let ok: Vec<&ReplicationOutcome> = per_replication.iter().filter(|r| r.error.is_none()).collect();
    let methods = config
        .methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let outs: Vec<&MethodOutcome> = ok.iter().map(|r| &r.outcomes[i]).collect();
            let fdr: Vec<f64> = outs
                .iter()
                .map(|o| o.false_rejections as f64 / o.rejections.max(1) as f64)
                .collect();
            let (fdr_mean, fdr_sd) = mean_sd(&fdr);
            let power = |count: fn(&MethodOutcome) -> usize, total: usize| {
                if total == 0 || outs.is_empty() {
                    return (None, None);
                }
                let xs: Vec<f64> = outs.iter().map(|o| count(o) as f64 / total as f64).collect();
                let (m, s) = mean_sd(&xs);
                (Some(m), Some(s))
            };
            let (power_mean, power_sd) = power(|o| o.detected, alternatives.len());
            let (strong_power_mean, strong_power_sd) = power(|o| o.strong_detected, strong.len());
            let (mean_rejections, _) = mean_sd(&outs.iter().map(|o| o.rejections as f64).collect::<Vec<_>>());
            MethodSummary {
                method,
                fdr_mean,
                fdr_sd,
                power_mean,
                power_sd,
                strong_power_mean,
                strong_power_sd,
                mean_rejections,
            }
        })
        .collect();

    Ok(ExperimentReport {
        kind: label.to_string(),
        p: model.p(),
        n: config.n,
        alpha: config.alpha,
        delta: config.delta,
        replications: config.replications,
        seed: config.seed,
        s1: model.s1,
        s2: model.s2,
        alternatives,
        strong_alternatives: strong,
        failed_replications: per_replication.len() - ok.len(),
        methods,
        per_replication,
    })
}
