use num_complex::Complex64;
use parcoh::pipeline::AnalysisResult;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub n: usize,
    pub p: usize,
    pub columns: Vec<String>,
    pub sampling_rate: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub delta: f64,
    pub alpha: f64,
    pub band: String,
    pub band_unit: &'static str,
    pub bands_radians: Vec<[f64; 2]>,
    pub kernel: String,
    pub bandwidth: String,
    pub prewhiten: bool,
    pub inverse: &'static str,
    pub lambda: String,
    pub pairs: String,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct VarInfo {
    order: usize,
    nonzero: usize,
    spectral_radius: f64,
    stable: bool,
    /// `coefficients[j][r][c]` is entry `(r, c)` of the lag-`j+1` matrix.
    coefficients: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize)]
struct GridPoint {
    l: usize,
    omega: f64,
    lambda: f64,
    feasibility_gap: f64,
    duality_gap: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Tuning {
    n_filtered: usize,
    var: VarInfo,
    truncation_lag: usize,
    m_hat: Option<usize>,
    truncation_lag_clamped: bool,
    grid_spacing: usize,
    d: usize,
    c_k2: f64,
    bic_n_eff: usize,
    grid: Vec<GridPoint>,
}

#[derive(Debug, Serialize)]
struct FrequencyOut {
    omega: f64,
    rho_de: Complex,
    rho_plugin: Complex,
    statistic: f64,
}

#[derive(Debug, Serialize)]
struct PairOut {
    u: usize,
    v: usize,
    t: f64,
    rejected: bool,
    max_abs_rho_de: f64,
    exceeded_delta: bool,
    variance_clamped: bool,
    unstable_denominator: bool,
    frequencies: Vec<FrequencyOut>,
}

#[derive(Debug, Serialize)]
struct Testing {
    q: usize,
    d: usize,
    t_hat: f64,
    threshold_feasible: bool,
    threshold_upper: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    schema_version: u32,
    input: InputInfo,
    config: ConfigEcho,
    tuning: Tuning,
    testing: Testing,
    rejected_edges: Vec<[usize; 2]>,
    regularizing_edges: Vec<[usize; 2]>,
    pairs: Vec<PairOut>,
}

fn one_based(e: &(usize, usize)) -> [usize; 2] {
    [e.0 + 1, e.1 + 1]
}

pub fn analysis_report(input: InputInfo, config: ConfigEcho, r: &AnalysisResult) -> AnalysisReport {
    let var = &r.var_model;
    let var_info = VarInfo {
        order: var.order(),
        nonzero: var.nonzero_count(),
        spectral_radius: var.spectral_radius(),
        stable: var.is_stable(),
        coefficients: var
            .coefficients()
            .iter()
            .map(|c| (0..c.nrows()).map(|i| c.row(i).iter().copied().collect()).collect())
            .collect(),
    };
    let grid = r
        .grid
        .indices
        .iter()
        .zip(&r.grid.frequencies)
        .zip(&r.inverse)
        .map(|((&l, &omega), est)| GridPoint {
            l,
            omega,
            lambda: est.lambda,
            feasibility_gap: est.feasibility_gap,
            duality_gap: est.duality_gap,
        })
        .collect();
    let rejected: std::collections::BTreeSet<_> = r.test.rejected.iter().copied().collect();
    let pairs = r
        .test
        .statistics
        .iter()
        .map(|s| PairOut {
            u: s.u + 1,
            v: s.v + 1,
            t: s.t,
            rejected: rejected.contains(&(s.u, s.v)),
            max_abs_rho_de: s.max_rho_de,
            exceeded_delta: s.exceeded,
            variance_clamped: s.clamped,
            unstable_denominator: s.unstable,
            frequencies: s
                .per_frequency
                .iter()
                .map(|f| FrequencyOut {
                    omega: f.omega,
                    rho_de: f.rho_de.into(),
                    rho_plugin: f.rho_plugin.into(),
                    statistic: f.quad,
                })
                .collect(),
        })
        .collect();
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input,
        config,
        tuning: Tuning {
            n_filtered: r.n_filtered,
            var: var_info,
            truncation_lag: r.bandwidth.m,
            m_hat: r.bandwidth.m_hat,
            truncation_lag_clamped: r.bandwidth.clamped,
            grid_spacing: r.grid.spacing,
            d: r.grid.d(),
            c_k2: r.config.c_k2,
            bic_n_eff: r.bic_n_eff,
            grid,
        },
        testing: Testing {
            q: r.test.q,
            d: r.test.d,
            t_hat: r.test.t_hat(),
            threshold_feasible: r.test.threshold.feasible,
            threshold_upper: r.test.threshold.upper,
        },
        rejected_edges: r.test.rejected.iter().map(one_based).collect(),
        regularizing_edges: r.regularizing_edges().iter().map(one_based).collect(),
        pairs,
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Undirected graph of the rejected pairs, edges labelled with
/// `max_l |ρ̂^{(de)}|` to three decimals.
pub fn dot_graph(columns: &[String], r: &AnalysisResult) -> String {
    let mut out = String::from("graph partial_coherence {\n");
    for (i, name) in columns.iter().enumerate() {
        out.push_str(&format!("  {} [label=\"{}\"];\n", i + 1, dot_escape(name)));
    }
    for s in &r.test.statistics {
        if r.test.rejected.contains(&(s.u, s.v)) {
            out.push_str(&format!("  {} -- {} [label=\"{:.3}\"];\n", s.u + 1, s.v + 1, s.max_rho_de));
        }
    }
    out.push_str("}\n");
    out
}
