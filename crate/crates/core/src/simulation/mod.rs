//! Sparse VARMA/VMA data-generating processes with exact spectra, and the
//! Monte Carlo comparison of the testing and regularizing procedures.

mod experiment;
mod model;
mod process;

pub use experiment::{
    run_experiment, run_experiment_with_model, ExperimentConfig, ExperimentReport, Method, MethodSummary,
    ReplicationOutcome, STRONG_MARGIN,
};
pub use model::{
    generate_sparse_varma, max_partial_coherence, sparse_var1, DgpKind, VarmaModel, MAX_RADIUS, S2_LEVEL,
    TRUTH_GRID_LEN, ZERO_TOL,
};
pub use process::{
    exact_dft_variance, model_autocovariances, simulate_path, true_partial_coherence, true_partial_coherence_matrix,
    true_spectral_density, Innovations, AUTOCOV_TOL, BURN_IN,
};
