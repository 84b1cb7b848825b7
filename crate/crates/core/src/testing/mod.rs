//! Frequency grid, max-type pair statistics, single tests and the FDR
//! threshold.

mod fdr;
mod grid;
mod statistic;

pub use fdr::{
    fdr_threshold, fdr_threshold_multiband, g_tail, multiple_test, single_test, single_test_quantile, Decision,
    FdrThreshold, MultiTestResult, PairSet,
};
pub use grid::{build_grid, validate_bands, FrequencyGrid};
pub use statistic::{pair_statistic, vhat_inverse, FrequencyRecord, PairStatistic, TestConfig, VhatSource, RHO_CLAMP};
