//! Frequency-domain estimation: DFT, sample autocovariances, lag-window
//! kernels, lag-window and smoothed-periodogram estimates, and automatic
//! truncation-lag selection.

mod bandwidth;
mod dft;
mod estimate;
mod kernel;
mod series;

pub use bandwidth::{autocorrelation_magnitude, bandwidth_select, BandwidthChoice, BandwidthRule};
pub use dft::{dft, fourier_frequency, DftTable};
pub use estimate::{
    autocovariances, lag_window_estimate, sample_autocov, smoothed_periodogram, smoothed_periodogram_from_table,
    weighted_periodogram_sum, FieldKind, LagWindow, SpectralField,
};
pub use kernel::{Kernel, KernelKind};
pub use series::{center_series, MultivariateSeries};
