//! De-biased partial coherence estimation, max-type testing and FDR-controlled
//! graph selection for high-dimensional multivariate time series.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherence;
pub mod error;
pub mod exec;
pub mod inverse;
pub mod lasso;
pub mod linalg;
pub mod pipeline;
pub mod prewhiten;
pub mod simulation;
pub mod spectral;
pub mod testing;

pub use error::{Error, Result};
pub use exec::Exec;
