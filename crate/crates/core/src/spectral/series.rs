use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// An `n × p` real observation matrix: rows are time points, columns are the
/// component series.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    values: RMatrix,
    sampling_rate: Option<f64>,
}

impl MultivariateSeries {
    /// Wraps raw values without centering. Used for filtered or simulated
    /// series whose mean is already handled upstream.
    pub fn from_values(values: RMatrix) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "a series needs at least 2 observations, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::InvalidInput("a series needs at least one column".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("series contains non-finite values".into()));
        }
        Ok(Self {
            values,
            sampling_rate: None,
        })
    }

    /// Builds a series from row-major observations (`rows[t][j]`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput("rows have differing lengths".into()));
        }
        Self::from_values(DMatrix::from_fn(n, p, |t, j| rows[t][j]))
    }

    pub fn with_sampling_rate(mut self, hz: f64) -> Result<Self> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::InvalidInput(format!("sampling rate must be positive, got {hz}")));
        }
        self.sampling_rate = Some(hz);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &RMatrix {
        &self.values
    }

    pub fn sampling_rate(&self) -> Option<f64> {
        self.sampling_rate
    }

    /// Observation at time index `t` (0-based) as a column vector.
    pub fn row(&self, t: usize) -> nalgebra::DVector<f64> {
        self.values.row(t).transpose()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: &self.values * c,
            sampling_rate: self.sampling_rate,
        }
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.values.column_iter().map(|c| c.sum() / n).collect()
    }

    /// Columns whose sample variance is zero up to rounding.
    pub fn degenerate_columns(&self) -> Vec<usize> {
        let means = self.column_means();
        self.values
            .column_iter()
            .enumerate()
            .filter(|(j, c)| {
                let scale = c.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
                let ss: f64 = c.iter().map(|x| (x - means[*j]).powi(2)).sum();
                ss.sqrt() <= 1e-12 * scale * (self.n() as f64).sqrt() || ss == 0.0
            })
            .map(|(j, _)| j)
            .collect()
    }

    /// Rejects series with zero-variance components; coherence and the
    /// autocorrelation normalisation are undefined for them.
    pub fn require_nondegenerate(&self) -> Result<()> {
        let bad = self.degenerate_columns();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "columns with zero variance: {:?}",
                bad.iter().map(|j| j + 1).collect::<Vec<_>>()
            )))
        }
    }
}

/// Subtracts each column's sample mean.
pub fn center_series(raw: RMatrix) -> Result<MultivariateSeries> {
    let mut s = MultivariateSeries::from_values(raw)?;
    let means = s.column_means();
    for (j, mut col) in s.values.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    Ok(s)
}
