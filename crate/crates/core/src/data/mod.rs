//! Grid-state time series: ingestion, splitting, windowing, scaling, and a
//! synthetic generator.

mod csv_io;
mod normalize;
mod prepare;
mod synthetic;
mod window;

pub use csv_io::{load_series, read_series, series_to_csv, write_series};
pub use normalize::NormalizerStats;
pub use prepare::{PreparedData, DEFAULT_TRAIN_FRACTION};
pub use synthetic::{
    generate_synthetic_series, SyntheticConfig, DEFAULT_COUPLING, DEFAULT_NOISE_ANGLE,
    DEFAULT_NOISE_MAGNITUDE, DEFAULT_PERIOD,
};
pub use window::{build_windows, chronological_split, split_counts, Sample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voltage magnitudes (p.u.) for every bus followed by phase angles (degrees).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::shape(
                "state vector length",
                "positive even length",
                values.len(),
            ));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self(values))
    }

    pub fn from_parts(magnitudes: &[f64], angles: &[f64]) -> Result<Self> {
        if magnitudes.len() != angles.len() {
            return Err(Error::shape("state vector halves", magnitudes.len(), angles.len()));
        }
        let mut v = magnitudes.to_vec();
        v.extend_from_slice(angles);
        Self::new(v)
    }

    pub fn n_buses(&self) -> usize {
        self.0.len() / 2
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.0[..self.n_buses()]
    }

    pub fn angles(&self) -> &[f64] {
        &self.0[self.n_buses()..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for StateVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Consecutive states at uniform spacing; row index is the time index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    n_buses: usize,
    timestamps: Vec<f64>,
    states: Vec<StateVector>,
}

impl StateSeries {
    pub fn new(n_buses: usize, timestamps: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        if n_buses == 0 {
            return Err(Error::InvalidArgument("series needs at least one bus".into()));
        }
        if timestamps.len() != states.len() {
            return Err(Error::shape("series timestamps", states.len(), timestamps.len()));
        }
        if states.is_empty() {
            return Err(Error::InvalidArgument("series has no states".into()));
        }
        if let Some(bad) = states.iter().find(|s| s.n_buses() != n_buses) {
            return Err(Error::shape("series state width", 2 * n_buses, bad.as_slice().len()));
        }
        Ok(Self {
            n_buses,
            timestamps,
            states,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn n_features(&self) -> usize {
        2 * self.n_buses
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &StateVector {
        &self.states[index]
    }

    /// Half-open range of rows `[start, end)` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "invalid slice {start}..{end} of a series with {} rows",
                self.len()
            )));
        }
        Self::new(
            self.n_buses,
            self.timestamps[start..end].to_vec(),
            self.states[start..end].to_vec(),
        )
    }

    /// Appends `other`'s rows after this series' rows.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut timestamps = self.timestamps.clone();
        timestamps.extend_from_slice(&other.timestamps);
        let mut states = self.states.clone();
        states.extend_from_slice(&other.states);
        Self::new(self.n_buses, timestamps, states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_vector_layout() {
        let s = StateVector::from_parts(&[1.0, 0.99], &[0.0, -3.5]).unwrap();
        assert_eq!(s.n_buses(), 2);
        assert_eq!(s.magnitudes(), &[1.0, 0.99]);
        assert_eq!(s.angles(), &[0.0, -3.5]);
        assert!(StateVector::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(StateVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn series_rejects_mixed_widths() {
        let a = StateVector::new(vec![1.0, 0.0]).unwrap();
        let b = StateVector::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(StateSeries::new(1, vec![0.0, 1.0], vec![a, b]).is_err());
    }
}
