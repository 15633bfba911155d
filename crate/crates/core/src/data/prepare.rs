use super::{build_windows, chronological_split, NormalizerStats, Sample, StateSeries};
use crate::error::Result;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Split, scaling statistics, and windows for one experiment. Windows are
/// built inside each partition, so no test state leaks into training.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub lag: usize,
    pub train: StateSeries,
    pub test: StateSeries,
    pub normalizer: NormalizerStats,
    pub train_windows: Vec<Sample>,
    pub test_windows: Vec<Sample>,
}

impl PreparedData {
    pub fn new(series: &StateSeries, lag: usize, train_fraction: f64) -> Result<Self> {
        let (train, test) = chronological_split(series, train_fraction, lag)?;
        let normalizer = NormalizerStats::fit(&train)?;
        let train_windows = build_windows(&train, lag)?;
        let test_windows = build_windows(&test, lag)?;
        Ok(Self {
            lag,
            train,
            test,
            normalizer,
            train_windows,
            test_windows,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.train.n_buses()
    }
}
