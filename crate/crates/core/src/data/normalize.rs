use serde::{Deserialize, Serialize};

use super::StateSeries;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-feature z-score statistics. Features with zero variance on the
/// training data keep `std = 1` and are listed in `constant_features`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant_features: Vec<usize>,
}

impl NormalizerStats {
    pub fn identity(features: usize) -> Self {
        Self {
            mean: vec![0.0; features],
            std: vec![1.0; features],
            constant_features: Vec::new(),
        }
    }

    /// Fits mean and population standard deviation on `train`.
    pub fn fit(train: &StateSeries) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a normalizer on an empty series".into()));
        }
        let f = train.n_features();
        let count = train.len() as f64;
        let mut mean = vec![0.0; f];
        for s in train.states() {
            mean.iter_mut().zip(s.as_slice()).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= count);

        let mut var = vec![0.0; f];
        for s in train.states() {
            for ((acc, v), m) in var.iter_mut().zip(s.as_slice()).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let mut constant_features = Vec::new();
        let std = var
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let sd = (v / count).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    constant_features.push(i);
                    1.0
                }
            })
            .collect();
        Ok(Self {
            mean,
            std,
            constant_features,
        })
    }

    pub fn features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    /// Normalizes a `features × r` window row by row.
    pub fn apply_window(&self, window: &Matrix) -> Result<Matrix> {
        if window.rows() != self.features() {
            return Err(Error::shape("normalizer window rows", self.features(), window.rows()));
        }
        let mut out = window.clone();
        for i in 0..out.rows() {
            let (m, s) = (self.mean[i], self.std[i]);
            out.row_mut(i).iter_mut().for_each(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.mean.len() != self.std.len() {
            return Err(Error::shape("normalizer std", self.mean.len(), self.std.len()));
        }
        if self.std.iter().any(|&s| !(s > 0.0 && s.is_finite()))
            || self.mean.iter().any(|m| !m.is_finite())
        {
            return Err(Error::InvalidArgument("normalizer stats must be finite with std > 0".into()));
        }
        Ok(())
    }
}
