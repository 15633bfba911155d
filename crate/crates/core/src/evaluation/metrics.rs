use serde::{Deserialize, Serialize};

use super::trace::ErrorTrace;
use crate::data::StateVector;
use crate::error::{Error, Result};

/// Test-set error summary in physical units: magnitudes in p.u., angles in
/// degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `‖ŝ − s‖ / ‖s‖` over every component of every test window.
    pub nrmse: f64,
    pub nrmse_magnitude: f64,
    pub nrmse_angle: f64,
    pub avg_ae_magnitude: f64,
    pub max_ae_magnitude: f64,
    pub avg_ae_angle: f64,
    pub max_ae_angle: f64,
    pub n_test_windows: usize,
}

fn check_pairs(preds: &[StateVector], truths: &[StateVector]) -> Result<usize> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    if preds.len() != truths.len() {
        return Err(Error::shape("prediction count", truths.len(), preds.len()));
    }
    let width = truths[0].as_slice().len();
    for (p, t) in preds.iter().zip(truths) {
        if p.as_slice().len() != width || t.as_slice().len() != width {
            return Err(Error::shape(
                "state width",
                width,
                format!("{} / {}", p.as_slice().len(), t.as_slice().len()),
            ));
        }
    }
    Ok(width / 2)
}

/// Error norm over truth norm across all components and instances.
pub fn normalized_rmse(preds: &[StateVector], truths: &[StateVector]) -> Result<f64> {
    check_pairs(preds, truths)?;
    Ok(ratio(preds, truths, |s| s.as_slice()))
}

fn ratio(preds: &[StateVector], truths: &[StateVector], part: fn(&StateVector) -> &[f64]) -> f64 {
    let mut err = 0.0;
    let mut norm = 0.0;
    for (p, t) in preds.iter().zip(truths) {
        for (a, b) in part(p).iter().zip(part(t)) {
            err += (a - b) * (a - b);
            norm += b * b;
        }
    }
    if norm == 0.0 {
        return if err == 0.0 { 0.0 } else { f64::INFINITY };
    }
    err.sqrt() / norm.sqrt()
}

/// Full report plus the per-instance, per-bus absolute error trace.
pub fn score(preds: &[StateVector], truths: &[StateVector]) -> Result<(MetricsReport, ErrorTrace)> {
    let n = check_pairs(preds, truths)?;
    let trace = ErrorTrace::from_pairs(preds, truths, n)?;
    let (avg_ae_magnitude, max_ae_magnitude) = ErrorTrace::avg_max(trace.magnitude_errors());
    let (avg_ae_angle, max_ae_angle) = ErrorTrace::avg_max(trace.angle_errors());
    let report = MetricsReport {
        nrmse: ratio(preds, truths, |s| s.as_slice()),
        nrmse_magnitude: ratio(preds, truths, StateVector::magnitudes),
        nrmse_angle: ratio(preds, truths, StateVector::angles),
        avg_ae_magnitude,
        max_ae_magnitude,
        avg_ae_angle,
        max_ae_angle,
        n_test_windows: preds.len(),
    };
    Ok((report, trace))
}

/// Average and maximum absolute errors, split by quantity, for states laid
/// out as `n` magnitudes followed by `n` angles.
pub fn ae_stats(preds: &[StateVector], truths: &[StateVector], n: usize) -> Result<MetricsReport> {
    let width = check_pairs(preds, truths)?;
    if width != n {
        return Err(Error::shape("bus count", n, width));
    }
    Ok(score(preds, truths)?.0)
}
