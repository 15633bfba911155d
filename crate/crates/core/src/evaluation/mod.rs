//! Test-set scoring: normalized RMSE, absolute-error statistics, error
//! traces, the persistence baseline, and side-by-side comparison tables.

mod compare;
mod metrics;
mod trace;

pub use compare::{
    compare_methods, learned_row, persistence_row, standard_notes, Comparison, ComparisonRow,
    RunSpread, NRMSE_DEFINITION,
};
pub use metrics::{ae_stats, normalized_rmse, score, MetricsReport};
pub use trace::{rows_to_csv, ErrorTrace, TraceRow, TRACE_HEADER};

use rayon::prelude::*;

use crate::data::{Sample, StateVector};
use crate::error::{Error, Result};
use crate::forecaster::ForecastModel;
use crate::linalg::Matrix;

/// Naive forecast: the most recent state in the window.
pub fn persistence_baseline(window: &Matrix) -> Result<StateVector> {
    StateVector::new(window.column(window.cols() - 1))
}

/// Scores an arbitrary forecaster over `windows`. Forecasts run in
/// parallel but are collected in window order.
pub fn evaluate_with<F>(windows: &[Sample], forecast: F) -> Result<(MetricsReport, ErrorTrace)>
where
    F: Fn(&Matrix) -> Result<StateVector> + Sync,
{
    if windows.is_empty() {
        return Err(Error::InvalidArgument("no test windows".into()));
    }
    let preds: Vec<StateVector> = windows
        .par_iter()
        .map(|s| forecast(&s.window))
        .collect::<Result<_>>()?;
    let truths: Vec<StateVector> = windows.iter().map(|s| s.target.clone()).collect();
    score(&preds, &truths)
}

pub fn evaluate(model: &ForecastModel, windows: &[Sample]) -> Result<(MetricsReport, ErrorTrace)> {
    if let Some(s) = windows.first() {
        model.check_window(&s.window)?;
    }
    evaluate_with(windows, |w| model.forecast_next(w))
}

pub fn evaluate_persistence(windows: &[Sample]) -> Result<(MetricsReport, ErrorTrace)> {
    evaluate_with(windows, persistence_baseline)
}
