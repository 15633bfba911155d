use std::fmt::Write as _;

use serde::Serialize;

use super::{evaluate_persistence, MetricsReport};
use crate::data::PreparedData;
use crate::error::Result;
use crate::forecaster::{Architecture, ModelConfig};
use crate::training::{multi_run, Hyperparams, MultiRunReport};

pub const NRMSE_DEFINITION: &str = "nRMSE = sqrt(sum ||s_hat - s||^2) / sqrt(sum ||s||^2) over all test windows, \
physical units; (vm) and (va) restrict the sums to magnitudes or angles";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSpread {
    pub runs: usize,
    pub excluded: usize,
    pub std_nrmse: f64,
    pub min_nrmse: f64,
    pub max_nrmse: f64,
}

impl From<&MultiRunReport> for RunSpread {
    fn from(r: &MultiRunReport) -> Self {
        Self {
            runs: r.completed,
            excluded: r.excluded,
            std_nrmse: r.std_nrmse,
            min_nrmse: r.min_nrmse,
            max_nrmse: r.max_nrmse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub metrics: MetricsReport,
    /// Present for learned methods averaged over several runs.
    pub spread: Option<RunSpread>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub notes: Vec<String>,
}

impl Comparison {
    pub fn row(&self, method: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Absolute-error table (average and maximum for magnitude and angle)
    /// followed by the nRMSE columns.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let n = self.rows.first().map_or(0, |r| r.metrics.n_test_windows);
        let _ = writeln!(out, "ABSOLUTE ERROR OF VOLTAGE FORECASTING ({n} test windows)");
        let _ = writeln!(
            out,
            "{:<12} | {:^25} | {:^25} |",
            "", "Voltage magnitude (p.u.)", "Voltage angle (degree)"
        );
        let _ = writeln!(
            out,
            "{:<12} | {:>12} {:>12} | {:>12} {:>12} | {:>10} {:>10} {:>10}",
            "Method", "Average", "Max", "Average", "Max", "nRMSE", "nRMSE(vm)", "nRMSE(va)"
        );
        let _ = writeln!(out, "{}", "-".repeat(103));
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{:<12} | {:>12.3e} {:>12.3e} | {:>12.3e} {:>12.3e} | {:>10.3e} {:>10.3e} {:>10.3e}",
                r.method,
                m.avg_ae_magnitude,
                m.max_ae_magnitude,
                m.avg_ae_angle,
                m.max_ae_angle,
                m.nrmse,
                m.nrmse_magnitude,
                m.nrmse_angle
            );
        }
        let spreads: Vec<&ComparisonRow> = self.rows.iter().filter(|r| r.spread.is_some()).collect();
        if !spreads.is_empty() {
            out.push('\n');
            for r in spreads {
                let s = r.spread.expect("filtered");
                let _ = writeln!(
                    out,
                    "{}: mean of {} run{} ({} excluded), nRMSE std {:.3e}, min {:.3e}, max {:.3e}",
                    r.method,
                    s.runs,
                    if s.runs == 1 { "" } else { "s" },
                    s.excluded,
                    s.std_nrmse,
                    s.min_nrmse,
                    s.max_nrmse
                );
            }
        }
        out.push('\n');
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

pub fn learned_row(method: &str, report: &MultiRunReport) -> ComparisonRow {
    ComparisonRow {
        method: method.to_owned(),
        metrics: report.mean_metrics,
        spread: Some(RunSpread::from(report)),
    }
}

pub fn persistence_row(data: &PreparedData) -> Result<ComparisonRow> {
    Ok(ComparisonRow {
        method: "persistence".into(),
        metrics: evaluate_persistence(&data.test_windows)?.0,
        spread: None,
    })
}

pub fn standard_notes(data: &PreparedData) -> Vec<String> {
    vec![
        NRMSE_DEFINITION.to_owned(),
        "learned models see z-scored inputs and targets (statistics fitted on the training partition)"
            .to_owned(),
        format!(
            "windows built inside each partition: {} train / {} test (lag {})",
            data.train_windows.len(),
            data.test_windows.len(),
            data.lag
        ),
    ]
}

/// Trains the hybrid and the RNN-only forecaster under identical
/// hyperparameters and seeds, and tabulates both next to persistence.
pub fn compare_methods(
    hybrid: &ModelConfig,
    data: &PreparedData,
    hp: &Hyperparams,
    n_runs: usize,
) -> Result<Comparison> {
    let rnn_only = ModelConfig {
        architecture: Architecture::RnnOnly,
        ..hybrid.clone()
    };
    let hybrid_runs = multi_run(hybrid, data, hp, n_runs)?;
    let rnn_runs = multi_run(&rnn_only, data, hp, n_runs)?;
    let rows = vec![
        learned_row("hybrid", &hybrid_runs),
        learned_row("rnn-only", &rnn_runs),
        persistence_row(data)?,
    ];
    Ok(Comparison {
        rows,
        notes: standard_notes(data),
    })
}
