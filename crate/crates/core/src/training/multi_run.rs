use rayon::prelude::*;
use serde::Serialize;

use super::{fit, Hyperparams};
use crate::data::PreparedData;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, MetricsReport};
use crate::forecaster::ModelConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub seed: u64,
    /// `None` when the run diverged.
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

/// Test nRMSE statistics over independent runs. `std` is the population
/// standard deviation over the runs that completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiRunReport {
    pub runs: Vec<RunOutcome>,
    pub completed: usize,
    pub excluded: usize,
    pub mean_nrmse: f64,
    pub std_nrmse: f64,
    pub min_nrmse: f64,
    pub max_nrmse: f64,
    /// Per-field mean of the completed runs' metrics.
    pub mean_metrics: MetricsReport,
}

/// Trains `n_runs` models from seeds `hp.seed + i` and evaluates each on
/// the test windows. Runs execute in parallel; results are gathered in seed
/// order, so the aggregate does not depend on scheduling.
pub fn multi_run(
    config: &ModelConfig,
    data: &PreparedData,
    hp: &Hyperparams,
    n_runs: usize,
) -> Result<MultiRunReport> {
    if n_runs < 1 {
        return Err(Error::InvalidArgument("need at least one run".into()));
    }
    let runs: Vec<RunOutcome> = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = hp.seed.wrapping_add(i);
            let hp = Hyperparams { seed, ..hp.clone() };
            match fit(config, data, &hp).and_then(|(m, _)| evaluate(&m, &data.test_windows)) {
                Ok((metrics, _)) => Ok(RunOutcome {
                    seed,
                    metrics: Some(metrics),
                    error: None,
                }),
                Err(e @ Error::Diverged { .. }) => Ok(RunOutcome {
                    seed,
                    metrics: None,
                    error: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    aggregate(runs)
}

pub(crate) fn aggregate(runs: Vec<RunOutcome>) -> Result<MultiRunReport> {
    let done: Vec<&MetricsReport> = runs.iter().filter_map(|r| r.metrics.as_ref()).collect();
    if done.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "all {} runs diverged",
            runs.len()
        )));
    }
    let k = done.len() as f64;
    let nrmse: Vec<f64> = done.iter().map(|m| m.nrmse).collect();
    let mean = nrmse.iter().sum::<f64>() / k;
    let var = nrmse.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    let avg = |f: fn(&MetricsReport) -> f64| done.iter().map(|m| f(m)).sum::<f64>() / k;
    let mean_metrics = MetricsReport {
        nrmse: mean,
        nrmse_magnitude: avg(|m| m.nrmse_magnitude),
        nrmse_angle: avg(|m| m.nrmse_angle),
        avg_ae_magnitude: avg(|m| m.avg_ae_magnitude),
        max_ae_magnitude: avg(|m| m.max_ae_magnitude),
        avg_ae_angle: avg(|m| m.avg_ae_angle),
        max_ae_angle: avg(|m| m.max_ae_angle),
        n_test_windows: done[0].n_test_windows,
    };
    Ok(MultiRunReport {
        completed: done.len(),
        excluded: runs.len() - done.len(),
        mean_nrmse: mean,
        std_nrmse: var.sqrt(),
        min_nrmse: nrmse.iter().copied().fold(f64::INFINITY, f64::min),
        max_nrmse: nrmse.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_metrics,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(seed: u64, nrmse: Option<f64>) -> RunOutcome {
        RunOutcome {
            seed,
            metrics: nrmse.map(|v| MetricsReport {
                nrmse: v,
                ..MetricsReport::default()
            }),
            error: nrmse.is_none().then(|| "diverged".into()),
        }
    }

    #[test]
    fn single_run_has_zero_spread() {
        let r = aggregate(vec![outcome(0, Some(0.25))]).unwrap();
        assert_eq!(r.mean_nrmse, 0.25);
        assert_eq!(r.std_nrmse, 0.0);
        assert_eq!((r.min_nrmse, r.max_nrmse), (0.25, 0.25));
    }

    #[test]
    fn diverged_runs_are_excluded() {
        let r = aggregate(vec![outcome(0, Some(0.2)), outcome(1, None), outcome(2, Some(0.4))]).unwrap();
        assert_eq!((r.completed, r.excluded), (2, 1));
        assert!((r.mean_nrmse - 0.3).abs() < 1e-15);
        assert!((r.std_nrmse - 0.1).abs() < 1e-15);
        assert!(r.min_nrmse <= r.mean_nrmse && r.mean_nrmse <= r.max_nrmse);
        assert!(aggregate(vec![outcome(0, None)]).is_err());
    }
}
