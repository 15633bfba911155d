use super::{StateSeries, StateVector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// One supervised example: `window` is `2n × r` with column `τ` holding the
/// state `r − τ` steps before `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub window: Matrix,
    pub target: StateVector,
}

/// `(train, test)` instance counts; the training share is floor-rounded.
pub fn split_counts(total: usize, train_fraction: f64) -> Result<(usize, usize)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999…
    let train = ((total as f64) * train_fraction + 1e-9).floor() as usize;
    Ok((train, total - train))
}

/// Splits without shuffling. Each partition must hold at least `lag + 1`
/// instances so it yields at least one window.
pub fn chronological_split(
    series: &StateSeries,
    train_fraction: f64,
    lag: usize,
) -> Result<(StateSeries, StateSeries)> {
    let (train, test) = split_counts(series.len(), train_fraction)?;
    let needed = lag + 1;
    if train < needed || test < needed {
        return Err(Error::InvalidArgument(format!(
            "split of {} instances at {train_fraction} gives {train}/{test}; \
             each partition needs at least {needed}",
            series.len()
        )));
    }
    Ok((series.slice(0, train)?, series.slice(train, series.len())?))
}

/// Builds the `T − r` lagged windows of a series. Sample `i` uses states
/// `i..i + r` as inputs and state `i + r` as target (0-based).
pub fn build_windows(series: &StateSeries, lag: usize) -> Result<Vec<Sample>> {
    if lag < 1 {
        return Err(Error::InvalidArgument("lag must be at least 1".into()));
    }
    if series.len() <= lag {
        return Err(Error::InvalidArgument(format!(
            "series of {} instances is too short for lag {lag}",
            series.len()
        )));
    }
    let states = series.states();
    Ok((0..series.len() - lag)
        .map(|i| {
            let columns: Vec<&[f64]> = states[i..i + lag].iter().map(StateVector::as_slice).collect();
            Sample {
                window: Matrix::from_columns(&columns).expect("states share one width"),
                target: states[i + lag].clone(),
            }
        })
        .collect())
}
