use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use gridcast::data::{
    generate_synthetic_series, load_series, series_to_csv, SyntheticConfig, DEFAULT_NOISE_ANGLE,
    DEFAULT_NOISE_MAGNITUDE,
};
use gridcast::evaluation::{
    evaluate, learned_row, persistence_baseline, persistence_row, rows_to_csv, standard_notes,
    Comparison, ComparisonRow, MetricsReport,
};
use gridcast::forecaster::{load_model, model_to_string, DEFAULT_LAG, MODEL_FORMAT_VERSION};
use gridcast::training::{fit, multi_run, AdamConfig, Branch, MultiRunReport};
use gridcast::{Architecture, Hyperparams, Matrix, ModelConfig, PreparedData, StateSeries};

use crate::args::{
    BaselineArg, BranchArg, CompareArg, EvalArgs, ForecastArgs, GenDataArgs, TrainArgs,
    TrainingFlags,
};
use crate::output::{check_distinct, sibling, usage, CliResult, Run};

const REPORT_FORMAT_VERSION: u32 = 1;

pub fn gen_data(a: &GenDataArgs) -> CliResult {
    let mut run = Run::start("gen-data");
    if a.length < DEFAULT_LAG + 1 {
        return Err(usage(format!(
            "--length {} leaves no training window; use at least {}",
            a.length,
            DEFAULT_LAG + 1
        )));
    }
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(usage(format!("--noise must be a non-negative multiplier, got {}", a.noise)));
    }
    if !a.coupling.is_finite() {
        return Err(usage("--coupling must be finite"));
    }
    let mut cfg = SyntheticConfig::with_random_profile(a.buses, a.length, a.seed);
    cfg.period = a.period;
    cfg.coupling = a.coupling;
    cfg.noise_magnitude = DEFAULT_NOISE_MAGNITUDE * a.noise;
    cfg.noise_angle = DEFAULT_NOISE_ANGLE * a.noise;
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let series = generate_synthetic_series(&cfg)?;
    run.seed("data", a.seed);
    run.write(&a.out, series_to_csv(&series).as_bytes())?;
    run.finish(a, Some(&a.out))
}

fn hyperparams(t: &TrainingFlags, freeze: Option<BranchArg>) -> CliResult<Hyperparams> {
    let hp = Hyperparams {
        adam: AdamConfig {
            learning_rate: t.lr,
            ..AdamConfig::default()
        },
        batch_size: t.batch,
        epochs: t.epochs,
        seed: t.seed,
        shuffle_each_epoch: true,
        freeze: freeze.map(|b| match b {
            BranchArg::Cnn => Branch::Cnn,
            BranchArg::Rnn => Branch::Rnn,
        }),
    };
    hp.validate().map_err(|e| usage(e.to_string()))?;
    Ok(hp)
}

fn prepare(series: &StateSeries, lag: usize, train_fraction: f64) -> CliResult<PreparedData> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(usage(format!("--train-fraction must lie in (0, 1), got {train_fraction}")));
    }
    Ok(PreparedData::new(series, lag, train_fraction)?)
}

pub fn train(a: &TrainArgs) -> CliResult {
    let mut run = Run::start("train");
    let report_out = a.report_out.clone().unwrap_or_else(|| sibling(&a.model_out, "report.json"));
    check_distinct(&[&a.data], &[&a.model_out, &report_out])?;
    let hp = hyperparams(&a.training, a.freeze_branch)?;

    let series = load_series(&a.data)?;
    run.input(&a.data);
    let config = match a.baseline {
        BaselineArg::Hybrid => ModelConfig::new(series.n_buses(), a.lag),
        BaselineArg::RnnOnly => ModelConfig::rnn_only(series.n_buses(), a.lag),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    if hp.freeze == Some(Branch::Cnn) && config.architecture == Architecture::RnnOnly {
        return Err(usage("--freeze-branch cnn needs the hybrid model"));
    }
    let data = prepare(&series, a.lag, a.training.train_fraction)?;

    let (model, report) = fit(&config, &data, &hp)?;
    let mut report_text = serde_json::to_string_pretty(&report).expect("report serializes");
    report_text.push('\n');

    run.seed("init_and_shuffle", hp.seed)
        .format("model", MODEL_FORMAT_VERSION)
        .format("train_report", REPORT_FORMAT_VERSION);
    run.write(&a.model_out, model_to_string(&model).as_bytes())?;
    run.write(&report_out, report_text.as_bytes())?;
    eprintln!(
        "trained {} for {} epochs: final train loss {:.4e}, test nRMSE {:.4e}",
        config.architecture,
        hp.epochs,
        report.final_train_loss,
        report.test_nrmse.unwrap_or(f64::NAN)
    );
    run.finish(a, Some(&a.model_out))
}

#[derive(Serialize)]
struct EvalReport<'a> {
    format_version: u32,
    architecture: Architecture,
    /// Scores of the model file itself.
    model_metrics: MetricsReport,
    comparison: &'a Comparison,
    /// Retrained runs behind each learned row, when any were trained.
    runs: Vec<(&'static str, &'a MultiRunReport)>,
}

fn method_name(arch: Architecture) -> &'static str {
    match arch {
        Architecture::Hybrid => "hybrid",
        Architecture::RnnOnly => "rnn-only",
    }
}

fn parse_range(text: &str, last: usize) -> CliResult<std::ops::RangeInclusive<usize>> {
    let bad = || usage(format!("--slice-range expects FIRST..LAST, got {text:?}"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let first = if a.is_empty() { 1 } else { a.parse().map_err(|_| bad())? };
    let end = if b.is_empty() { last } else { b.parse().map_err(|_| bad())? };
    if first > end {
        return Err(bad());
    }
    Ok(first..=end)
}

pub fn eval(a: &EvalArgs) -> CliResult {
    let mut run = Run::start("eval");
    let mut outputs: Vec<&Path> = vec![&a.report_out];
    outputs.extend(a.json_out.as_deref());
    outputs.extend(a.trace_out.as_deref());
    outputs.extend(a.instance_out.as_deref());
    outputs.extend(a.bus_out.as_deref());
    check_distinct(&[&a.model, &a.data], &outputs)?;
    if a.runs < 1 {
        return Err(usage("--runs must be at least 1"));
    }
    let hp = hyperparams(&a.training, None)?;

    let model = load_model(&a.model)?;
    run.input(&a.model);
    let series = load_series(&a.data)?;
    run.input(&a.data);
    if series.n_buses() != model.n_buses() {
        return Err(gridcast::Error::Shape {
            context: "dataset bus count",
            expected: model.n_buses().to_string(),
            actual: series.n_buses().to_string(),
        }
        .into());
    }
    let data = prepare(&series, model.config.lag, a.training.train_fraction)?;
    let (model_metrics, trace) = evaluate(&model, &data.test_windows)?;

    let arch = model.config.architecture;
    let mut rows = Vec::new();
    let mut runs: Vec<(&'static str, MultiRunReport)> = Vec::new();
    if a.runs == 1 {
        rows.push(ComparisonRow {
            method: method_name(arch).into(),
            metrics: model_metrics,
            spread: None,
        });
    } else {
        let r = multi_run(&model.config, &data, &hp, a.runs)?;
        rows.push(learned_row(method_name(arch), &r));
        runs.push((method_name(arch), r));
    }
    let mut compare = a.compare.clone();
    compare.dedup();
    for c in compare {
        let other = match c {
            CompareArg::Persistence => {
                if rows.iter().all(|r| r.method != "persistence") {
                    rows.push(persistence_row(&data)?);
                }
                continue;
            }
            CompareArg::Hybrid => Architecture::Hybrid,
            CompareArg::RnnOnly => Architecture::RnnOnly,
        };
        if rows.iter().any(|r| r.method == method_name(other)) {
            continue;
        }
        let cfg = ModelConfig {
            architecture: other,
            ..model.config.clone()
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        let r = multi_run(&cfg, &data, &hp, a.runs)?;
        rows.push(learned_row(method_name(other), &r));
        runs.push((method_name(other), r));
    }

    let mut notes = standard_notes(&data);
    if !runs.is_empty() {
        notes.push(format!(
            "retrained rows: {} epochs, batch {}, lr {}, seeds {}..={}",
            hp.epochs,
            hp.batch_size,
            hp.adam.learning_rate,
            hp.seed,
            hp.seed + a.runs as u64 - 1
        ));
    }
    if a.runs == 1 {
        notes.push(format!("{} row scores the model file as given", method_name(arch)));
    }
    let comparison = Comparison { rows, notes };

    run.seed("retrain_base", hp.seed).format("eval_report", REPORT_FORMAT_VERSION);
    run.write(&a.report_out, comparison.to_table().as_bytes())?;
    if let Some(p) = &a.json_out {
        let report = EvalReport {
            format_version: REPORT_FORMAT_VERSION,
            architecture: arch,
            model_metrics,
            comparison: &comparison,
            runs: runs.iter().map(|(m, r)| (*m, r)).collect(),
        };
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        run.write(p, text.as_bytes())?;
    }
    if let Some(p) = &a.trace_out {
        run.write(p, trace.to_csv().as_bytes())?;
    }
    if let (Some(i), Some(p)) = (a.slice_instance, &a.instance_out) {
        let rows = trace.at_instance(i).map_err(|e| usage(e.to_string()))?;
        run.write(p, rows_to_csv(rows).as_bytes())?;
    }
    if let (Some(b), Some(p)) = (a.slice_bus, &a.bus_out) {
        let range = match &a.slice_range {
            Some(text) => parse_range(text, trace.n_instances())?,
            None => 1..=trace.n_instances(),
        };
        let rows = trace.bus_over(b, range).map_err(|e| usage(e.to_string()))?;
        run.write(p, rows_to_csv(rows).as_bytes())?;
    }
    print!("{}", comparison.to_table());
    run.finish(a, Some(&a.report_out))
}

pub fn forecast(a: &ForecastArgs) -> CliResult {
    let mut run = Run::start("forecast");
    if let Some(out) = &a.out {
        check_distinct(&[&a.model, &a.data], &[out])?;
    }
    let model = load_model(&a.model)?;
    run.input(&a.model);
    let series = load_series(&a.data)?;
    run.input(&a.data);
    let n = model.n_buses();
    if series.n_buses() != n {
        return Err(gridcast::Error::Shape {
            context: "dataset bus count",
            expected: n.to_string(),
            actual: series.n_buses().to_string(),
        }
        .into());
    }
    let lag = model.config.lag;
    let k = a.at_instance;
    if k < lag + 1 || k > series.len() + 1 {
        return Err(gridcast::Error::InvalidArgument(format!(
            "--at-instance {k} outside {}..={} for lag {lag} and {} instances",
            lag + 1,
            series.len() + 1,
            series.len()
        ))
        .into());
    }
    let columns: Vec<&[f64]> = series.states()[k - 1 - lag..k - 1].iter().map(|s| s.as_slice()).collect();
    let window = Matrix::from_columns(&columns)?;
    let forecast = if a.persistence {
        persistence_baseline(&window)?
    } else {
        model.forecast_next(&window)?
    };

    let mut csv = String::from("row");
    (1..=n).for_each(|i| write!(csv, ",vm_{i}").unwrap());
    (1..=n).for_each(|i| write!(csv, ",va_{i}").unwrap());
    csv.push('\n');
    let mut push_row = |name: &str, values: &[f64]| {
        csv.push_str(name);
        values.iter().for_each(|v| write!(csv, ",{v}").unwrap());
        csv.push('\n');
    };
    push_row("forecast", forecast.as_slice());
    if k <= series.len() {
        let truth = series.state(k - 1);
        let ae: Vec<f64> = forecast
            .as_slice()
            .iter()
            .zip(truth.as_slice())
            .map(|(p, t)| (p - t).abs())
            .collect();
        push_row("truth", truth.as_slice());
        push_row("ae", &ae);
    }

    run.format("model", MODEL_FORMAT_VERSION);
    match &a.out {
        Some(p) => run.write(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    run.finish(a, a.out.as_deref())
}
