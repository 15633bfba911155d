//! Trains the hybrid and RNN-only forecasters on the default 14-bus
//! synthetic series and prints the comparison table.
//!
//! cargo run --release -p gridcast --example synthetic_benchmark -- [epochs] [runs]

use gridcast::data::{generate_synthetic_series, PreparedData, SyntheticConfig, DEFAULT_TRAIN_FRACTION};
use gridcast::evaluation::compare_methods;
use gridcast::{Hyperparams, ModelConfig};

fn main() -> gridcast::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let epochs = args.next().unwrap_or(gridcast::training::DEFAULT_EPOCHS);
    let runs = args.next().unwrap_or(5);

    let series = generate_synthetic_series(&SyntheticConfig::with_random_profile(14, 2000, 7))?;
    let data = PreparedData::new(&series, 10, DEFAULT_TRAIN_FRACTION)?;
    let hp = Hyperparams {
        epochs,
        ..Hyperparams::default()
    };
    let started = std::time::Instant::now();
    let table = compare_methods(&ModelConfig::new(14, 10), &data, &hp, runs)?;
    print!("{}", table.to_table());
    println!("elapsed: {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
