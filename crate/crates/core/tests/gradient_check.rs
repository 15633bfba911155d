mod common;

use common::{
    max_relative_error, tiny_config, whole_model_gradients, LayerCase, FD_REL_TOL, LAYER_KINDS,
};
use gridcast::ModelConfig;

const SEEDS: u64 = 100;

#[test]
fn every_layer_matches_finite_differences() {
    for kind in LAYER_KINDS {
        let mut worst = 0.0f64;
        for seed in 0..SEEDS {
            let case = LayerCase::random(kind, seed);
            let (analytic, numeric) = case.gradients(seed);
            let err = max_relative_error(&analytic, &numeric);
            assert!(err <= FD_REL_TOL, "{kind} seed {seed}: relative error {err:e}");
            worst = worst.max(err);
        }
        eprintln!("{kind:<14} worst relative error over {SEEDS} seeds: {worst:.2e}");
    }
}

#[test]
fn hybrid_model_matches_finite_differences() {
    let cfg = tiny_config();
    for seed in 0..SEEDS {
        let (analytic, numeric) = whole_model_gradients(&cfg, seed);
        let err = max_relative_error(&analytic, &numeric);
        assert!(err <= FD_REL_TOL, "seed {seed}: relative error {err:e}");
    }
}

#[test]
fn rnn_only_model_matches_finite_differences() {
    let cfg = ModelConfig { architecture: gridcast::Architecture::RnnOnly, ..tiny_config() };
    for seed in 0..SEEDS {
        let (analytic, numeric) = whole_model_gradients(&cfg, seed);
        let err = max_relative_error(&analytic, &numeric);
        assert!(err <= FD_REL_TOL, "seed {seed}: relative error {err:e}");
    }
}
