mod common;

use common::{shipped_config, tiny_config, uniform, rng};
use gridcast::data::{generate_synthetic_series, SyntheticConfig};
use gridcast::forecaster::Network;
use gridcast::training::{
    adam_step, fit, loss_and_grad, mean_loss, multi_run, normalize_samples, train, AdamConfig,
    AdamState, Branch,
};
use gridcast::{init_model, Error, Hyperparams, ModelConfig, PreparedData};

fn small_data(seed: u64) -> PreparedData {
    let series = generate_synthetic_series(&SyntheticConfig::with_random_profile(3, 160, seed)).unwrap();
    PreparedData::new(&series, 6, 0.8).unwrap()
}

#[test]
fn zero_gradient_adam_step_is_a_no_op() {
    let model = init_model(&ModelConfig::new(4, 10), 2).unwrap();
    let mut flat = model.network.to_flat();
    let before = flat.clone();
    let zeros = vec![0.0; flat.len()];
    let mut state = AdamState::new(flat.len());
    for _ in 0..3 {
        adam_step(&mut flat, &zeros, &mut state, &AdamConfig::default()).unwrap();
    }
    assert_eq!(flat, before);
}

#[test]
fn first_epoch_lowers_training_loss_on_shipped_data() {
    let series = generate_synthetic_series(&shipped_config()).unwrap();
    let data = PreparedData::new(&series, 10, 0.8).unwrap();
    let mut model = init_model(&ModelConfig::new(14, 10), Hyperparams::default().seed).unwrap();
    model.normalizer = data.normalizer.clone();
    let samples = normalize_samples(&model, &data.train_windows).unwrap();
    let before = mean_loss(&model.network, &samples).unwrap();
    let hp = Hyperparams { epochs: 1, ..Hyperparams::default() };
    let (trained, _) = train(model, &data.train_windows, &hp).unwrap();
    let after = mean_loss(&trained.network, &samples).unwrap();
    assert!(after < before, "{after} !< {before}");
}

#[test]
fn each_loss_half_only_reaches_its_own_branch() {
    let cfg = tiny_config();
    let n = cfg.n_buses;
    for seed in 0..20 {
        let mut g = rng(seed);
        let mut net = Network::zeros(&cfg);
        net.set_flat(&uniform(&mut g, net.param_count())).unwrap();
        let window = common::random_matrix(&mut g, cfg.n_features(), cfg.lag);
        let (out, cache) = net.forward(&window).unwrap();
        let (cnn, rnn) = net.branch_ranges();

        let mut d = out.clone();
        d[n..].iter_mut().for_each(|v| *v = 0.0);
        let g_vm = net.backward(&cache, &d).unwrap().to_flat();
        assert!(g_vm[rnn.clone()].iter().all(|&v| v == 0.0));

        let mut d = out;
        d[..n].iter_mut().for_each(|v| *v = 0.0);
        let g_va = net.backward(&cache, &d).unwrap().to_flat();
        assert!(g_va[cnn].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn loss_and_grad_covers_every_parameter() {
    let cfg = tiny_config();
    let net = Network::init(&cfg, 4);
    let window = common::random_matrix(&mut rng(4), cfg.n_features(), cfg.lag);
    let target = uniform(&mut rng(5), cfg.n_features());
    let (loss, grads) = loss_and_grad(&net, &window, &target).unwrap();
    assert!(loss > 0.0);
    assert_eq!(grads.param_count(), net.param_count());
}

#[test]
fn training_is_deterministic() {
    let data = small_data(1);
    let hp = Hyperparams { epochs: 3, seed: 9, ..Hyperparams::default() };
    let (a, ra) = fit(&ModelConfig::new(3, 6), &data, &hp).unwrap();
    let (b, rb) = fit(&ModelConfig::new(3, 6), &data, &hp).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.epoch_losses, rb.epoch_losses);
    assert_eq!(ra.epoch_losses.len(), 3);
    assert_eq!(serde_json::to_string(&ra).unwrap(), serde_json::to_string(&rb).unwrap());
}

#[test]
fn frozen_branch_keeps_its_initial_values() {
    let data = small_data(2);
    let cfg = ModelConfig::new(3, 6);
    let hp = Hyperparams { epochs: 2, seed: 3, freeze: Some(Branch::Cnn), ..Hyperparams::default() };
    let (trained, _) = fit(&cfg, &data, &hp).unwrap();
    let initial = init_model(&cfg, 3).unwrap();
    let (cnn, rnn) = initial.network.branch_ranges();
    let (a, b) = (initial.network.to_flat(), trained.network.to_flat());
    assert_eq!(a[cnn.clone()], b[cnn]);
    assert_ne!(a[rnn.clone()], b[rnn]);

    let rnn_only = ModelConfig::rnn_only(3, 6);
    assert!(fit(&rnn_only, &data, &hp).is_err());
}

#[test]
fn divergence_is_reported_with_position() {
    let data = small_data(3);
    let mut hp = Hyperparams { epochs: 50, seed: 1, ..Hyperparams::default() };
    hp.adam.learning_rate = 1e300;
    match fit(&ModelConfig::new(3, 6), &data, &hp) {
        Err(Error::Diverged { epoch, .. }) => assert!(epoch < 50),
        other => panic!("expected divergence, got {:?}", other.map(|(_, r)| r.final_train_loss)),
    }
}

#[test]
fn multi_run_is_deterministic_and_seed_ordered() {
    let data = small_data(4);
    let hp = Hyperparams { epochs: 2, seed: 10, ..Hyperparams::default() };
    let a = multi_run(&ModelConfig::new(3, 6), &data, &hp, 3).unwrap();
    let b = multi_run(&ModelConfig::new(3, 6), &data, &hp, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![10, 11, 12]);
    assert_eq!(a.completed, 3);

    let single = multi_run(&ModelConfig::new(3, 6), &data, &hp, 1).unwrap();
    let (_, report) = fit(&ModelConfig::new(3, 6), &data, &hp).unwrap();
    assert_eq!(single.mean_nrmse, report.test_nrmse.unwrap());
    assert_eq!(single.std_nrmse, 0.0);
}
