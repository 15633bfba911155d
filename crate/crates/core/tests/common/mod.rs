//! Test-only oracles shared by the integration suites.

#![allow(dead_code)]

use gridcast::forecaster::Network;
use gridcast::layers::{
    layer_backward, layer_forward, Activation, ConvParams, DenseParams, ForwardCache, Layer,
    ParamGrads, RnnLayerParams, Signal,
};
use gridcast::training::joint_loss;
use gridcast::{Architecture, Matrix, ModelConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
/// Gradients smaller than this in both routes are compared on an absolute
/// scale of `FD_REL_TOL * FD_FLOOR`.
pub const FD_FLOOR: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, uniform(rng, rows * cols)).unwrap()
}

/// Central-difference gradient of `f` at `x`.
pub fn central_difference(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + FD_STEP;
            let up = f(&probe);
            probe[i] = orig - FD_STEP;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR)
}

/// Largest per-component relative error between the two routes.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

fn signal_values(s: &Signal) -> Vec<f64> {
    match s {
        Signal::Vector(v) => v.clone(),
        Signal::Matrix(m) => m.as_slice().to_vec(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A randomly drawn layer instance: parameters, input, and an upstream
/// weighting `u` that turns the layer output `y` into the scalar `u·y`.
pub enum LayerCase {
    Relu { input: Vec<f64> },
    Conv { params: ConvParams, input: Matrix },
    MaxPool { input: Matrix },
    Flatten { input: Matrix },
    Dense { params: DenseParams, input: Vec<f64> },
    RnnCell { params: RnnLayerParams, below: Vec<f64>, prev: Vec<f64> },
    StackedRnn { layers: Vec<RnnLayerParams>, input: Matrix },
}

pub const LAYER_KINDS: [&str; 8] = [
    "relu", "conv1d", "maxpool", "flatten", "dense-relu", "dense-linear", "rnn-cell", "stacked-rnn",
];

impl LayerCase {
    pub fn random(kind: &str, seed: u64) -> Self {
        let mut r = rng(seed);
        let rows = r.random_range(1..=3) * 2;
        let cols = r.random_range(3..=6);
        match kind {
            "relu" => LayerCase::Relu { input: uniform(&mut r, 7) },
            "conv1d" => {
                let k = r.random_range(1..=3);
                let mut params = ConvParams::zeros(k, rows, 2);
                params.weight = random_matrix(&mut r, k, rows * 2);
                params.bias = uniform(&mut r, k);
                LayerCase::Conv { params, input: random_matrix(&mut r, rows, cols) }
            }
            "maxpool" => LayerCase::MaxPool { input: random_matrix(&mut r, rows, cols) },
            "flatten" => LayerCase::Flatten { input: random_matrix(&mut r, rows, cols) },
            "dense-relu" | "dense-linear" => {
                let (o, i) = (r.random_range(1..=5), r.random_range(1..=5));
                let with_bias = r.random_bool(0.5);
                let params = DenseParams {
                    weight: random_matrix(&mut r, o, i),
                    bias: with_bias.then(|| uniform(&mut r, o)),
                    activation: if kind == "dense-relu" { Activation::Relu } else { Activation::Linear },
                };
                LayerCase::Dense { params, input: uniform(&mut r, i) }
            }
            "rnn-cell" => {
                let (h, d) = (r.random_range(1..=4), r.random_range(1..=4));
                let params = RnnLayerParams {
                    input_weight: random_matrix(&mut r, h, d),
                    recurrent_weight: random_matrix(&mut r, h, h),
                    bias: uniform(&mut r, h),
                };
                LayerCase::RnnCell { params, below: uniform(&mut r, d), prev: uniform(&mut r, h) }
            }
            "stacked-rnn" => {
                let h = r.random_range(2..=4);
                let mut layers = Vec::new();
                for l in 0..3 {
                    let d = if l == 0 { rows } else { h };
                    layers.push(RnnLayerParams {
                        input_weight: random_matrix(&mut r, h, d),
                        recurrent_weight: random_matrix(&mut r, h, h),
                        bias: uniform(&mut r, h),
                    });
                }
                LayerCase::StackedRnn { layers, input: random_matrix(&mut r, rows, cols) }
            }
            other => panic!("unknown layer kind {other}"),
        }
    }

    /// All differentiable scalars of the case: parameters, then inputs.
    fn flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        match self {
            LayerCase::Relu { input } => v.extend(input),
            LayerCase::Conv { params, input } => {
                v.extend(params.weight.as_slice());
                v.extend(&params.bias);
                v.extend(input.as_slice());
            }
            LayerCase::MaxPool { input } | LayerCase::Flatten { input } => v.extend(input.as_slice()),
            LayerCase::Dense { params, input } => {
                v.extend(params.weight.as_slice());
                if let Some(b) = &params.bias {
                    v.extend(b);
                }
                v.extend(input);
            }
            LayerCase::RnnCell { params, below, prev } => {
                push_rnn(&mut v, params);
                v.extend(below);
                v.extend(prev);
            }
            LayerCase::StackedRnn { layers, input } => {
                layers.iter().for_each(|p| push_rnn(&mut v, p));
                v.extend(input.as_slice());
            }
        }
        v
    }

    fn with_flat(&self, flat: &[f64]) -> Self {
        let mut it = flat.iter().copied();
        let mut take = |n: usize| -> Vec<f64> { (&mut it).take(n).collect() };
        match self {
            LayerCase::Relu { input } => LayerCase::Relu { input: take(input.len()) },
            LayerCase::Conv { params, input } => {
                let (k, w) = params.weight.shape();
                let mut p = params.clone();
                p.weight = Matrix::from_vec(k, w, take(k * w)).unwrap();
                p.bias = take(k);
                let (r, c) = input.shape();
                LayerCase::Conv { params: p, input: Matrix::from_vec(r, c, take(r * c)).unwrap() }
            }
            LayerCase::MaxPool { input } => {
                let (r, c) = input.shape();
                LayerCase::MaxPool { input: Matrix::from_vec(r, c, take(r * c)).unwrap() }
            }
            LayerCase::Flatten { input } => {
                let (r, c) = input.shape();
                LayerCase::Flatten { input: Matrix::from_vec(r, c, take(r * c)).unwrap() }
            }
            LayerCase::Dense { params, input } => {
                let (o, i) = params.weight.shape();
                let mut p = params.clone();
                p.weight = Matrix::from_vec(o, i, take(o * i)).unwrap();
                if p.bias.is_some() {
                    p.bias = Some(take(o));
                }
                LayerCase::Dense { params: p, input: take(input.len()) }
            }
            LayerCase::RnnCell { params, below, prev } => {
                let p = take_rnn(&mut take, params);
                LayerCase::RnnCell { params: p, below: take(below.len()), prev: take(prev.len()) }
            }
            LayerCase::StackedRnn { layers, input } => {
                let ls = layers.iter().map(|p| take_rnn(&mut take, p)).collect();
                let (r, c) = input.shape();
                LayerCase::StackedRnn { layers: ls, input: Matrix::from_vec(r, c, take(r * c)).unwrap() }
            }
        }
    }

    fn layer(&self) -> (Layer<'_>, Signal) {
        match self {
            LayerCase::Relu { input } => (Layer::Relu, Signal::Vector(input.clone())),
            LayerCase::Conv { params, input } => (Layer::Conv1d(params), Signal::Matrix(input.clone())),
            LayerCase::MaxPool { input } => (Layer::MaxPool, Signal::Matrix(input.clone())),
            LayerCase::Flatten { input } => (Layer::Flatten, Signal::Matrix(input.clone())),
            LayerCase::Dense { params, input } => (Layer::Dense(params), Signal::Vector(input.clone())),
            LayerCase::RnnCell { params, below, .. } => (Layer::RnnCell(params), Signal::Vector(below.clone())),
            LayerCase::StackedRnn { layers, input } => (Layer::StackedRnn(layers), Signal::Matrix(input.clone())),
        }
    }

    /// Layer output computed directly, without the dispatcher.
    fn output(&self) -> Vec<f64> {
        match self {
            LayerCase::RnnCell { params, below, prev } => {
                gridcast::layers::rnn_cell_step(params, below, prev).unwrap()
            }
            _ => {
                let (layer, input) = self.layer();
                signal_values(&layer_forward(layer, &input).unwrap().0)
            }
        }
    }

    /// Analytical gradient of `u·y` through `layer_backward`, in `flat` order.
    fn analytic(&self, upstream: &[f64]) -> Vec<f64> {
        let (layer, input) = self.layer();
        let (out, cache) = match self {
            LayerCase::RnnCell { params, below, prev } => {
                let (y, c) = gridcast::layers::rnn_cell_forward(params, below, prev).unwrap();
                (Signal::Vector(y), ForwardCache::RnnCell(c))
            }
            _ => layer_forward(layer, &input).unwrap(),
        };
        let up = match out {
            Signal::Vector(_) => Signal::Vector(upstream.to_vec()),
            Signal::Matrix(m) => Signal::Matrix(Matrix::from_vec(m.rows(), m.cols(), upstream.to_vec()).unwrap()),
        };
        let g = layer_backward(layer, Some(&cache), &up).unwrap();
        let mut v = Vec::new();
        match g.params {
            ParamGrads::None => {}
            ParamGrads::Conv1d(p) => {
                v.extend(p.weight.as_slice());
                v.extend(&p.bias);
            }
            ParamGrads::Dense(p) => {
                v.extend(p.weight.as_slice());
                if let Some(b) = &p.bias {
                    v.extend(b);
                }
            }
            ParamGrads::RnnCell(p) => push_rnn(&mut v, &p),
            ParamGrads::StackedRnn(ps) => ps.iter().for_each(|p| push_rnn(&mut v, p)),
        }
        v.extend(signal_values(&g.input));
        if let Some(prev) = g.prev_hidden {
            v.extend(prev);
        }
        v
    }

    /// `(analytic, numeric)` gradients of `u·y` for a random `u`.
    pub fn gradients(&self, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let out_len = self.output().len();
        let upstream = uniform(&mut rng(seed ^ 0x5eed), out_len);
        let analytic = self.analytic(&upstream);
        let numeric = central_difference(&self.flat(), |x| dot(&self.with_flat(x).output(), &upstream));
        (analytic, numeric)
    }
}

fn push_rnn(v: &mut Vec<f64>, p: &RnnLayerParams) {
    v.extend(p.input_weight.as_slice());
    v.extend(p.recurrent_weight.as_slice());
    v.extend(&p.bias);
}

fn take_rnn(take: &mut impl FnMut(usize) -> Vec<f64>, p: &RnnLayerParams) -> RnnLayerParams {
    let (h, d) = p.input_weight.shape();
    RnnLayerParams {
        input_weight: Matrix::from_vec(h, d, take(h * d)).unwrap(),
        recurrent_weight: Matrix::from_vec(h, h, take(h * h)).unwrap(),
        bias: take(h),
    }
}

/// The tiny whole-model configuration: n=2, r=3, K=2, H=4, L=3.
pub fn tiny_config() -> ModelConfig {
    let mut cfg = ModelConfig::new(2, 3);
    cfg.conv_filters = 2;
    cfg.rnn_hidden = 4;
    cfg.rnn_layers = 3;
    cfg
}

/// `(analytic, numeric)` gradients of the joint loss for a random network,
/// window, and target under `cfg`.
pub fn whole_model_gradients(cfg: &ModelConfig, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let mut net = Network::zeros(cfg);
    let flat = uniform(&mut r, net.param_count());
    net.set_flat(&flat).unwrap();
    let window = random_matrix(&mut r, cfg.n_features(), cfg.lag);
    let target = uniform(&mut r, cfg.n_features());

    let (_, grads) = gridcast::training::loss_and_grad(&net, &window, &target).unwrap();
    let analytic = grads.to_flat();
    let numeric = central_difference(&flat, |x| {
        let mut probe = net.clone();
        probe.set_flat(x).unwrap();
        let (out, _) = probe.forward(&window).unwrap();
        joint_loss(&out, &target).unwrap().0
    });
    (analytic, numeric)
}

/// The dataset shipped in `data/`: 14 buses, 2000 instances, seed 7.
pub fn shipped_config() -> gridcast::data::SyntheticConfig {
    gridcast::data::SyntheticConfig::with_random_profile(14, 2000, 7)
}

pub fn shipped_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_14bus.csv")
}

pub fn random_config(seed: u64) -> ModelConfig {
    let mut g = rng(seed);
    let n = g.random_range(1..=6);
    let lag = g.random_range(3..=12);
    ModelConfig {
        architecture: if g.random_bool(0.75) { Architecture::Hybrid } else { Architecture::RnnOnly },
        conv_filters: g.random_range(1..=5),
        dense1_width: g.random_range(1..=9),
        dense1_bias: g.random_bool(0.5),
        rnn_layers: g.random_range(1..=4),
        rnn_hidden: g.random_range(1..=9),
        ..ModelConfig::new(n, lag)
    }
}

/// Count written out layer by layer, independent of the library's formula.
pub fn enumerate_params(cfg: &ModelConfig) -> usize {
    let f = 2 * cfg.n_buses;
    let h = cfg.rnn_hidden;
    let mut total = 0;
    if cfg.architecture == Architecture::Hybrid {
        let flat = cfg.conv_filters * ((cfg.lag - 1) / 2);
        total += cfg.conv_filters * (f * 2 + 1);
        total += cfg.dense1_width * flat + if cfg.dense1_bias { cfg.dense1_width } else { 0 };
        total += cfg.n_buses * cfg.dense1_width + cfg.n_buses;
    }
    for l in 0..cfg.rnn_layers {
        let d = if l == 0 { f } else { h };
        total += h * d + h * h + h;
    }
    let head = if cfg.architecture == Architecture::Hybrid { cfg.n_buses } else { f };
    total + head * h + head
}
