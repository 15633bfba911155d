mod common;

use common::{random_matrix, rng};
use gridcast::layers::{
    conv1d_forward, flatten, layer_forward, maxpool_forward, stacked_rnn_forward, unflatten,
    ConvParams, Layer, RnnLayerParams, Signal,
};
use gridcast::{Matrix, ModelConfig};
use proptest::prelude::*;

fn conv_chain(n: usize, r: usize, k: usize, seed: u64) -> ((usize, usize), (usize, usize), usize) {
    let mut g = rng(seed);
    let mut params = ConvParams::zeros(k, 2 * n, 2);
    params.weight = random_matrix(&mut g, k, 4 * n);
    let x = random_matrix(&mut g, 2 * n, r);
    let (maps, _) = conv1d_forward(&x, &params).unwrap();
    let (pooled, _) = maxpool_forward(&maps, 2).unwrap();
    (maps.shape(), pooled.shape(), flatten(&pooled).len())
}

#[test]
fn full_scale_chain() {
    let (conv, pooled, flat) = conv_chain(118, 10, 118, 0);
    assert_eq!(conv, (118, 9));
    assert_eq!(pooled, (118, 4));
    assert_eq!(flat, 472);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shape_algebra(n in 1usize..6, r in 3usize..14, k in 1usize..6, seed in any::<u64>()) {
        let (conv, pooled, flat) = conv_chain(n, r, k, seed);
        prop_assert_eq!(conv, (k, r - 1));
        prop_assert_eq!(pooled, (k, (r - 1) / 2));
        prop_assert_eq!(flat, k * ((r - 1) / 2));
        let cfg = ModelConfig { conv_filters: k, ..ModelConfig::new(n, r) };
        prop_assert_eq!(cfg.flat_width(), flat);
    }

    #[test]
    // The layer applies ReLU to the feature maps, so the oracle does too.
    fn single_filter_conv_is_a_dot_product_loop(n in 1usize..4, r in 2usize..7, seed in any::<u64>()) {
        prop_assume!(2 * n * r <= 24);
        let mut g = rng(seed);
        let filter = random_matrix(&mut g, 2 * n, 2);
        let bias = 0.25;
        let params = ConvParams::from_filters(&[(filter.clone(), bias)]).unwrap();
        let x = random_matrix(&mut g, 2 * n, r);
        let (maps, _) = conv1d_forward(&x, &params).unwrap();
        for p in 0..r - 1 {
            let mut acc = bias;
            for i in 0..2 * n {
                for j in 0..2 {
                    acc += filter.get(i, j) * x.get(i, p + j);
                }
            }
            let expected = acc.max(0.0);
            prop_assert!((maps.get(0, p) - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn pooling_commutes_with_positive_shift(rows in 1usize..5, cols in 2usize..10, c in 0.0f64..10.0, seed in any::<u64>()) {
        let m = random_matrix(&mut rng(seed), rows, cols);
        let shifted = Matrix::from_vec(rows, cols, m.as_slice().iter().map(|v| v + c).collect()).unwrap();
        let (a, _) = maxpool_forward(&m, 2).unwrap();
        let (b, _) = maxpool_forward(&shifted, 2).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert_eq!(x + c, *y);
        }
    }

    #[test]
    fn flatten_is_a_bijection(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let m = random_matrix(&mut rng(seed), rows, cols);
        prop_assert_eq!(unflatten(&flatten(&m), rows, cols).unwrap(), m);
    }

    #[test]
    fn forward_passes_are_deterministic(rows in 1usize..5, cols in 2usize..8, h in 1usize..5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let x = random_matrix(&mut g, rows, cols);
        let layers: Vec<RnnLayerParams> = (0..3)
            .map(|l| RnnLayerParams {
                input_weight: random_matrix(&mut g, h, if l == 0 { rows } else { h }),
                recurrent_weight: random_matrix(&mut g, h, h),
                bias: vec![0.1; h],
            })
            .collect();
        let a = stacked_rnn_forward(&layers, &x).unwrap().0;
        let b = stacked_rnn_forward(&layers, &x).unwrap().0;
        prop_assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let s = Signal::Matrix(x);
        let p1 = layer_forward(Layer::MaxPool, &s).unwrap().0;
        let p2 = layer_forward(Layer::MaxPool, &s).unwrap().0;
        prop_assert_eq!(p1, p2);
    }
}

#[test]
fn two_column_window_has_nothing_to_pool() {
    let maps = Matrix::zeros(3, 1);
    assert!(maxpool_forward(&maps, 2).is_err());
    assert!(ModelConfig::new(2, 2).validate().is_err());
}

#[test]
fn relu_gradient_at_zero_is_zero() {
    let g = gridcast::layers::relu_backward(&[0.0, -1.0, 2.0], &[1.0, 1.0, 1.0]);
    assert_eq!(g, vec![0.0, 0.0, 1.0]);
}

#[test]
fn pooling_ties_route_to_the_earliest_position() {
    let m = Matrix::from_rows(&[vec![3.0, 3.0, 1.0, 1.0]]).unwrap();
    let (pooled, cache) = maxpool_forward(&m, 2).unwrap();
    let up = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    let back = gridcast::layers::maxpool_backward(&cache, &up).unwrap();
    assert_eq!(pooled.as_slice(), &[3.0, 1.0]);
    assert_eq!(back.as_slice(), &[1.0, 0.0, 1.0, 0.0]);
}
