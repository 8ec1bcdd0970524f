//! Analytic gradients against 64-bit central differences.

use pricefuse_core::models::{
    build_model_1, build_model_2, build_model_3, build_model_4, build_model_5, Architecture,
    EmbeddingProvider, ModelGraph, ModelInput,
};
use pricefuse_core::nn::gradcheck::{check_layer, check_model, relative_error};
use pricefuse_core::nn::{L1Placement, Layer, ParamRole};
use pricefuse_core::tensor::{concat_columns, split_columns};
use pricefuse_core::{Rng, Tensor};

const TOLERANCE: f64 = 1e-3;
const DRAWS: u64 = 10;
const STEP: f64 = 1e-6;

fn random(shape: &[usize], rng: &mut Rng) -> Tensor<f64> {
    Tensor::from_fn(shape.to_vec(), |_| rng.uniform_range(-1.0, 1.0))
}

fn check_layer_draws(name: &str, make: impl Fn(&mut Rng) -> Layer<f64>, input_shape: &[usize]) {
    for seed in 0..DRAWS {
        let mut rng = Rng::seed_from_u64(seed);
        let mut layer = make(&mut rng);
        let x = random(input_shape, &mut rng);
        let res = check_layer(&mut layer, &x, STEP, 200, &mut rng).unwrap();
        assert!(
            res.max_relative_error < TOLERANCE,
            "{name} draw {seed}: relative error {} ({:?})",
            res.max_relative_error,
            res.per_tensor
        );
    }
}

#[test]
fn dense_layer() {
    check_layer_draws("dense", |r| Layer::dense(7, 5, r), &[3, 7]);
}

#[test]
fn conv2d_layer() {
    check_layer_draws("conv2d", |r| Layer::conv2d(3, 2, 3, r), &[2, 6, 6, 2]);
}

#[test]
fn maxpool2d_layer() {
    check_layer_draws("maxpool2d", |_| Layer::maxpool2d(2, 2), &[2, 6, 6, 2]);
    check_layer_draws(
        "maxpool2d overlapping",
        |_| Layer::maxpool2d(3, 1),
        &[1, 5, 5, 3],
    );
}

#[test]
fn flatten_layer() {
    check_layer_draws("flatten", |_| Layer::flatten(), &[2, 3, 3, 2]);
}

#[test]
fn relu_layer() {
    check_layer_draws("relu", |_| Layer::relu(), &[4, 9]);
}

#[test]
fn softmax_layer() {
    check_layer_draws("softmax", |_| Layer::softmax(), &[3, 4]);
}

#[test]
fn reshape_layer() {
    check_layer_draws("reshape", |_| Layer::reshape(vec![3, 3, 1]), &[2, 7]);
}

#[test]
fn concat_node() {
    // The fusion node is column concatenation; its backward is the column split.
    for seed in 0..DRAWS {
        let mut rng = Rng::seed_from_u64(seed);
        let a = random(&[3, 4], &mut rng);
        let b = random(&[3, 2], &mut rng);
        let r = random(&[3, 6], &mut rng);
        let objective = |a: &Tensor<f64>, b: &Tensor<f64>| -> f64 {
            let y = concat_columns(&[a, b]).unwrap();
            y.data().iter().zip(r.data()).map(|(p, q)| p * q).sum()
        };
        let grads = split_columns(&r, &[4, 2]).unwrap();
        for (which, analytic) in grads.iter().enumerate() {
            let mut numeric = Vec::new();
            for c in 0..analytic.len() {
                let (mut ap, mut bp) = (a.clone(), b.clone());
                let (mut am, mut bm) = (a.clone(), b.clone());
                let (tp, tm) = if which == 0 {
                    (&mut ap, &mut am)
                } else {
                    (&mut bp, &mut bm)
                };
                tp.data_mut()[c] += STEP;
                tm.data_mut()[c] -= STEP;
                numeric.push((objective(&ap, &bp) - objective(&am, &bm)) / (2.0 * STEP));
            }
            assert!(relative_error(analytic.data(), &numeric) < TOLERANCE);
        }
    }
}

fn mini_arch() -> Architecture {
    Architecture {
        tabular_hidden: [6, 5],
        head_hidden: 5,
        kernel: 3,
        image_filters: vec![2, 3, 2],
        tabular_filters: vec![2, 2],
        pool_window: 2,
        pool_stride: 2,
        branch_dense: 4,
    }
}

fn check_model_draws(
    name: &str,
    build: impl Fn(&mut Rng) -> ModelGraph<f64>,
    tab: usize,
    image: Option<&[usize]>,
) {
    for seed in 0..DRAWS {
        let mut rng = Rng::seed_from_u64(1000 + seed);
        let mut model = build(&mut rng);
        // Builders zero the biases; a draw randomizes them so that no
        // pre-activation sits exactly on a ReLU kink.
        for p in model.params_mut() {
            if p.role == ParamRole::Bias {
                p.value = random(p.value.shape(), &mut rng).map(|v| 0.1 * v);
            }
        }
        let batch = 3;
        let x = random(&[batch, tab], &mut rng);
        let img = image.map(|s| {
            let mut shape = vec![batch];
            shape.extend_from_slice(s);
            Tensor::from_fn(shape, |_| rng.uniform())
        });
        let labels: Vec<usize> = (0..batch).map(|_| rng.below(4)).collect();
        let placement = if seed % 2 == 0 {
            L1Placement::OutputLayer
        } else {
            L1Placement::AllWeights
        };
        let input = ModelInput {
            tabular: &x,
            image: img.as_ref(),
        };
        let res = check_model(
            &mut model, input, &labels, 0.1, placement, STEP, 40, &mut rng,
        )
        .unwrap();
        assert!(
            res.max_relative_error < TOLERANCE,
            "{name} draw {seed}: relative error {} ({:?})",
            res.max_relative_error,
            res.per_tensor
        );
    }
}

#[test]
fn model_1_miniature() {
    check_model_draws(
        "model 1",
        |r| build_model_1(12, &mini_arch(), r).unwrap(),
        12,
        None,
    );
}

#[test]
fn model_2_miniature() {
    check_model_draws(
        "model 2",
        |r| {
            build_model_2(
                12,
                &EmbeddingProvider::ExternalFile {
                    path: "e.pft".into(),
                    width: 9,
                },
                &mini_arch(),
                r,
            )
            .unwrap()
        },
        12,
        Some(&[9]),
    );
}

#[test]
fn model_3_miniature() {
    check_model_draws(
        "model 3",
        |r| build_model_3(10, [22, 22, 1], &mini_arch(), r).unwrap(),
        10,
        Some(&[22, 22, 1]),
    );
}

#[test]
fn model_4_miniature() {
    check_model_draws(
        "model 4",
        |r| build_model_4(82, [22, 22, 1], &mini_arch(), r).unwrap(),
        82,
        Some(&[22, 22, 1]),
    );
}

#[test]
fn model_5_miniature() {
    check_model_draws(
        "model 5",
        |r| build_model_5(82, [22, 22, 1], &mini_arch(), r).unwrap(),
        82,
        Some(&[22, 22, 1]),
    );
}
