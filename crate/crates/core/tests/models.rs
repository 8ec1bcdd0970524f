use pricefuse_core::models::{
    build_model, build_model_1, build_model_2, build_model_3, build_model_4, build_model_5,
    extract_fused, predict_probs, Architecture, EmbeddingProvider, ImageInput, ModelGraph, ModelId,
    ModelInput, ModelSpec, Section,
};
use pricefuse_core::nn::{Layer, LayerKind};
use pricefuse_core::{Rng, Tensor};

fn arch() -> Architecture {
    Architecture::default()
}

fn small() -> Architecture {
    Architecture {
        tabular_hidden: [12, 8],
        head_hidden: 6,
        image_filters: vec![3, 4, 5],
        tabular_filters: vec![2, 3],
        branch_dense: 7,
        ..Default::default()
    }
}

fn rng() -> Rng {
    Rng::seed_from_u64(0)
}

fn random(shape: &[usize], seed: u64) -> Tensor<f32> {
    let mut r = Rng::seed_from_u64(seed);
    Tensor::from_fn(shape.to_vec(), |_| r.uniform() as f32)
}

fn batch(shape: &[usize], n: usize) -> Vec<usize> {
    let mut s = vec![n];
    s.extend_from_slice(shape);
    s
}

fn assert_simplex(p: &Tensor<f32>) {
    assert_eq!(p.row_len(), 4);
    for r in 0..p.rows() {
        assert!(p.row(r).iter().all(|&v| v >= 0.0));
        assert!((p.row(r).iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }
}

/// Independent shape oracle: run each layer's pure forward and record the
/// per-sample output shape.
fn forward_shapes(layers: &[Layer<f32>], x: &Tensor<f32>) -> (Vec<Vec<usize>>, Tensor<f32>) {
    let mut cur = x.clone();
    let mut shapes = Vec::new();
    for l in layers {
        cur = l.infer(&cur).unwrap();
        shapes.push(cur.shape()[1..].to_vec());
    }
    (shapes, cur)
}

fn check_shape_inference(model: &ModelGraph<f32>, tab: &Tensor<f32>, img: Option<&Tensor<f32>>) {
    let walk = model.shape_walk().unwrap();
    let (mut actual, t) = forward_shapes(model.tabular_layers(), tab);
    let mut parts = vec![t.reshape([t.rows(), t.row_len()]).unwrap()];
    if let (Some(layers), Some(x)) = (model.image_layers(), img) {
        let (s, i) = forward_shapes(layers, x);
        actual.extend(s);
        parts.push(i.reshape([i.rows(), i.row_len()]).unwrap());
    }
    let refs: Vec<&Tensor<f32>> = parts.iter().collect();
    let fused = pricefuse_core::tensor::concat_columns(&refs).unwrap();
    let (s, probs) = forward_shapes(model.head_layers(), &fused);
    actual.extend(s);
    let inferred: Vec<Vec<usize>> = walk.into_iter().map(|(_, _, s)| s).collect();
    assert_eq!(inferred, actual);
    assert_simplex(&probs);
}

#[test]
fn model_1_parameter_count() {
    for d in [1usize, 17, 100] {
        let m = build_model_1::<f32>(d, &arch(), &mut rng()).unwrap();
        assert_eq!(
            m.param_count(),
            d * 300 + 300 + 300 * 120 + 120 + 120 * 4 + 4
        );
    }
    assert!(build_model_1::<f32>(0, &arch(), &mut rng()).is_err());
}

#[test]
fn model_1_zero_vector_gives_simplex() {
    let m = build_model_1::<f32>(17, &arch(), &mut rng()).unwrap();
    let x = Tensor::zeros([1, 17]);
    assert_simplex(
        &m.infer(ModelInput {
            tabular: &x,
            image: None,
        })
        .unwrap()
        .probs,
    );
}

#[test]
fn model_2_concat_width_and_errors() {
    let provider = EmbeddingProvider::ExternalFile {
        path: "emb.pft".into(),
        width: 2048,
    };
    let m = build_model_2::<f32>(30, &provider, &arch(), &mut rng()).unwrap();
    assert_eq!(m.fused_width(), 2168);
    let err =
        build_model_2::<f32>(30, &EmbeddingProvider::InternalCnn, &arch(), &mut rng()).unwrap_err();
    assert_eq!(err.kind(), "model");
}

#[test]
fn model_2_zero_embeddings_ignore_image_weights() {
    let provider = EmbeddingProvider::ExternalFile {
        path: "emb.pft".into(),
        width: 16,
    };
    let m = build_model_2::<f32>(10, &provider, &small(), &mut rng()).unwrap();
    let tab = random(&[5, 10], 1);
    let emb = Tensor::zeros([5, 16]);
    let input = ModelInput {
        tabular: &tab,
        image: Some(&emb),
    };
    let base = m.infer(input).unwrap().probs;

    // Scramble the head weights that read the embedding columns.
    let mut perturbed = m.clone();
    let tw = perturbed.fused_parts()[0];
    let mut r = Rng::seed_from_u64(5);
    let w = &mut perturbed
        .params_mut()
        .into_iter()
        .find(|p| p.value.shape()[0] == tw + 16)
        .unwrap()
        .value;
    let cols = w.shape()[1];
    for v in &mut w.data_mut()[tw * cols..] {
        *v += r.normal() as f32;
    }
    assert_eq!(perturbed.infer(input).unwrap().probs, base);

    // With nonzero embeddings the same scramble does change the output.
    let emb = random(&[5, 16], 2);
    let input = ModelInput {
        tabular: &tab,
        image: Some(&emb),
    };
    assert_ne!(
        perturbed.infer(input).unwrap().probs,
        m.infer(input).unwrap().probs
    );
}

#[test]
fn model_3_full_size_shape_walk() {
    let m = build_model_3::<f32>(40, [128, 128, 3], &arch(), &mut rng()).unwrap();
    // 128 -conv-> 126 -pool-> 63 -conv-> 61 -pool-> 30 -conv-> 28 -pool-> 14.
    let mut side = 128;
    for _ in 0..3 {
        side = (side - 3 + 1 - 2) / 2 + 1;
    }
    assert_eq!(side, 14);
    let walk = m.shape_walk().unwrap();
    let flat = walk
        .iter()
        .find(|(s, d, _)| *s == Section::Image && d.starts_with("flatten"))
        .unwrap();
    assert_eq!(flat.2, vec![side * side * 64]);
    assert_eq!(m.fused_parts(), [120, 128]);
}

#[test]
fn model_3_rejects_tiny_images() {
    let err = build_model_3::<f32>(10, [8, 8, 1], &arch(), &mut rng()).unwrap_err();
    assert!(err.to_string().contains("stage 2"), "{err}");
}

#[test]
fn model_4_pads_to_square_and_has_no_branch_dense() {
    let m = build_model_4::<f32>(300, [32, 32, 3], &arch(), &mut rng()).unwrap();
    assert_eq!(
        m.tabular_layers()[0].output_shape(&[300]).unwrap(),
        vec![18, 18, 1]
    );
    for branch in [m.tabular_layers(), m.image_layers().unwrap()] {
        assert_eq!(branch.last().unwrap().kind(), LayerKind::Flatten);
        assert!(branch.iter().all(|l| l.kind() != LayerKind::Dense));
    }
    let x = random(&[2, 300], 3);
    let padded = m.tabular_layers()[0].infer(&x).unwrap();
    for r in 0..2 {
        assert_eq!(&padded.row(r)[..300], x.row(r));
        assert!(padded.row(r)[300..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn model_4_rejects_narrow_tabular() {
    assert!(build_model_4::<f32>(81, [32, 32, 3], &arch(), &mut rng()).is_err());
    assert!(build_model_4::<f32>(82, [32, 32, 3], &arch(), &mut rng()).is_ok());
}

#[test]
fn model_5_is_model_4_plus_two_dense() {
    for (d, img) in [(100usize, [32usize, 32, 3]), (300, [40, 48, 1])] {
        let m4 = build_model_4::<f32>(d, img, &arch(), &mut rng()).unwrap();
        let m5 = build_model_5::<f32>(d, img, &arch(), &mut rng()).unwrap();
        assert_eq!(m5.fused_width(), 256);
        let kinds = |m: &ModelGraph<f32>, s: Section| -> Vec<LayerKind> {
            m.layers()
                .filter(|(sec, _)| *sec == s)
                .map(|(_, l)| l.kind())
                .collect()
        };
        for s in [Section::Tabular, Section::Image] {
            let (k4, k5) = (kinds(&m4, s), kinds(&m5, s));
            assert_eq!(&k5[..k4.len()], &k4[..]);
            assert_eq!(&k5[k4.len()..], &[LayerKind::Dense, LayerKind::Relu]);
        }
        let dense = |m: &ModelGraph<f32>| {
            m.layers()
                .filter(|(_, l)| l.kind() == LayerKind::Dense)
                .count()
        };
        assert_eq!(dense(&m5) - dense(&m4), 2);
    }
}

#[test]
fn shape_inference_matches_forward_for_all_models() {
    let tab_d = 90;
    let img = [24usize, 24, 2];
    for id in 1..=5u8 {
        let id = ModelId::from_number(id).unwrap();
        let image = match id {
            ModelId::Unimodal => ImageInput::None,
            ModelId::ExternalEmbedding => ImageInput::Embedding { width: 11 },
            _ => ImageInput::Image {
                height: img[0],
                width: img[1],
                channels: img[2],
            },
        };
        let spec = ModelSpec {
            id,
            tabular_width: tab_d,
            image: image.clone(),
            arch: small(),
        };
        let m = build_model::<f32>(&spec, &mut rng()).unwrap();
        let tab = random(&[3, tab_d], 7);
        let im = match image {
            ImageInput::None => None,
            ImageInput::Embedding { width } => Some(random(&[3, width], 8)),
            ImageInput::Image { .. } => Some(random(&batch(&img, 3), 9)),
        };
        check_shape_inference(&m, &tab, im.as_ref());
    }
}

#[test]
fn extract_fused_rows_and_determinism() {
    let m = build_model_5::<f32>(100, [32, 32, 3], &arch(), &mut rng()).unwrap();
    let tab = random(&[7, 100], 10);
    let img = random(&[7, 32, 32, 3], 11);
    let input = ModelInput {
        tabular: &tab,
        image: Some(&img),
    };
    let a = extract_fused(&m, input, 3).unwrap();
    let b = extract_fused(&m, input, 7).unwrap();
    assert_eq!(a.shape(), &[7, 256]);
    assert_eq!(a, b);
    assert_eq!(a, m.infer(input).unwrap().fused);
    assert_simplex(&predict_probs(&m, input, 2).unwrap());
}
