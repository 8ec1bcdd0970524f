//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use pricefuse::commands::{self, SynthOptions};
use pricefuse::config::ExperimentConfig;
use pricefuse::report::RowStatus;
use pricefuse_core::classifiers::{ClassifierKind, Knn};
use pricefuse_core::metrics::{metrics, ConfusionMatrix};
use pricefuse_core::models::{
    build_model_1, build_model_3, build_model_4, build_model_5, Architecture, ModelGraph, ModelId,
    ModelInput,
};
use pricefuse_core::nn::gradcheck::{check_layer, check_model, relative_error};
use pricefuse_core::nn::{L1Placement, Layer, ParamRole};
use pricefuse_core::prep::{
    fit_encoder, parse_ram, parse_video, parse_weight, price_class, split_resolution, RawRecord,
    OS_VOCAB_SIZE, PROCESSOR_VOCAB_SIZE,
};
use pricefuse_core::synth::SynthMode;
use pricefuse_core::tensor::{concat_columns, conv2d, matmul, maxpool2d, split_columns};
use pricefuse_core::{Rng, Tensor};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------- criterion 1

const GRAD_TOL: f64 = 1e-3;
const GRAD_DRAWS: u64 = 10;
const FD_STEP: f64 = 1e-6;

fn random64(shape: &[usize], rng: &mut Rng) -> Tensor<f64> {
    Tensor::from_fn(shape.to_vec(), |_| rng.uniform_range(-1.0, 1.0))
}

fn layer_draws(make: impl Fn(&mut Rng) -> Layer<f64>, input: &[usize]) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for seed in 0..GRAD_DRAWS {
        let mut rng = Rng::seed_from_u64(seed);
        let mut layer = make(&mut rng);
        let x = random64(input, &mut rng);
        let res = check_layer(&mut layer, &x, FD_STEP, 200, &mut rng).map_err(|e| e.to_string())?;
        worst = worst.max(res.max_relative_error);
    }
    Ok(worst)
}

fn concat_draws() -> f64 {
    let mut worst = 0.0f64;
    for seed in 0..GRAD_DRAWS {
        let mut rng = Rng::seed_from_u64(seed);
        let a = random64(&[3, 4], &mut rng);
        let b = random64(&[3, 2], &mut rng);
        let r = random64(&[3, 6], &mut rng);
        let objective = |a: &Tensor<f64>, b: &Tensor<f64>| -> f64 {
            let y = concat_columns(&[a, b]).unwrap();
            y.data().iter().zip(r.data()).map(|(p, q)| p * q).sum()
        };
        let grads = split_columns(&r, &[4, 2]).unwrap();
        for (which, analytic) in grads.iter().enumerate() {
            let numeric: Vec<f64> = (0..analytic.len())
                .map(|c| {
                    let (mut ap, mut bp, mut am, mut bm) =
                        (a.clone(), b.clone(), a.clone(), b.clone());
                    let (tp, tm) = if which == 0 {
                        (&mut ap, &mut am)
                    } else {
                        (&mut bp, &mut bm)
                    };
                    tp.data_mut()[c] += FD_STEP;
                    tm.data_mut()[c] -= FD_STEP;
                    (objective(&ap, &bp) - objective(&am, &bm)) / (2.0 * FD_STEP)
                })
                .collect();
            worst = worst.max(relative_error(analytic.data(), &numeric));
        }
    }
    worst
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

fn model_draws(
    build: impl Fn(&mut Rng) -> ModelGraph<f64>,
    tab: usize,
    image: Option<&[usize]>,
) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for seed in 0..GRAD_DRAWS {
        let mut rng = Rng::seed_from_u64(1000 + seed);
        let mut model = build(&mut rng);
        for p in model.params_mut() {
            if p.role == ParamRole::Bias {
                p.value = random64(p.value.shape(), &mut rng).map(|v| 0.1 * v);
            }
        }
        let batch = 3;
        let x = random64(&[batch, tab], &mut rng);
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
            &mut model, input, &labels, 0.1, placement, FD_STEP, 40, &mut rng,
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max(res.max_relative_error);
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let img: &[usize] = &[22, 22, 1];
    let checks: Vec<(&str, f64)> = vec![
        ("dense", layer_draws(|r| Layer::dense(7, 5, r), &[3, 7])?),
        (
            "conv2d",
            layer_draws(|r| Layer::conv2d(3, 2, 3, r), &[2, 6, 6, 2])?,
        ),
        (
            "maxpool2d",
            layer_draws(|_| Layer::maxpool2d(2, 2), &[2, 6, 6, 2])?,
        ),
        ("flatten", layer_draws(|_| Layer::flatten(), &[2, 3, 3, 2])?),
        ("relu", layer_draws(|_| Layer::relu(), &[4, 9])?),
        ("softmax", layer_draws(|_| Layer::softmax(), &[3, 4])?),
        (
            "reshape",
            layer_draws(|_| Layer::reshape(vec![3, 3, 1]), &[2, 7])?,
        ),
        ("concat", concat_draws()),
        (
            "model1",
            model_draws(|r| build_model_1(12, &mini_arch(), r).unwrap(), 12, None)?,
        ),
        (
            "model3",
            model_draws(
                |r| build_model_3(10, [22, 22, 1], &mini_arch(), r).unwrap(),
                10,
                Some(img),
            )?,
        ),
        (
            "model4",
            model_draws(
                |r| build_model_4(82, [22, 22, 1], &mini_arch(), r).unwrap(),
                82,
                Some(img),
            )?,
        ),
        (
            "model5",
            model_draws(
                |r| build_model_5(82, [22, 22, 1], &mini_arch(), r).unwrap(),
                82,
                Some(img),
            )?,
        ),
    ];
    let elapsed = t0.elapsed();
    for (name, err) in &checks {
        ensure!(
            *err < GRAD_TOL,
            "{name}: max relative error {err:e} >= {GRAD_TOL:e}"
        );
    }
    ensure!(
        elapsed < Duration::from_secs(120),
        "runtime {elapsed:?} >= 120s"
    );
    let worst = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(format!(
        "{} checks x {GRAD_DRAWS} draws, worst rel err {worst:.2e}, {elapsed:.1?}",
        checks.len()
    ))
}

// ---------------------------------------------------------------- criterion 2

const ORACLE_TOL: f32 = 1e-6;
const SHAPE_DRAWS: usize = 100;

fn random32(shape: &[usize], rng: &mut Rng) -> Tensor<f32> {
    Tensor::from_fn(shape.to_vec(), |_| rng.uniform_range(-1.0, 1.0) as f32)
}

fn max_abs_diff(a: &[f32], b: &[f32]) -> Result<f32, String> {
    ensure!(a.len() == b.len(), "length {} vs {}", a.len(), b.len());
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f32::max))
}

fn naive_matmul(a: &Tensor<f32>, b: &Tensor<f32>) -> Vec<f32> {
    let (n, k, m) = (a.shape()[0], a.shape()[1], b.shape()[1]);
    let mut out = vec![0.0f32; n * m];
    for i in 0..n {
        for j in 0..m {
            out[i * m + j] = (0..k)
                .map(|t| a.data()[i * k + t] as f64 * b.data()[t * m + j] as f64)
                .sum::<f64>() as f32;
        }
    }
    out
}

fn naive_conv(x: &Tensor<f32>, k: &Tensor<f32>, stride: usize) -> (Vec<usize>, Vec<f32>) {
    let (h, w, c) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (ks, f) = (k.shape()[0], k.shape()[3]);
    let (oh, ow) = ((h - ks) / stride + 1, (w - ks) / stride + 1);
    let mut out = vec![0.0f32; oh * ow * f];
    for i in 0..oh {
        for j in 0..ow {
            for o in 0..f {
                let mut s = 0.0f64;
                for di in 0..ks {
                    for dj in 0..ks {
                        for ch in 0..c {
                            let xv = x.data()[((i * stride + di) * w + j * stride + dj) * c + ch];
                            s += xv as f64 * k.data()[((di * ks + dj) * c + ch) * f + o] as f64;
                        }
                    }
                }
                out[(i * ow + j) * f + o] = s as f32;
            }
        }
    }
    (vec![oh, ow, f], out)
}

fn naive_pool(x: &Tensor<f32>, win: usize, stride: usize) -> (Vec<usize>, Vec<f32>) {
    let (h, w, c) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (oh, ow) = ((h - win) / stride + 1, (w - win) / stride + 1);
    let mut out = Vec::with_capacity(oh * ow * c);
    for i in 0..oh {
        for j in 0..ow {
            for ch in 0..c {
                let mut m = f32::NEG_INFINITY;
                for di in 0..win {
                    for dj in 0..win {
                        m = m.max(x.data()[((i * stride + di) * w + j * stride + dj) * c + ch]);
                    }
                }
                out.push(m);
            }
        }
    }
    (vec![oh, ow, c], out)
}

fn knn_oracle(x: &Tensor<f32>, y: &[usize], k: usize, q: &[f32]) -> usize {
    let mut all: Vec<(f64, usize)> = (0..y.len())
        .map(|i| {
            (
                x.row(i)
                    .iter()
                    .zip(q)
                    .map(|(&a, &b)| ((a - b) as f64).powi(2))
                    .sum(),
                i,
            )
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = [0usize; 4];
    for &(_, i) in &all[..k] {
        votes[y[i]] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

fn criterion_2() -> Outcome {
    let mut rng = Rng::seed_from_u64(2);
    let mut worst = 0.0f32;
    for _ in 0..SHAPE_DRAWS {
        let (n, k, m) = (1 + rng.below(12), 1 + rng.below(12), 1 + rng.below(12));
        let a = random32(&[n, k], &mut rng);
        let b = random32(&[k, m], &mut rng);
        let c = matmul(&a, &b).map_err(|e| e.to_string())?;
        ensure!(c.shape() == [n, m], "matmul shape {:?}", c.shape());
        worst = worst.max(max_abs_diff(c.data(), &naive_matmul(&a, &b))?);
    }
    ensure!(worst <= ORACLE_TOL, "matmul max diff {worst:e}");
    for _ in 0..SHAPE_DRAWS {
        let (h, w, c, f) = (
            3 + rng.below(9),
            3 + rng.below(9),
            1 + rng.below(3),
            1 + rng.below(4),
        );
        let (ks, stride) = (1 + rng.below(3), 1 + rng.below(2));
        let x = random32(&[h, w, c], &mut rng);
        let kern = random32(&[ks, ks, c, f], &mut rng);
        let y = conv2d(&x, &kern, stride).map_err(|e| e.to_string())?;
        let (shape, data) = naive_conv(&x, &kern, stride);
        ensure!(
            y.shape() == &shape[..],
            "conv2d shape {:?} vs {shape:?}",
            y.shape()
        );
        worst = worst.max(max_abs_diff(y.data(), &data)?);
    }
    ensure!(worst <= ORACLE_TOL, "conv2d max diff {worst:e}");
    for _ in 0..SHAPE_DRAWS {
        let (h, w, c) = (3 + rng.below(9), 3 + rng.below(9), 1 + rng.below(3));
        let (win, stride) = (1 + rng.below(3), 1 + rng.below(2));
        let x = random32(&[h, w, c], &mut rng);
        let (y, _) = maxpool2d(&x, win, stride).map_err(|e| e.to_string())?;
        let (shape, data) = naive_pool(&x, win, stride);
        ensure!(
            y.shape() == &shape[..],
            "maxpool shape {:?} vs {shape:?}",
            y.shape()
        );
        worst = worst.max(max_abs_diff(y.data(), &data)?);
    }
    ensure!(worst <= ORACLE_TOL, "maxpool2d max diff {worst:e}");

    let mut knn_checked = 0;
    for grid in [false, true] {
        let pts = |rng: &mut Rng| {
            Tensor::from_fn([200, 3], |_| {
                if grid {
                    rng.below(5) as f32
                } else {
                    rng.uniform_range(-1.0, 1.0) as f32
                }
            })
        };
        let x = pts(&mut rng);
        let q = pts(&mut rng);
        let y: Vec<usize> = (0..200).map(|_| rng.below(4)).collect();
        for k in [1usize, 3, 5, 8] {
            let model = Knn::fit(&x, &y, k).map_err(|e| e.to_string())?;
            for i in 0..200 {
                let got = model.predict(q.row(i)).map_err(|e| e.to_string())?;
                ensure!(
                    got == knn_oracle(&x, &y, k, q.row(i)),
                    "knn k={k} grid={grid} query {i}"
                );
                knn_checked += 1;
            }
        }
    }

    for _ in 0..10 {
        let truth: Vec<usize> = (0..200).map(|_| rng.below(4)).collect();
        let pred: Vec<usize> = (0..200).map(|_| rng.below(4)).collect();
        let r =
            metrics(&ConfusionMatrix::from_predictions(&truth, &pred).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        let count = |f: &dyn Fn(usize, usize) -> bool| {
            truth.iter().zip(&pred).filter(|(t, p)| f(**t, **p)).count()
        };
        ensure!(
            r.accuracy == count(&|t, p| t == p) as f64 / 200.0,
            "accuracy mismatch"
        );
        for k in 0..4 {
            let tp = count(&|t, p| t == k && p == k) as f64;
            let fp = count(&|t, p| t != k && p == k) as f64;
            let fn_ = count(&|t, p| t == k && p != k) as f64;
            let (precision, recall) = (tp / (tp + fp), tp / (tp + fn_));
            let f1 = 2.0 * precision * recall / (precision + recall);
            let pc = &r.per_class[k];
            ensure!(
                (pc.precision, pc.recall, pc.f1) == (precision, recall, f1),
                "class {k}: {:?} vs oracle {:?}",
                (pc.precision, pc.recall, pc.f1),
                (precision, recall, f1)
            );
        }
    }
    Ok(format!(
        "{SHAPE_DRAWS} shape draws each for matmul/conv2d/maxpool2d (max diff {worst:.1e}), {knn_checked} KNN queries, 10x200 metric instances"
    ))
}

// ---------------------------------------------------------------- criterion 3

fn phone(os: &str, processor: &str, price: f64) -> RawRecord {
    RawRecord {
        brand: "Acme".into(),
        model: "A1".into(),
        release_date: "2019, March".into(),
        weight: "190 g".into(),
        os: os.into(),
        storage: "64 GB".into(),
        hit: "1".into(),
        hit_count: "1".into(),
        display_size: "6.1 inches".into(),
        display_resolution: "1080 x 2340 pixels".into(),
        camera: "12 MP".into(),
        video: "2160p".into(),
        processor: processor.into(),
        ram: "6 GB".into(),
        battery: "3000 mAh".into(),
        battery_type: "Li-Ion".into(),
        image_path: String::new(),
        price_euro: price,
    }
}

fn criterion_3() -> Outcome {
    let s = |e: pricefuse_core::Error| e.to_string();
    ensure!(parse_weight("190 g").map_err(s)? == 190.0, "weight");
    ensure!(parse_video("2160p").map_err(s)? == 2160, "video");
    ensure!(parse_ram("6 GB").map_err(s)? == 6144, "ram");
    ensure!(
        split_resolution("1080 x 2340 pixels").map_err(s)? == (1080, 2340),
        "resolution"
    );
    ensure!(
        split_resolution("720x1520").map_err(s)? == (720, 1520),
        "resolution compact"
    );
    for (price, class) in [(249.99, 0), (250.0, 1), (500.0, 2), (750.0, 3)] {
        ensure!(price_class(price).map_err(s)? == class, "price {price}");
    }
    let recs: Vec<RawRecord> = (0..40)
        .map(|i| {
            phone(
                &format!("OS {i}"),
                &format!("Chip P{i} (7 nm)"),
                100.0 + i as f64,
            )
        })
        .collect();
    let enc = fit_encoder(&recs).map_err(s)?;
    ensure!(
        enc.os.size() == 20 && OS_VOCAB_SIZE == 20,
        "os vocabulary {}",
        enc.os.size()
    );
    ensure!(
        enc.processor.size() == 26 && PROCESSOR_VOCAB_SIZE == 26,
        "processor vocabulary {}",
        enc.processor.size()
    );
    Ok("field rules, price boundaries, OS cap 20, processor cap 26".into())
}

// ---------------------------------------------------------------- criteria 4-8

struct Workspace {
    root: tempfile::TempDir,
}

impl Workspace {
    fn path(&self, rel: &str) -> PathBuf {
        self.root.path().join(rel)
    }
}

fn err(e: pricefuse::Error) -> String {
    e.machine_line()
}

fn config(model: ModelId, epochs: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        model,
        ..Default::default()
    };
    c.training.epochs = epochs;
    c
}

fn criterion_4(ws: &Workspace) -> Outcome {
    let t0 = Instant::now();
    commands::synth(
        &SynthOptions::new(11, 400, SynthMode::Unimodal),
        &ws.path("uni/ds"),
    )
    .map_err(err)?;
    let cfg = config(ModelId::Unimodal, 50);
    ensure!(
        cfg.training.learning_rate == 0.001
            && cfg.training.batch_size == 32
            && cfg.training.l1_alpha == 0.1
            && cfg.arch.tabular_hidden == [300, 120],
        "defaults drifted"
    );
    let s = commands::train(&cfg, &ws.path("uni/ds"), &ws.path("uni/ck")).map_err(err)?;
    let elapsed = t0.elapsed();
    ensure!(
        s.train_accuracy >= 0.95,
        "train accuracy {:.4} < 0.95",
        s.train_accuracy
    );
    ensure!(
        elapsed < Duration::from_secs(180),
        "runtime {elapsed:?} >= 180s"
    );
    Ok(format!(
        "Model 1 train accuracy {:.4} after 50 epochs, {elapsed:.1?}",
        s.train_accuracy
    ))
}

const MULTIMODAL_SEED: u64 = 7;

fn criterion_5(ws: &Workspace) -> Outcome {
    let t0 = Instant::now();
    commands::synth(
        &SynthOptions::new(MULTIMODAL_SEED, 2000, SynthMode::Multimodal),
        &ws.path("multi/ds"),
    )
    .map_err(err)?;
    let m1 = commands::train(
        &config(ModelId::Unimodal, 50),
        &ws.path("multi/ds"),
        &ws.path("multi/ck1"),
    )
    .map_err(err)?;
    let m3 = commands::train(
        &config(ModelId::ConvImage, 15),
        &ws.path("multi/ds"),
        &ws.path("multi/ck3"),
    )
    .map_err(err)?;
    let elapsed = t0.elapsed();
    let (a1, a3) = (
        m1.test_accuracy.ok_or("no test split")?,
        m3.test_accuracy.ok_or("no test split")?,
    );
    ensure!(
        a3 - a1 >= 0.15,
        "Model 3 {a3:.4} vs Model 1 {a1:.4}: gap below 15 points"
    );
    ensure!(a3 > 0.75, "Model 3 test accuracy {a3:.4} <= 0.75");
    ensure!(
        elapsed < Duration::from_secs(900),
        "runtime {elapsed:?} >= 900s"
    );
    Ok(format!(
        "seed {MULTIMODAL_SEED}: Model 3 test {a3:.4}, Model 1 test {a1:.4}, {elapsed:.1?}"
    ))
}

fn criterion_6(ws: &Workspace) -> Outcome {
    ensure!(
        ws.path("multi/ck3/manifest.txt").exists(),
        "criterion 5 checkpoint missing"
    );
    let report = commands::evaluate(
        &config(ModelId::ConvImage, 15),
        &ws.path("multi/ck3"),
        &ws.path("multi/ds"),
        &ws.path("multi/eval"),
        false,
    )
    .map_err(err)?;
    let mut evaluated = 0;
    for kind in ClassifierKind::ALL {
        let row = report
            .row(kind)
            .ok_or(format!("{} row missing", kind.name()))?;
        if !kind.is_implemented() {
            ensure!(
                row.status == RowStatus::NotImplemented,
                "{} should be not implemented",
                kind.name()
            );
            continue;
        }
        let m = row
            .metrics
            .as_ref()
            .ok_or(format!("{} has no metrics", kind.name()))?;
        for avg in [&m.macro_avg, &m.weighted_avg] {
            for v in [m.accuracy, avg.precision, avg.recall, avg.f1] {
                ensure!(
                    (0.0..=1.0).contains(&v),
                    "{} metric {v} outside [0,1]",
                    kind.name()
                );
            }
        }
        evaluated += 1;
    }
    let acc = |k| {
        report
            .row(k)
            .and_then(|r| r.metrics.as_ref())
            .map(|m| m.accuracy)
            .unwrap_or(0.0)
    };
    let (fc, knn) = (
        acc(ClassifierKind::FullyConnected),
        acc(ClassifierKind::Knn),
    );
    ensure!(fc >= 0.9, "FullyConnected test accuracy {fc:.4} < 0.9");
    ensure!(knn >= 0.9, "KNN test accuracy {knn:.4} < 0.9");
    ensure!(
        ws.path("multi/eval/report.txt").exists(),
        "report.txt missing"
    );
    Ok(format!(
        "{evaluated} classifiers evaluated, FC {fc:.4}, KNN {knn:.4}"
    ))
}

fn run_pipeline(dir: &Path) -> Result<(), String> {
    let mut o = SynthOptions::new(3, 200, SynthMode::Multimodal);
    o.image_side = 24;
    commands::synth(&o, &dir.join("ds")).map_err(err)?;
    let cfg = config(ModelId::ConvImage, 2);
    commands::train(&cfg, &dir.join("ds"), &dir.join("ck")).map_err(err)?;
    commands::evaluate(
        &cfg,
        &dir.join("ck"),
        &dir.join("ds"),
        &dir.join("eval"),
        true,
    )
    .map_err(err)?;
    commands::embed(
        &dir.join("ck"),
        &dir.join("ds"),
        &dir.join("embed"),
        Some(0),
    )
    .map_err(err)?;
    commands::visualize(&dir.join("ck"), &dir.join("ds"), &dir.join("viz.csv"), 0).map_err(err)?;
    Ok(())
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_7(ws: &Workspace) -> Outcome {
    let (a, b) = (ws.path("det/a"), ws.path("det/b"));
    run_pipeline(&a)?;
    run_pipeline(&b)?;
    let (fa, fb) = (files_under(&a), files_under(&b));
    ensure!(fa == fb, "different file sets");
    for rel in &fa {
        ensure!(
            fs::read(a.join(rel)).unwrap() == fs::read(b.join(rel)).unwrap(),
            "{} differs",
            rel.display()
        );
    }
    for needed in [
        "ck/loss.csv",
        "ck/param_000.pft",
        "eval/report.json",
        "eval/report.txt",
    ] {
        ensure!(
            fa.iter().any(|p| p == Path::new(needed)),
            "{needed} not produced"
        );
    }
    Ok(format!(
        "{} files byte-identical across two runs (synth, train, evaluate, embed, visualize)",
        fa.len()
    ))
}

fn criterion_8(ws: &Workspace) -> Outcome {
    ensure!(
        ws.path("uni/ck/manifest.txt").exists(),
        "criterion 4 checkpoint missing"
    );
    let v = commands::visualize(
        &ws.path("uni/ck"),
        &ws.path("uni/ds"),
        &ws.path("uni/viz.csv"),
        0,
    )
    .map_err(err)?;
    ensure!(v.silhouette > 0.0, "mean silhouette {} <= 0", v.silhouette);
    let c = &v.pca.components;
    ensure!(c.len() == 2, "{} components", c.len());
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dot: f64 = c[i].iter().zip(&c[j]).map(|(a, b)| a * b).sum();
            worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure!(worst <= 1e-5, "orthonormality error {worst:e}");
    Ok(format!(
        "silhouette {:.4}, orthonormality error {worst:.1e}",
        v.silhouette
    ))
}

fn main() {
    let _ = env_logger::builder().is_test(true).try_init();
    let ws = Workspace {
        root: tempfile::tempdir().expect("temp dir"),
    };
    let criteria: Vec<Criterion> = vec![
        ("gradient fidelity", Box::new(criterion_1)),
        ("oracle equivalence", Box::new(criterion_2)),
        ("preprocessing exactness", Box::new(criterion_3)),
        ("learning sanity", Box::new(|| criterion_4(&ws))),
        ("multimodal advantage", Box::new(|| criterion_5(&ws))),
        ("classifier-swap harness", Box::new(|| criterion_6(&ws))),
        ("determinism", Box::new(|| criterion_7(&ws))),
        ("PCA export", Box::new(|| criterion_8(&ws))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name}: {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
