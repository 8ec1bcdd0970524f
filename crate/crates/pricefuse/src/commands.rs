//! Subcommand implementations. Each takes explicit paths and settings and
//! writes only under its output location.

use std::path::{Path, PathBuf};

use pricefuse_core::classifiers::{Classifier, ClassifierKind, ClassifierParams, Standardizer};
use pricefuse_core::metrics::{mean_silhouette, metrics, pca_project, ConfusionMatrix, PcaResult};
use pricefuse_core::models::{
    build_model, extract_fused, predict_probs, ImageInput, ModelGraph, ModelId, ModelInput,
    ModelSpec, Section,
};
use pricefuse_core::nn::{train_with_observer, TrainData};
use pricefuse_core::prep::{fit_encoder, EncoderSpec, NUMERIC_COLUMNS};
use pricefuse_core::split::stratified_split;
use pricefuse_core::synth::{generate, SynthConfig, SynthMode};
use pricefuse_core::tensor::argmax_last;
use pricefuse_core::{Rng, Tensor};
use serde::Serialize;

use crate::checkpoint::Checkpoint;
use crate::config::ExperimentConfig;
use crate::dataset::{Dataset, Split};
use crate::error::{Error, Result};
use crate::images::ImageSource;
use crate::ingest::{read_csv, Skipped};
use crate::io;
use crate::manifest::{join, KeyValues};
use crate::report::{DatasetInfo, Report, Row, AVERAGING, SCHEMA};
use crate::{classifier_store, images};

const CHUNK: usize = 256;

fn split_rows(labels: &[usize], ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    Ok(stratified_split(
        labels,
        ratio,
        &mut Rng::seed_from_u64(seed),
    )?)
}

// ---------------------------------------------------------------- synth

pub struct SynthOptions {
    pub seed: u64,
    pub records: usize,
    pub mode: SynthMode,
    pub tabular_width: usize,
    pub image_side: usize,
    pub split_ratio: f64,
    pub split_seed: u64,
}

impl SynthOptions {
    pub fn new(seed: u64, records: usize, mode: SynthMode) -> Self {
        let base = SynthConfig::new(seed, records, mode);
        SynthOptions {
            seed,
            records,
            mode,
            tabular_width: base.tabular_width,
            image_side: base.image_side,
            split_ratio: 0.8,
            split_seed: 0,
        }
    }
}

/// Generates a synthetic dataset, splits it and writes it to `out`.
pub fn synth(opts: &SynthOptions, out: &Path) -> Result<Dataset> {
    let cfg = SynthConfig {
        seed: opts.seed,
        records: opts.records,
        mode: opts.mode,
        tabular_width: opts.tabular_width,
        image_side: opts.image_side,
    };
    let data = generate(&cfg)?;
    let n = data.labels.len();
    let all = Split {
        record_index: (0..n).collect(),
        features: data.tabular,
        labels: data.labels,
        images: data.images,
        embeddings: data.embeddings,
    };
    let (train, test) = split_rows(&all.labels, opts.split_ratio, opts.split_seed)?;
    let ds = Dataset {
        source: format!("synth:{} seed={}", opts.mode.name(), opts.seed),
        split_ratio: opts.split_ratio,
        split_seed: opts.split_seed,
        feature_names: (0..cfg.tabular_width).map(|j| format!("x{j}")).collect(),
        source_records: n,
        skipped: 0,
        train: all.select(&train)?,
        test: all.select(&test)?,
    };
    ds.save(out)?;
    Ok(ds)
}

// ---------------------------------------------------------------- preprocess

pub enum ImageOption {
    Directory(PathBuf),
    Stack(PathBuf),
}

pub struct PreprocessOptions {
    pub csv: PathBuf,
    pub images: Option<ImageOption>,
    pub image_side: usize,
    /// PFT1 `[source_records, E]` matrix keyed by CSV data-row index.
    pub embeddings: Option<PathBuf>,
    pub split_ratio: f64,
    pub split_seed: u64,
}

impl PreprocessOptions {
    pub fn new(csv: impl Into<PathBuf>) -> Self {
        PreprocessOptions {
            csv: csv.into(),
            images: None,
            image_side: images::IMAGE_SIDE,
            embeddings: None,
            split_ratio: 0.8,
            split_seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct PreprocessSummary {
    pub dataset: Dataset,
    pub encoder: EncoderSpec,
    pub skipped: Vec<Skipped>,
}

#[derive(Serialize)]
struct EncoderFile<'a> {
    vocabularies: Vec<(&'a str, &'a [String])>,
    numeric_ranges: Vec<(&'a str, f64, f64)>,
}

fn encoder_json(spec: &EncoderSpec) -> String {
    let f = EncoderFile {
        vocabularies: spec
            .vocabularies()
            .iter()
            .map(|(n, v)| (*n, v.values.as_slice()))
            .collect(),
        numeric_ranges: NUMERIC_COLUMNS
            .iter()
            .zip(&spec.numeric)
            .map(|(n, r)| (*n, r.min, r.max))
            .collect(),
    };
    serde_json::to_string_pretty(&f).expect("encoder serializes") + "\n"
}

/// Reads a CSV, drops unusable rows, fits the encoder on the train split
/// only and writes the encoded dataset to `out`.
pub fn preprocess(opts: &PreprocessOptions, out: &Path) -> Result<PreprocessSummary> {
    io::require_exists(&opts.csv, "csv file")?;
    let source = match &opts.images {
        Some(ImageOption::Directory(d)) => Some(ImageSource::directory(d, opts.image_side)?),
        Some(ImageOption::Stack(p)) => Some(ImageSource::stack(p)?),
        None => None,
    };
    let embeddings = opts
        .embeddings
        .as_deref()
        .map(io::read_tensor)
        .transpose()?;
    let mut ingested = read_csv(&opts.csv)?;
    if let Some(e) = &embeddings {
        if e.rank() != 2 || e.rows() != ingested.source_rows {
            return Err(Error::Config(format!(
                "embedding file has shape {:?}; expected one row per CSV record ({})",
                e.shape(),
                ingested.source_rows
            )));
        }
    }

    let mut records = Vec::new();
    let mut pixels = Vec::new();
    for r in std::mem::take(&mut ingested.records) {
        if let Some(src) = &source {
            match src.load(r.index, &r.raw.image_path) {
                Ok(px) => pixels.extend(px),
                Err(e) => {
                    log::warn!(
                        "dropping record {} (row index {}): {e}",
                        r.raw.model,
                        r.index
                    );
                    ingested.skipped.push(Skipped {
                        line: r.index as u64 + 2,
                        index: r.index,
                        reason: format!("image: {e}"),
                    });
                    continue;
                }
            }
        }
        records.push(r);
    }
    ingested.skipped.sort_by_key(|s| s.index);
    if records.is_empty() {
        return Err(pricefuse_core::Error::EmptyDataset.into());
    }

    let labels: Vec<usize> = records.iter().map(|r| r.parsed.label).collect();
    let (train_rows, test_rows) = split_rows(&labels, opts.split_ratio, opts.split_seed)?;
    let train_raw: Vec<_> = train_rows.iter().map(|&i| records[i].raw.clone()).collect();
    let encoder = fit_encoder(&train_raw)?;

    let n = records.len();
    let width = encoder.width();
    let mut features = Vec::with_capacity(n * width);
    for r in &records {
        features.extend_from_slice(encoder.encode_parsed(&r.parsed).values.data());
    }
    let record_index: Vec<usize> = records.iter().map(|r| r.index).collect();
    let all = Split {
        features: Tensor::new([n, width], features)?,
        labels,
        images: match &source {
            Some(src) => {
                let mut shape = vec![n];
                shape.extend(src.image_shape());
                Some(Tensor::new(shape, pixels)?)
            }
            None => None,
        },
        embeddings: embeddings
            .map(|e| e.select_rows(&record_index))
            .transpose()?,
        record_index,
    };
    let file_name = opts
        .csv
        .file_name()
        .map_or_else(String::new, |f| f.to_string_lossy().into_owned());
    let dataset = Dataset {
        source: format!("csv:{file_name}"),
        split_ratio: opts.split_ratio,
        split_seed: opts.split_seed,
        feature_names: encoder.feature_names(),
        source_records: ingested.source_rows,
        skipped: ingested.skipped.len(),
        train: all.select(&train_rows)?,
        test: all.select(&test_rows)?,
    };
    dataset.save(out)?;
    io::write_bytes(&out.join("encoder.json"), encoder_json(&encoder).as_bytes())?;
    let mut skipped = String::from("line,record_index,reason\n");
    for s in &ingested.skipped {
        skipped.push_str(&format!("{},{},{:?}\n", s.line, s.index, s.reason));
    }
    io::write_bytes(&out.join("skipped.csv"), skipped.as_bytes())?;
    Ok(PreprocessSummary {
        dataset,
        encoder,
        skipped: ingested.skipped,
    })
}

// ---------------------------------------------------------------- train

/// Structure of `model` for a dataset, or a clear error if the dataset lacks
/// the second input the model needs.
pub fn model_spec(cfg: &ExperimentConfig, ds: &Dataset) -> Result<ModelSpec> {
    let image = match cfg.model {
        ModelId::Unimodal => ImageInput::None,
        ModelId::ExternalEmbedding => match ds.embedding_width() {
            Some(width) => ImageInput::Embedding { width },
            None => {
                return Err(Error::Config(
                    "model 2 needs image embeddings: the dataset has no embedding file \
                     (preprocess with --embeddings FILE)"
                        .into(),
                ))
            }
        },
        _ => match ds.image_shape() {
            Some([height, width, channels]) => ImageInput::Image {
                height,
                width,
                channels,
            },
            None => {
                return Err(Error::Config(format!(
                    "model {} needs images: the dataset has no image stack",
                    cfg.model.number()
                )))
            }
        },
    };
    Ok(ModelSpec {
        id: cfg.model,
        tabular_width: ds.tabular_width(),
        image,
        arch: cfg.arch.clone(),
    })
}

/// The model inputs of a split: features plus images or embeddings.
pub fn split_input<'a>(spec: &ModelSpec, s: &'a Split) -> Result<ModelInput<'a, f32>> {
    let image = match spec.image {
        ImageInput::None => None,
        ImageInput::Embedding { .. } => Some(
            s.embeddings
                .as_ref()
                .ok_or_else(|| Error::Config("dataset has no embeddings".into()))?,
        ),
        ImageInput::Image { .. } => Some(
            s.images
                .as_ref()
                .ok_or_else(|| Error::Config("dataset has no images".into()))?,
        ),
    };
    Ok(ModelInput {
        tabular: &s.features,
        image,
    })
}

fn accuracy(
    model: &ModelGraph<f32>,
    input: ModelInput<'_, f32>,
    labels: &[usize],
) -> Result<Option<f64>> {
    if labels.is_empty() {
        return Ok(None);
    }
    let pred = argmax_last(&predict_probs(model, input, CHUNK)?);
    Ok(Some(
        pred.iter().zip(labels).filter(|(p, y)| p == y).count() as f64 / labels.len() as f64,
    ))
}

#[derive(Debug)]
pub struct TrainSummary {
    pub checkpoint: Checkpoint,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

/// Trains the configured model on the train split and writes a checkpoint.
pub fn train(cfg: &ExperimentConfig, dataset_dir: &Path, out: &Path) -> Result<TrainSummary> {
    cfg.validate()?;
    let ds = Dataset::load(dataset_dir)?;
    let spec = model_spec(cfg, &ds)?;
    let mut init = Rng::seed_from_u64(cfg.training.seed).fork();
    let model = build_model::<f32>(&spec, &mut init)?;
    let input = split_input(&spec, &ds.train)?;
    let data = TrainData {
        tabular: input.tabular,
        image: input.image,
        labels: &ds.train.labels,
    };
    log::info!(
        "training model {} ({} parameters) on {} records for {} epochs",
        spec.id.number(),
        model.param_count(),
        ds.train.len(),
        cfg.training.epochs
    );
    let trained = train_with_observer(model, data, &cfg.training, |s, _| {
        log::info!(
            "epoch {:>4}  loss {:.6}  accuracy {:.4}",
            s.epoch + 1,
            s.loss,
            s.accuracy
        );
    })?;
    let train_accuracy = accuracy(&trained.model, input, &ds.train.labels)?.unwrap_or(0.0);
    let test_accuracy = accuracy(
        &trained.model,
        split_input(&spec, &ds.test)?,
        &ds.test.labels,
    )?;
    let checkpoint = Checkpoint {
        spec,
        model: trained.model,
        training: cfg.training.clone(),
        loss_trace: trained.loss_trace,
        accuracy_trace: trained.accuracy_trace,
    };
    checkpoint.save(out)?;
    let mut summary = KeyValues::new();
    summary.set("dataset", &ds.source);
    summary.set("protocol", ds.protocol());
    summary.set("train_accuracy", train_accuracy);
    summary.set(
        "test_accuracy",
        test_accuracy.map_or("none".into(), |a| a.to_string()),
    );
    summary.set(
        "final_loss",
        checkpoint.loss_trace.last().copied().unwrap_or(f64::NAN),
    );
    summary.write(&out.join("summary.txt"))?;
    Ok(TrainSummary {
        checkpoint,
        train_accuracy,
        test_accuracy,
    })
}

// ---------------------------------------------------------------- evaluate

fn fused(ck: &Checkpoint, s: &Split) -> Result<Tensor<f32>> {
    Ok(extract_fused(&ck.model, split_input(&ck.spec, s)?, CHUNK)?)
}

/// Scores every requested classifier on the test split and writes
/// `report.json` and `report.txt` to `out`.
///
/// The fully-connected row is the checkpoint's own head. Other kinds are fit
/// on standardized fused embeddings of the train split.
pub fn evaluate(
    cfg: &ExperimentConfig,
    checkpoint_dir: &Path,
    dataset_dir: &Path,
    out: &Path,
    save_classifiers: bool,
) -> Result<Report> {
    cfg.validate()?;
    let ck = Checkpoint::load(checkpoint_dir)?;
    let ds = Dataset::load(dataset_dir)?;
    if ds.test.is_empty() {
        return Err(Error::Config("dataset has an empty test split".into()));
    }
    let needs_embeddings = cfg
        .classifiers
        .iter()
        .any(|k| k.is_implemented() && *k != ClassifierKind::FullyConnected);
    let embedded = if needs_embeddings {
        let train = fused(&ck, &ds.train)?;
        let test = fused(&ck, &ds.test)?;
        let st = Standardizer::fit(&train)?;
        Some((st.transform(&train)?, st.transform(&test)?, st))
    } else {
        None
    };
    let params = ClassifierParams {
        seed: ck.training.seed,
        ..cfg.classifier.clone()
    };

    let mut rows = Vec::new();
    for &kind in &cfg.classifiers {
        let (predicted, source) = match kind {
            ClassifierKind::GradientBoosting => {
                rows.push(Row::not_implemented(kind));
                continue;
            }
            ClassifierKind::FullyConnected => {
                let probs = predict_probs(&ck.model, split_input(&ck.spec, &ds.test)?, CHUNK)?;
                (argmax_last(&probs), "trained model head")
            }
            _ => {
                let (train, test, st) = embedded.as_ref().expect("embeddings computed");
                let c = Classifier::fit(kind, train, &ds.train.labels, &params)?;
                if save_classifiers {
                    classifier_store::save(&out.join("classifiers").join(kind.name()), &c, st)?;
                }
                (
                    c.predict_batch(test)?,
                    "fit on standardized fused embeddings of the train split",
                )
            }
        };
        let cm = ConfusionMatrix::from_predictions(&ds.test.labels, &predicted)?;
        rows.push(Row::evaluated(kind, source, &metrics(&cm)?));
    }

    let mut config = std::collections::BTreeMap::new();
    for (k, v) in ck.manifest().entries() {
        if k != "format" && !k.starts_with("param_") {
            config.insert(k.clone(), v.clone());
        }
    }
    for (k, v) in cfg.echo().entries() {
        if ["classifiers", "knn_k"].contains(&k.as_str())
            || k.starts_with("tree_")
            || k.starts_with("linear_")
        {
            config.insert(k.clone(), v.clone());
        }
    }
    let support = ds.test.class_counts();
    let report = Report {
        schema: SCHEMA.into(),
        protocol: ds.protocol(),
        averaging: AVERAGING.into(),
        model: ck.spec.id.number(),
        dataset: DatasetInfo {
            source: ds.source.clone(),
            train_records: ds.train.len(),
            test_records: ds.test.len(),
            test_class_support: support.map(|c| c as u64),
        },
        config,
        rows,
    };
    io::write_bytes(&out.join("report.json"), report.to_json().as_bytes())?;
    io::write_bytes(&out.join("report.txt"), report.to_text().as_bytes())?;
    Ok(report)
}

// ---------------------------------------------------------------- embed

#[derive(Debug)]
pub struct EmbedSummary {
    pub train: Tensor<f32>,
    pub test: Tensor<f32>,
    /// File names of dumped activations, in layer order.
    pub activations: Vec<String>,
}

/// Writes fused embeddings of both splits. With `dump_record`, also writes
/// every layer's output for that source record under `activations/`.
pub fn embed(
    checkpoint_dir: &Path,
    dataset_dir: &Path,
    out: &Path,
    dump_record: Option<usize>,
) -> Result<EmbedSummary> {
    let ck = Checkpoint::load(checkpoint_dir)?;
    let ds = Dataset::load(dataset_dir)?;
    let train = fused(&ck, &ds.train)?;
    let test = fused(&ck, &ds.test)?;
    io::write_tensor(&out.join("fused_train.pft"), &train)?;
    io::write_tensor(&out.join("fused_test.pft"), &test)?;
    io::write_labels(
        &out.join("labels_train.txt"),
        &ds.train.record_index,
        &ds.train.labels,
    )?;
    io::write_labels(
        &out.join("labels_test.txt"),
        &ds.test.record_index,
        &ds.test.labels,
    )?;
    let activations = match dump_record {
        Some(r) => dump_activations(&ck, &ds, r, &out.join("activations"))?,
        None => Vec::new(),
    };
    Ok(EmbedSummary {
        train,
        test,
        activations,
    })
}

fn dump_activations(
    ck: &Checkpoint,
    ds: &Dataset,
    record: usize,
    dir: &Path,
) -> Result<Vec<String>> {
    let (split, row) = [&ds.train, &ds.test]
        .into_iter()
        .find_map(|s| {
            s.record_index
                .iter()
                .position(|&i| i == record)
                .map(|row| (s, row))
        })
        .ok_or_else(|| Error::Config(format!("record {record} is not in the dataset")))?;
    let one = split.select(&[row])?;
    let input = split_input(&ck.spec, &one)?;
    let mut names = Vec::new();
    let mut index = String::from("file,section,layer,shape\n");
    let mut run = |layers: &[pricefuse_core::nn::Layer<f32>],
                   x: &Tensor<f32>,
                   section: Section|
     -> Result<Tensor<f32>> {
        let mut cur = x.clone();
        for (i, l) in layers.iter().enumerate() {
            cur = l.infer(&cur)?;
            let name = format!("{}_{i:02}.pft", section.name());
            io::write_tensor(&dir.join(&name), &cur)?;
            index.push_str(&format!(
                "{name},{},{:?},{:?}\n",
                section.name(),
                l.describe(),
                join(cur.shape())
            ));
            names.push(name);
        }
        Ok(cur)
    };
    run(ck.model.tabular_layers(), input.tabular, Section::Tabular)?;
    if let (Some(layers), Some(x)) = (ck.model.image_layers(), input.image) {
        run(layers, x, Section::Image)?;
    }
    let fused = extract_fused(&ck.model, input, 1)?;
    run(ck.model.head_layers(), &fused, Section::Head)?;
    io::write_bytes(&dir.join("index.csv"), index.as_bytes())?;
    Ok(names)
}

// ---------------------------------------------------------------- visualize

#[derive(Debug)]
pub struct VisualizeSummary {
    pub pca: PcaResult,
    pub labels: Vec<usize>,
    pub record_index: Vec<usize>,
    pub silhouette: f64,
}

/// Projects fused embeddings of every record onto two principal components
/// and writes `x,y,true_class` rows ordered by source record index.
pub fn visualize(
    checkpoint_dir: &Path,
    dataset_dir: &Path,
    out_csv: &Path,
    seed: u64,
) -> Result<VisualizeSummary> {
    let ck = Checkpoint::load(checkpoint_dir)?;
    let ds = Dataset::load(dataset_dir)?;
    let mut order: Vec<(usize, usize, usize)> = Vec::with_capacity(ds.records());
    for (s, split) in [&ds.train, &ds.test].into_iter().enumerate() {
        order.extend(
            split
                .record_index
                .iter()
                .enumerate()
                .map(|(row, &idx)| (idx, s, row)),
        );
    }
    order.sort_unstable();
    let parts = [fused(&ck, &ds.train)?, fused(&ck, &ds.test)?];
    let width = ck.model.fused_width();
    let mut data = Vec::with_capacity(order.len() * width);
    let mut labels = Vec::with_capacity(order.len());
    for &(_, s, row) in &order {
        data.extend_from_slice(parts[s].row(row));
        labels.push([&ds.train, &ds.test][s].labels[row]);
    }
    let x = Tensor::new([order.len(), width], data)?;
    let pca = pca_project(&x, 2, seed)?;
    let silhouette = mean_silhouette(&pca.projection, &labels)?;

    let mut csv = format!(
        "# explained_variance_ratio={} explained_variance={} total_variance={} silhouette={} pca_seed={seed}\n",
        join(&pca.explained_variance_ratio),
        join(&pca.explained_variance),
        pca.total_variance,
        silhouette
    );
    csv.push_str("x,y,true_class\n");
    for (i, &l) in labels.iter().enumerate() {
        let p = pca.projection.row(i);
        csv.push_str(&format!("{},{},{l}\n", p[0], p[1]));
    }
    io::write_bytes(out_csv, csv.as_bytes())?;
    Ok(VisualizeSummary {
        pca,
        labels,
        record_index: order.iter().map(|o| o.0).collect(),
        silhouette,
    })
}
