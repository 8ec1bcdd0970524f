//! Trained-model directories.
//!
//! ```text
//! manifest.txt     model id, input shapes, architecture, training config
//! param_NNN.pft    parameter tensors in graph visit order
//! loss.csv         epoch,loss,train_accuracy
//! ```

use std::path::Path;

use pricefuse_core::models::{
    build_model, Architecture, ImageInput, ModelGraph, ModelId, ModelSpec,
};
use pricefuse_core::nn::{L1Placement, TrainingConfig};
use pricefuse_core::Rng;

use crate::error::{Error, Result};
use crate::io;
use crate::manifest::{join, split, KeyValues};

pub const FORMAT: &str = "pricefuse-checkpoint 1";

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub spec: ModelSpec,
    pub model: ModelGraph<f32>,
    pub training: TrainingConfig,
    pub loss_trace: Vec<f64>,
    pub accuracy_trace: Vec<f64>,
}

fn image_input_text(i: &ImageInput) -> String {
    match i {
        ImageInput::None => "none".into(),
        ImageInput::Embedding { width } => format!("embedding:{width}"),
        ImageInput::Image {
            height,
            width,
            channels,
        } => format!("image:{height},{width},{channels}"),
    }
}

fn parse_image_input(raw: &str) -> Result<ImageInput> {
    if raw == "none" {
        return Ok(ImageInput::None);
    }
    if let Some(w) = raw.strip_prefix("embedding:") {
        return Ok(ImageInput::Embedding {
            width: split::<usize>("image_input", w)?
                .first()
                .copied()
                .unwrap_or(0),
        });
    }
    if let Some(dims) = raw.strip_prefix("image:") {
        if let [height, width, channels] = split::<usize>("image_input", dims)?[..] {
            return Ok(ImageInput::Image {
                height,
                width,
                channels,
            });
        }
    }
    Err(Error::Config(format!("bad image_input `{raw}`")))
}

/// Per-epoch trace file contents.
pub fn loss_csv(loss: &[f64], accuracy: &[f64]) -> String {
    let mut out = String::from("epoch,loss,train_accuracy\n");
    for (e, (l, a)) in loss.iter().zip(accuracy).enumerate() {
        out.push_str(&format!("{},{l},{a}\n", e + 1));
    }
    out
}

impl Checkpoint {
    pub fn manifest(&self) -> KeyValues {
        let s = &self.spec;
        let a = &s.arch;
        let t = &self.training;
        let mut m = KeyValues::new();
        m.set("format", FORMAT);
        m.set("model", s.id.number());
        m.set("tabular_width", s.tabular_width);
        m.set("image_input", image_input_text(&s.image));
        m.set("tabular_hidden", join(&a.tabular_hidden));
        m.set("head_hidden", a.head_hidden);
        m.set("kernel", a.kernel);
        m.set("image_filters", join(&a.image_filters));
        m.set("tabular_filters", join(&a.tabular_filters));
        m.set("pool_window", a.pool_window);
        m.set("pool_stride", a.pool_stride);
        m.set("branch_dense", a.branch_dense);
        m.set("learning_rate", t.learning_rate);
        m.set("batch_size", t.batch_size);
        m.set("rmsprop_decay", t.rmsprop_decay);
        m.set("rmsprop_epsilon", t.rmsprop_epsilon);
        m.set("l1_alpha", t.l1_alpha);
        m.set("l1_placement", t.l1_placement.name());
        m.set("epochs", t.epochs);
        m.set("seed", t.seed);
        m.set("parameters", self.model.param_count());
        let params = self.model.params();
        m.set("param_tensors", params.len());
        for (i, p) in params.iter().enumerate() {
            m.set(
                &format!("param_{i:03}"),
                format!("{} {}", p.role.name(), join(p.value.shape())),
            );
        }
        m
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        io::create_dir(dir)?;
        for (i, p) in self.model.params().iter().enumerate() {
            io::write_tensor(&dir.join(format!("param_{i:03}.pft")), &p.value)?;
        }
        io::write_bytes(
            &dir.join("loss.csv"),
            loss_csv(&self.loss_trace, &self.accuracy_trace).as_bytes(),
        )?;
        self.manifest().write(&dir.join("manifest.txt"))
    }

    pub fn load(dir: &Path) -> Result<Checkpoint> {
        io::require_exists(dir, "checkpoint directory")?;
        let path = dir.join("manifest.txt");
        let m = KeyValues::read(&path)?;
        if m.require("format")? != FORMAT {
            return Err(Error::parse(&path, "not a pricefuse checkpoint manifest"));
        }
        let tabular_hidden: Vec<usize> = split("tabular_hidden", m.require("tabular_hidden")?)?;
        let arch = Architecture {
            tabular_hidden: tabular_hidden
                .try_into()
                .map_err(|_| Error::parse(&path, "tabular_hidden needs two widths"))?,
            head_hidden: m.parsed("head_hidden")?,
            kernel: m.parsed("kernel")?,
            image_filters: split("image_filters", m.require("image_filters")?)?,
            tabular_filters: split("tabular_filters", m.require("tabular_filters")?)?,
            pool_window: m.parsed("pool_window")?,
            pool_stride: m.parsed("pool_stride")?,
            branch_dense: m.parsed("branch_dense")?,
        };
        let spec = ModelSpec {
            id: ModelId::from_number(m.parsed("model")?)?,
            tabular_width: m.parsed("tabular_width")?,
            image: parse_image_input(m.require("image_input")?)?,
            arch,
        };
        let training = TrainingConfig {
            learning_rate: m.parsed("learning_rate")?,
            batch_size: m.parsed("batch_size")?,
            rmsprop_decay: m.parsed("rmsprop_decay")?,
            rmsprop_epsilon: m.parsed("rmsprop_epsilon")?,
            l1_alpha: m.parsed("l1_alpha")?,
            l1_placement: L1Placement::parse(m.require("l1_placement")?)?,
            epochs: m.parsed("epochs")?,
            seed: m.parsed("seed")?,
        };
        let mut model = build_model::<f32>(&spec, &mut Rng::seed_from_u64(0))?;
        let count: usize = m.parsed("param_tensors")?;
        let values = (0..count)
            .map(|i| io::read_tensor(&dir.join(format!("param_{i:03}.pft"))))
            .collect::<Result<Vec<_>>>()?;
        model.load_params(values)?;
        let (loss_trace, accuracy_trace) = read_loss_csv(&dir.join("loss.csv"))?;
        Ok(Checkpoint {
            spec,
            model,
            training,
            loss_trace,
            accuracy_trace,
        })
    }
}

fn read_loss_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = io::read_text(path)?;
    let (mut loss, mut acc) = (Vec::new(), Vec::new());
    for (n, line) in text.lines().skip(1).enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || {
            Error::parse(
                path,
                format!("line {}: expected epoch,loss,train_accuracy", n + 2),
            )
        };
        if cols.len() != 3 {
            return Err(bad());
        }
        loss.push(cols[1].parse().map_err(|_| bad())?);
        acc.push(cols[2].parse().map_err(|_| bad())?);
    }
    Ok((loss, acc))
}
