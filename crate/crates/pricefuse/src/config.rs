//! Experiment configuration.
//!
//! Settings are read from a flat `key=value` file and then overridden by
//! command-line flags, which arrive here as further `key=value` pairs.

use std::path::{Path, PathBuf};

use pricefuse_core::classifiers::{ClassifierKind, ClassifierParams};
use pricefuse_core::models::{Architecture, ModelId};
use pricefuse_core::nn::{L1Placement, TrainingConfig};

use crate::error::{Error, Result};
use crate::manifest::{join, split, KeyValues};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelId,
    pub training: TrainingConfig,
    pub arch: Architecture,
    pub split_ratio: f64,
    pub split_seed: u64,
    pub classifiers: Vec<ClassifierKind>,
    pub classifier: ClassifierParams,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelId::Unimodal,
            training: TrainingConfig::default(),
            arch: Architecture::default(),
            split_ratio: 0.8,
            split_seed: 0,
            classifiers: ClassifierKind::ALL.to_vec(),
            classifier: ClassifierParams::default(),
            dataset: None,
            checkpoint: None,
            out: None,
        }
    }
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{raw}`: {e}")))
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let t = &mut self.training;
        let a = &mut self.arch;
        let c = &mut self.classifier;
        match key {
            "model" => self.model = ModelId::from_number(value(key, raw)?)?,
            "learning_rate" => t.learning_rate = value(key, raw)?,
            "batch_size" => t.batch_size = value(key, raw)?,
            "rmsprop_decay" => t.rmsprop_decay = value(key, raw)?,
            "rmsprop_epsilon" => t.rmsprop_epsilon = value(key, raw)?,
            "l1_alpha" => t.l1_alpha = value(key, raw)?,
            "l1_placement" => t.l1_placement = L1Placement::parse(raw.trim())?,
            "epochs" => t.epochs = value(key, raw)?,
            "seed" => t.seed = value(key, raw)?,
            "tabular_hidden" => {
                let v: Vec<usize> = split(key, raw)?;
                a.tabular_hidden = v.try_into().map_err(|_| {
                    Error::Config("key `tabular_hidden`: expected two widths".into())
                })?;
            }
            "head_hidden" => a.head_hidden = value(key, raw)?,
            "kernel" => a.kernel = value(key, raw)?,
            "image_filters" => a.image_filters = split(key, raw)?,
            "tabular_filters" => a.tabular_filters = split(key, raw)?,
            "pool_window" => a.pool_window = value(key, raw)?,
            "pool_stride" => a.pool_stride = value(key, raw)?,
            "branch_dense" => a.branch_dense = value(key, raw)?,
            "split_ratio" => self.split_ratio = value(key, raw)?,
            "split_seed" => self.split_seed = value(key, raw)?,
            "classifiers" => {
                self.classifiers = raw
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(ClassifierKind::parse)
                    .collect::<pricefuse_core::Result<_>>()?;
            }
            "knn_k" => c.k = value(key, raw)?,
            "tree_max_depth" => c.max_depth = value(key, raw)?,
            "tree_min_leaf" => c.min_leaf = value(key, raw)?,
            "linear_epochs" => c.epochs = value(key, raw)?,
            "linear_learning_rate" => c.learning_rate = value(key, raw)?,
            "linear_l2" => c.l2 = value(key, raw)?,
            "dataset" => self.dataset = Some(PathBuf::from(raw.trim())),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(raw.trim())),
            "out" => self.out = Some(PathBuf::from(raw.trim())),
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Defaults, then the file at `file` if given, then `overrides` in order.
    pub fn resolve(file: Option<&Path>, overrides: &KeyValues) -> Result<Self> {
        let mut pairs = match file {
            Some(p) => KeyValues::read(p)?,
            None => KeyValues::new(),
        };
        pairs.extend(overrides);
        let mut cfg = ExperimentConfig::default();
        for (k, v) in pairs.entries() {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "split_ratio {} outside (0, 1)",
                self.split_ratio
            )));
        }
        if self.arch.kernel == 0 || self.arch.pool_window == 0 || self.arch.pool_stride == 0 {
            return Err(Error::Config(
                "kernel, pool_window and pool_stride must be >= 1".into(),
            ));
        }
        if self.classifier.k == 0 {
            return Err(Error::Config("knn_k must be >= 1".into()));
        }
        Ok(())
    }

    /// Training and classifier settings in file syntax, for report headers.
    pub fn echo(&self) -> KeyValues {
        let t = &self.training;
        let a = &self.arch;
        let c = &self.classifier;
        let mut kv = KeyValues::new();
        kv.set("model", self.model.number());
        kv.set("learning_rate", t.learning_rate);
        kv.set("batch_size", t.batch_size);
        kv.set("rmsprop_decay", t.rmsprop_decay);
        kv.set("rmsprop_epsilon", t.rmsprop_epsilon);
        kv.set("l1_alpha", t.l1_alpha);
        kv.set("l1_placement", t.l1_placement.name());
        kv.set("epochs", t.epochs);
        kv.set("seed", t.seed);
        kv.set("tabular_hidden", join(&a.tabular_hidden));
        kv.set("head_hidden", a.head_hidden);
        kv.set("kernel", a.kernel);
        kv.set("image_filters", join(&a.image_filters));
        kv.set("tabular_filters", join(&a.tabular_filters));
        kv.set("pool_window", a.pool_window);
        kv.set("pool_stride", a.pool_stride);
        kv.set("branch_dense", a.branch_dense);
        kv.set("split_ratio", self.split_ratio);
        kv.set("split_seed", self.split_seed);
        kv.set(
            "classifiers",
            self.classifiers
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv.set("knn_k", c.k);
        kv.set("tree_max_depth", c.max_depth);
        kv.set("tree_min_leaf", c.min_leaf);
        kv.set("linear_epochs", c.epochs);
        kv.set("linear_learning_rate", c.learning_rate);
        kv.set("linear_l2", c.l2);
        kv
    }
}
