//! On-disk dataset directories.
//!
//! ```text
//! manifest.txt             key=value summary
//! features_{train,test}.pft
//! labels_{train,test}.txt  record_index,label
//! images_{train,test}.pft  optional [N, H, W, 3]
//! embeddings_{train,test}.pft  optional [N, E]
//! ```

use std::path::Path;

use pricefuse_core::{Tensor, NUM_CLASSES};

use crate::error::{Error, Result};
use crate::io;
use crate::manifest::{join, split, KeyValues};

pub const FORMAT: &str = "pricefuse-dataset 1";

/// One side of the train/test partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub record_index: Vec<usize>,
    pub features: Tensor<f32>,
    pub labels: Vec<usize>,
    pub images: Option<Tensor<f32>>,
    pub embeddings: Option<Tensor<f32>>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut c = [0; NUM_CLASSES];
        self.labels.iter().for_each(|&l| c[l] += 1);
        c
    }

    fn validate(&self, name: &str) -> Result<()> {
        let n = self.labels.len();
        let mismatch = |what: &str, rows: usize| {
            Err(Error::Config(format!(
                "{name} split: {what} has {rows} rows, labels have {n}"
            )))
        };
        if self.record_index.len() != n {
            return mismatch("record index", self.record_index.len());
        }
        if self.features.rank() != 2 || self.features.rows() != n {
            return mismatch(
                "features",
                self.features.shape().first().copied().unwrap_or(0),
            );
        }
        for (what, t) in [("images", &self.images), ("embeddings", &self.embeddings)] {
            if let Some(t) = t {
                if t.rows() != n {
                    return mismatch(what, t.rows());
                }
            }
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(Error::Config(format!(
                "{name} split: label {l} outside 0..{NUM_CLASSES}"
            )));
        }
        Ok(())
    }

    /// Every part of `self` restricted to `rows`.
    pub fn select(&self, rows: &[usize]) -> Result<Split> {
        Ok(Split {
            record_index: rows.iter().map(|&r| self.record_index[r]).collect(),
            features: self.features.select_rows(rows)?,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            images: self
                .images
                .as_ref()
                .map(|t| t.select_rows(rows))
                .transpose()?,
            embeddings: self
                .embeddings
                .as_ref()
                .map(|t| t.select_rows(rows))
                .transpose()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Where the records came from, e.g. `synth:multimodal seed=3` or a CSV file name.
    pub source: String,
    pub split_ratio: f64,
    pub split_seed: u64,
    pub feature_names: Vec<String>,
    /// Rows read from the source, including skipped ones.
    pub source_records: usize,
    pub skipped: usize,
    pub train: Split,
    pub test: Split,
}

impl Dataset {
    pub fn tabular_width(&self) -> usize {
        self.train.features.row_len()
    }

    /// `[H, W, C]` of the image stack, if the dataset has one.
    pub fn image_shape(&self) -> Option<[usize; 3]> {
        self.train.images.as_ref().map(|t| {
            let s = t.shape();
            [s[1], s[2], s[3]]
        })
    }

    pub fn embedding_width(&self) -> Option<usize> {
        self.train.embeddings.as_ref().map(|t| t.row_len())
    }

    pub fn records(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let (a, b) = (self.train.class_counts(), self.test.class_counts());
        std::array::from_fn(|c| a[c] + b[c])
    }

    /// Human-readable protocol string carried into every report.
    pub fn protocol(&self) -> String {
        let train = (self.split_ratio * 100.0).round();
        format!(
            "stratified {}/{} train/test split, split_seed={}",
            train,
            100.0 - train,
            self.split_seed
        )
    }

    pub fn manifest(&self) -> KeyValues {
        let mut m = KeyValues::new();
        m.set("format", FORMAT);
        m.set("source", &self.source);
        m.set("source_records", self.source_records);
        m.set("skipped_records", self.skipped);
        m.set("records", self.records());
        m.set("train_records", self.train.len());
        m.set("test_records", self.test.len());
        m.set("split_ratio", self.split_ratio);
        m.set("split_seed", self.split_seed);
        m.set("protocol", self.protocol());
        m.set("tabular_width", self.tabular_width());
        m.set("class_counts", join(&self.class_counts()));
        m.set("train_class_counts", join(&self.train.class_counts()));
        m.set("test_class_counts", join(&self.test.class_counts()));
        m.set(
            "image_shape",
            self.image_shape().map_or("none".into(), |s| join(&s)),
        );
        m.set(
            "embedding_width",
            self.embedding_width()
                .map_or("none".into(), |w| w.to_string()),
        );
        m.set("feature_names", self.feature_names.join(","));
        m
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        self.train.validate("train")?;
        self.test.validate("test")?;
        io::create_dir(dir)?;
        for (name, s) in [("train", &self.train), ("test", &self.test)] {
            io::write_tensor(&dir.join(format!("features_{name}.pft")), &s.features)?;
            io::write_labels(
                &dir.join(format!("labels_{name}.txt")),
                &s.record_index,
                &s.labels,
            )?;
            if let Some(t) = &s.images {
                io::write_tensor(&dir.join(format!("images_{name}.pft")), t)?;
            }
            if let Some(t) = &s.embeddings {
                io::write_tensor(&dir.join(format!("embeddings_{name}.pft")), t)?;
            }
        }
        self.manifest().write(&dir.join("manifest.txt"))
    }

    pub fn load(dir: &Path) -> Result<Dataset> {
        io::require_exists(dir, "dataset directory")?;
        let m = KeyValues::read(&dir.join("manifest.txt"))?;
        if m.require("format")? != FORMAT {
            return Err(Error::parse(
                dir.join("manifest.txt"),
                "not a pricefuse dataset manifest",
            ));
        }
        let load_split = |name: &str| -> Result<Split> {
            let (record_index, labels) = io::read_labels(&dir.join(format!("labels_{name}.txt")))?;
            let optional = |stem: &str| -> Result<Option<Tensor<f32>>> {
                let p = dir.join(format!("{stem}_{name}.pft"));
                p.exists().then(|| io::read_tensor(&p)).transpose()
            };
            let s = Split {
                record_index,
                features: io::read_tensor(&dir.join(format!("features_{name}.pft")))?,
                labels,
                images: optional("images")?,
                embeddings: optional("embeddings")?,
            };
            s.validate(name)?;
            Ok(s)
        };
        let names = m.require("feature_names")?;
        Ok(Dataset {
            source: m.require("source")?.to_string(),
            split_ratio: m.parsed("split_ratio")?,
            split_seed: m.parsed("split_seed")?,
            feature_names: split::<String>("feature_names", names)?,
            source_records: m.parsed("source_records")?,
            skipped: m.parsed("skipped_records")?,
            train: load_split("train")?,
            test: load_split("test")?,
        })
    }
}
