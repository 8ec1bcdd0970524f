use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::parse::*;
use super::record::RawRecord;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// OS vocabulary size including the OTHER slot.
pub const OS_VOCAB_SIZE: usize = 20;
/// Processor vocabulary size including the OTHER slot.
pub const PROCESSOR_VOCAB_SIZE: usize = 26;

/// Numeric feature columns, in encoding order.
pub const NUMERIC_COLUMNS: [&str; 10] = [
    "release_year",
    "weight_g",
    "storage_mb",
    "display_size_in",
    "v_resolution",
    "h_resolution",
    "camera_mp",
    "video_p",
    "ram_mb",
    "battery_mah",
];

/// Categorical feature columns, in encoding order.
pub const CATEGORICAL_COLUMNS: [&str; 4] = ["brand", "os", "processor", "battery_type"];

/// Category list fixed at fit time. Slot `values.len()` is OTHER.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub values: Vec<String>,
}

impl Vocabulary {
    /// Keeps the most frequent keys (ties broken lexicographically), at most
    /// `cap - 1` of them when capped, so the size including OTHER is `cap`.
    pub fn fit<'a>(keys: impl IntoIterator<Item = &'a str>, cap: Option<usize>) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for k in keys {
            *counts.entry(k).or_default() += 1;
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        if let Some(cap) = cap {
            ranked.truncate(cap.saturating_sub(1));
        }
        let mut values: Vec<String> = ranked.into_iter().map(|(k, _)| String::from(k)).collect();
        values.sort();
        Vocabulary { values }
    }

    /// Number of one-hot slots, OTHER included.
    pub fn size(&self) -> usize {
        self.values.len() + 1
    }

    pub fn slot(&self, key: &str) -> usize {
        self.values
            .binary_search_by(|v| v.as_str().cmp(key))
            .unwrap_or(self.values.len())
    }
}

/// Min/max of one numeric column over the training split.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericRange {
    pub min: f64,
    pub max: f64,
}

impl NumericRange {
    /// `(v - min) / (max - min)`, or 0 for a constant column.
    pub fn scale(&self, v: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            (v - self.min) / span
        } else {
            0.0
        }
    }
}

/// Everything learned from the training split.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderSpec {
    pub brand: Vocabulary,
    pub os: Vocabulary,
    pub processor: Vocabulary,
    pub battery_type: Vocabulary,
    pub numeric: [NumericRange; 10],
}

/// A record with every field parsed, before scaling and one-hot encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedRecord {
    /// brand, os, processor, battery_type keys.
    pub categories: [String; 4],
    /// Values in [`NUMERIC_COLUMNS`] order.
    pub numerics: [f64; 10],
    pub label: usize,
}

/// Encoded record.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Tensor<f32>,
    pub label: usize,
}

fn category(field: &str, raw: &str) -> Result<String> {
    let key = category_key(raw);
    if key.is_empty() {
        return Err(Error::field(field, "empty value"));
    }
    Ok(key)
}

/// Applies every field rule; the first failing field is named in the error.
pub fn parse_record(r: &RawRecord) -> Result<ParsedRecord> {
    let label = price_class(r.price_euro)?;
    let (v_res, h_res) = split_resolution(&r.display_resolution)?;
    if split_resolution(&r.display_size).is_ok() {
        return Err(Error::field(
            "display_size",
            "holds a resolution, not a diagonal size",
        ));
    }
    let numerics = [
        parse_release_year(&r.release_date)? as f64,
        parse_weight(&r.weight)?,
        parse_storage(&r.storage)? as f64,
        parse_display_size(&r.display_size)?,
        v_res as f64,
        h_res as f64,
        parse_camera(&r.camera)?,
        parse_video(&r.video)? as f64,
        parse_ram(&r.ram)? as f64,
        parse_battery(&r.battery)?,
    ];
    Ok(ParsedRecord {
        categories: [
            category("brand", &r.brand)?,
            category("os", &r.os)?,
            category("processor", &r.processor)?,
            category("battery_type", &r.battery_type)?,
        ],
        numerics,
        label,
    })
}

/// Fits vocabularies and numeric ranges on the training split.
pub fn fit_encoder(train: &[RawRecord]) -> Result<EncoderSpec> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let parsed = train.iter().map(parse_record).collect::<Result<Vec<_>>>()?;
    let vocab = |i: usize, cap: Option<usize>| {
        Vocabulary::fit(parsed.iter().map(|p| p.categories[i].as_str()), cap)
    };
    let numeric = core::array::from_fn(|c| {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &parsed {
            min = min.min(p.numerics[c]);
            max = max.max(p.numerics[c]);
        }
        NumericRange { min, max }
    });
    Ok(EncoderSpec {
        brand: vocab(0, None),
        os: vocab(1, Some(OS_VOCAB_SIZE)),
        processor: vocab(2, Some(PROCESSOR_VOCAB_SIZE)),
        battery_type: vocab(3, None),
        numeric,
    })
}

impl EncoderSpec {
    pub fn vocabularies(&self) -> [(&'static str, &Vocabulary); 4] {
        [
            ("brand", &self.brand),
            ("os", &self.os),
            ("processor", &self.processor),
            ("battery_type", &self.battery_type),
        ]
    }

    /// Feature width D: all vocabulary sizes plus the numeric columns.
    pub fn width(&self) -> usize {
        self.vocabularies()
            .iter()
            .map(|(_, v)| v.size())
            .sum::<usize>()
            + NUMERIC_COLUMNS.len()
    }

    /// Name of every feature column, in vector order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for (field, v) in self.vocabularies() {
            names.extend(v.values.iter().map(|x| format!("{field}={x}")));
            names.push(format!("{field}=OTHER"));
        }
        names.extend(NUMERIC_COLUMNS.iter().map(|s| String::from(*s)));
        names
    }

    pub fn encode_parsed(&self, p: &ParsedRecord) -> FeatureVector {
        let mut values = alloc::vec![0.0f32; self.width()];
        let mut offset = 0;
        for ((_, vocab), key) in self.vocabularies().iter().zip(&p.categories) {
            values[offset + vocab.slot(key)] = 1.0;
            offset += vocab.size();
        }
        for (i, (range, &v)) in self.numeric.iter().zip(&p.numerics).enumerate() {
            values[offset + i] = range.scale(v) as f32;
        }
        FeatureVector {
            values: Tensor::vector(&values),
            label: p.label,
        }
    }
}

/// Encodes one record: one-hot categoricals then min-max scaled numerics.
pub fn encode(record: &RawRecord, spec: &EncoderSpec) -> Result<FeatureVector> {
    Ok(spec.encode_parsed(&parse_record(record)?))
}
