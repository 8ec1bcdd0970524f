//! Evaluation reports in JSON and aligned plain text.
//!
//! The JSON layout is described in `docs/report-schema.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use pricefuse_core::classifiers::ClassifierKind;
use pricefuse_core::metrics::{Averages, EvalReport};
use pricefuse_core::NUM_CLASSES;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "pricefuse-report/1";
pub const AVERAGING: &str =
    "macro: unweighted mean over classes with support > 0 (headline); weighted by support also reported";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub protocol: String,
    pub averaging: String,
    pub model: u8,
    pub dataset: DatasetInfo,
    /// Effective configuration, as `key=value` strings.
    pub config: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub train_records: usize,
    pub test_records: usize,
    pub test_class_support: [u64; NUM_CLASSES],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NotImplemented,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub classifier: String,
    pub label: String,
    pub status: RowStatus,
    /// How the classifier was obtained, e.g. "trained model head".
    pub source: String,
    pub metrics: Option<RowMetrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Average {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<&Averages> for Average {
    fn from(a: &Averages) -> Self {
        Average {
            precision: a.precision,
            recall: a.recall,
            f1: a.f1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: usize,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMetrics {
    pub accuracy: f64,
    pub macro_avg: Average,
    pub weighted_avg: Average,
    pub per_class: Vec<ClassRow>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: [[u64; NUM_CLASSES]; NUM_CLASSES],
    pub macro_classes: Vec<usize>,
    /// Metric cells whose denominator was zero and were set to 0.
    pub zero_division: usize,
}

impl From<&EvalReport> for RowMetrics {
    fn from(r: &EvalReport) -> Self {
        RowMetrics {
            accuracy: r.accuracy,
            macro_avg: (&r.macro_avg).into(),
            weighted_avg: (&r.weighted_avg).into(),
            per_class: r
                .per_class
                .iter()
                .enumerate()
                .map(|(class, m)| ClassRow {
                    class,
                    support: m.support,
                    precision: m.precision,
                    recall: m.recall,
                    f1: m.f1,
                })
                .collect(),
            confusion: *r.confusion.counts(),
            macro_classes: r.macro_classes.clone(),
            zero_division: r.zero_division,
        }
    }
}

impl Row {
    pub fn evaluated(kind: ClassifierKind, source: &str, r: &EvalReport) -> Row {
        Row {
            classifier: kind.name().into(),
            label: kind.label().into(),
            status: RowStatus::Ok,
            source: source.into(),
            metrics: Some(r.into()),
        }
    }

    pub fn not_implemented(kind: ClassifierKind) -> Row {
        Row {
            classifier: kind.name().into(),
            label: kind.label().into(),
            status: RowStatus::NotImplemented,
            source: "none".into(),
            metrics: None,
        }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn row(&self, kind: ClassifierKind) -> Option<&Row> {
        self.rows.iter().find(|r| r.classifier == kind.name())
    }

    /// Aligned table: one row per classifier, macro headline then weighted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pricefuse evaluation report ({})", self.schema);
        let _ = writeln!(out, "model:     {}", self.model);
        let _ = writeln!(out, "dataset:   {}", self.dataset.source);
        let _ = writeln!(out, "protocol:  {}", self.protocol);
        let _ = writeln!(out, "averaging: {}", self.averaging);
        let _ = writeln!(
            out,
            "records:   train {}, test {} (test support per class {:?})",
            self.dataset.train_records, self.dataset.test_records, self.dataset.test_class_support
        );
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(10)
            .max(10);
        for (title, pick) in [
            (
                "macro average",
                (|m: &RowMetrics| &m.macro_avg) as fn(&RowMetrics) -> &Average,
            ),
            ("weighted average", |m: &RowMetrics| &m.weighted_avg),
        ] {
            let _ = writeln!(out);
            let _ = writeln!(out, "{title}");
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}  {:>4}",
                "Classifier", "Precision", "Recall", "F1", "Accuracy", "0div"
            );
            for row in &self.rows {
                match &row.metrics {
                    Some(m) => {
                        let a = pick(m);
                        let _ = writeln!(
                            out,
                            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}  {:>4}",
                            row.label, a.precision, a.recall, a.f1, m.accuracy, m.zero_division
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{:<width$}  not implemented", row.label);
                    }
                }
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "config");
        for (k, v) in &self.config {
            let _ = writeln!(out, "  {k}={v}");
        }
        out
    }
}
