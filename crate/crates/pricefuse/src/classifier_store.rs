//! Saved shallow classifiers.
//!
//! Each directory holds a `manifest.txt` with the kind, input width and the
//! per-column standardizer, plus kind-specific files:
//!
//! | kind | files |
//! |------|-------|
//! | logistic regression, SVM | `weights.pft` `[4, F]`, `bias.pft` `[4]` (−∞ marks a class unseen at fit) |
//! | KNN | `points.pft` `[N, F]`, `labels.txt`, `k` in the manifest |
//! | decision tree | `tree.txt` |
//! | fully connected | `param_NNN.pft`, `hidden` in the manifest |

use std::path::Path;

use pricefuse_core::classifiers::{
    Classifier, ClassifierKind, DecisionTree, Knn, LinearModel, Standardizer,
};
use pricefuse_core::models::build_dense_head;
use pricefuse_core::Rng;

use crate::error::{Error, Result};
use crate::io;
use crate::manifest::KeyValues;

pub const FORMAT: &str = "pricefuse-classifier 1";

/// Writes `f64` values with round-trip precision.
fn f64_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_f64_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    crate::manifest::split(key, raw)
}

pub fn save(dir: &Path, classifier: &Classifier, standardizer: &Standardizer) -> Result<()> {
    io::create_dir(dir)?;
    let mut m = KeyValues::new();
    m.set("format", FORMAT);
    m.set("kind", classifier.kind().name());
    m.set("input_width", classifier.input_width());
    m.set("standardizer_mean", f64_list(standardizer.mean()));
    m.set("standardizer_scale", f64_list(standardizer.scale()));
    match classifier {
        Classifier::LogisticRegression(lm) | Classifier::LinearSvm(lm) => {
            io::write_tensor(&dir.join("weights.pft"), &lm.weights())?;
            io::write_tensor(&dir.join("bias.pft"), &lm.bias())?;
        }
        Classifier::Knn(knn) => {
            m.set("k", knn.k());
            io::write_tensor(&dir.join("points.pft"), knn.stored_points())?;
            let idx: Vec<usize> = (0..knn.stored_labels().len()).collect();
            io::write_labels(&dir.join("labels.txt"), &idx, knn.stored_labels())?;
        }
        Classifier::DecisionTree(tree) => {
            io::write_bytes(&dir.join("tree.txt"), tree.to_text().as_bytes())?;
        }
        Classifier::FullyConnected(head) => {
            let params = head.params();
            m.set("hidden", params[0].value.shape()[1]);
            m.set("param_tensors", params.len());
            for (i, p) in params.iter().enumerate() {
                io::write_tensor(&dir.join(format!("param_{i:03}.pft")), &p.value)?;
            }
        }
    }
    m.write(&dir.join("manifest.txt"))
}

pub fn load(dir: &Path) -> Result<(Classifier, Standardizer)> {
    let path = dir.join("manifest.txt");
    let m = KeyValues::read(&path)?;
    if m.require("format")? != FORMAT {
        return Err(Error::parse(&path, "not a pricefuse classifier manifest"));
    }
    let kind = ClassifierKind::parse(m.require("kind")?)?;
    let width: usize = m.parsed("input_width")?;
    let standardizer = Standardizer::from_parts(
        parse_f64_list("standardizer_mean", m.require("standardizer_mean")?)?,
        parse_f64_list("standardizer_scale", m.require("standardizer_scale")?)?,
    )?;
    let classifier = match kind {
        ClassifierKind::LogisticRegression | ClassifierKind::LinearSvm => {
            let lm = LinearModel::from_parts(
                &io::read_tensor(&dir.join("weights.pft"))?,
                &io::read_tensor(&dir.join("bias.pft"))?,
            )?;
            if kind == ClassifierKind::LinearSvm {
                Classifier::LinearSvm(lm)
            } else {
                Classifier::LogisticRegression(lm)
            }
        }
        ClassifierKind::Knn => {
            let (_, labels) = io::read_labels(&dir.join("labels.txt"))?;
            Classifier::Knn(Knn::fit(
                &io::read_tensor(&dir.join("points.pft"))?,
                &labels,
                m.parsed("k")?,
            )?)
        }
        ClassifierKind::DecisionTree => Classifier::DecisionTree(DecisionTree::from_text(
            &io::read_text(&dir.join("tree.txt"))?,
        )?),
        ClassifierKind::FullyConnected => {
            let mut head =
                build_dense_head::<f32>(width, m.parsed("hidden")?, &mut Rng::seed_from_u64(0))?;
            let count: usize = m.parsed("param_tensors")?;
            let values = (0..count)
                .map(|i| io::read_tensor(&dir.join(format!("param_{i:03}.pft"))))
                .collect::<Result<Vec<_>>>()?;
            head.load_params(values)?;
            Classifier::FullyConnected(Box::new(head))
        }
        ClassifierKind::GradientBoosting => {
            return Err(pricefuse_core::Error::NotImplemented(
                "gradient boosting classifier".into(),
            )
            .into())
        }
    };
    if classifier.input_width() != width || standardizer.mean().len() != width {
        return Err(Error::parse(
            &path,
            "input width disagrees with stored tensors",
        ));
    }
    Ok((classifier, standardizer))
}
