//! Downstream classifiers fitted on fused embeddings.
//!
//! Every kind is one-call `fit` plus `predict`. Inputs are expected to be
//! standardized per column with [`Standardizer`] fitted on the training rows.

mod knn;
mod linear;
mod standardize;
mod tree;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use knn::Knn;
pub use linear::LinearModel;
pub use standardize::Standardizer;
pub use tree::{DecisionTree, TreeNode};

use crate::error::{Error, Result};
use crate::models::{build_dense_head, predict_probs, ModelGraph, ModelInput};
use crate::nn::{train, TrainData, TrainingConfig};
use crate::rng::Rng;
use crate::tensor::{argmax_last, Tensor};
use crate::NUM_CLASSES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    LogisticRegression,
    Knn,
    DecisionTree,
    LinearSvm,
    GradientBoosting,
    FullyConnected,
}

impl ClassifierKind {
    /// Report column order.
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::LogisticRegression,
        ClassifierKind::Knn,
        ClassifierKind::DecisionTree,
        ClassifierKind::LinearSvm,
        ClassifierKind::GradientBoosting,
        ClassifierKind::FullyConnected,
    ];

    /// Identifier used on the command line and in files.
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::Knn => "knn",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::LinearSvm => "svm",
            ClassifierKind::GradientBoosting => "gradient_boosting",
            ClassifierKind::FullyConnected => "fully_connected",
        }
    }

    /// Human-readable table label.
    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "Logistic Regression",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::DecisionTree => "Decision Tree",
            ClassifierKind::LinearSvm => "SVM",
            ClassifierKind::GradientBoosting => "Gradient Boosting",
            ClassifierKind::FullyConnected => "Fully connected",
        }
    }

    pub fn is_implemented(self) -> bool {
        self != ClassifierKind::GradientBoosting
    }

    /// Accepts the [`name`](Self::name) form plus a few common aliases.
    pub fn parse(s: &str) -> Result<Self> {
        let norm: String = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match norm.as_str() {
            "logistic_regression" | "lr" | "logreg" => ClassifierKind::LogisticRegression,
            "knn" => ClassifierKind::Knn,
            "decision_tree" | "tree" | "dt" => ClassifierKind::DecisionTree,
            "svm" | "linear_svm" => ClassifierKind::LinearSvm,
            "gradient_boosting" | "gb" | "gbm" => ClassifierKind::GradientBoosting,
            "fully_connected" | "fc" => ClassifierKind::FullyConnected,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown classifier kind `{s}`"
                )))
            }
        })
    }
}

/// Hyperparameters for every classifier kind.
///
/// Defaults: k = 5; tree depth 10 with at least 2 samples per leaf; LR and
/// SVM run 500 epochs at learning rate 0.01 with L2 weight 1e-4; the
/// fully-connected head has 120 hidden units and trains with
/// [`TrainingConfig::default`].
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierParams {
    pub k: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub fc_hidden: usize,
    pub fc_training: TrainingConfig,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            k: 5,
            max_depth: 10,
            min_leaf: 2,
            epochs: 500,
            learning_rate: 0.01,
            l2: 1e-4,
            seed: 0,
            fc_hidden: 120,
            fc_training: TrainingConfig::default(),
        }
    }
}

/// A fitted classifier.
#[derive(Clone, Debug)]
pub enum Classifier {
    LogisticRegression(LinearModel),
    Knn(Knn),
    DecisionTree(DecisionTree),
    LinearSvm(LinearModel),
    FullyConnected(Box<ModelGraph<f32>>),
}

pub(crate) fn check_training_set(x: &Tensor<f32>, y: &[usize]) -> Result<()> {
    if y.is_empty() || x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.rank() != 2 || x.rows() != y.len() {
        return Err(Error::ShapeMismatch {
            op: "classifier fit",
            left: x.shape().to_vec(),
            right: alloc::vec![y.len()],
        });
    }
    if y.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "classifier fit needs at least 4 samples, got {}",
            y.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= NUM_CLASSES) {
        return Err(Error::InvalidLabel {
            label: bad,
            classes: NUM_CLASSES,
        });
    }
    Ok(())
}

pub(crate) fn check_width(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::ShapeMismatch {
            op: "classifier predict width",
            left: alloc::vec![expected],
            right: alloc::vec![got],
        });
    }
    Ok(())
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

impl Classifier {
    /// Fits `kind` on rows of `x` labelled by `y`.
    pub fn fit(
        kind: ClassifierKind,
        x: &Tensor<f32>,
        y: &[usize],
        params: &ClassifierParams,
    ) -> Result<Self> {
        check_training_set(x, y)?;
        Ok(match kind {
            ClassifierKind::LogisticRegression => {
                Classifier::LogisticRegression(LinearModel::fit_logistic(x, y, params)?)
            }
            ClassifierKind::LinearSvm => Classifier::LinearSvm(LinearModel::fit_svm(x, y, params)?),
            ClassifierKind::Knn => Classifier::Knn(Knn::fit(x, y, params.k)?),
            ClassifierKind::DecisionTree => Classifier::DecisionTree(DecisionTree::fit(
                x,
                y,
                params.max_depth,
                params.min_leaf,
            )?),
            ClassifierKind::FullyConnected => {
                let mut rng = Rng::seed_from_u64(params.seed);
                let head = build_dense_head::<f32>(x.row_len(), params.fc_hidden, &mut rng)?;
                let data = TrainData {
                    tabular: x,
                    image: None,
                    labels: y,
                };
                Classifier::FullyConnected(Box::new(train(head, data, &params.fc_training)?.model))
            }
            ClassifierKind::GradientBoosting => {
                return Err(Error::NotImplemented("gradient boosting classifier".into()));
            }
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Classifier::Knn(_) => ClassifierKind::Knn,
            Classifier::DecisionTree(_) => ClassifierKind::DecisionTree,
            Classifier::LinearSvm(_) => ClassifierKind::LinearSvm,
            Classifier::FullyConnected(_) => ClassifierKind::FullyConnected,
        }
    }

    /// Feature width fixed at fit time.
    pub fn input_width(&self) -> usize {
        match self {
            Classifier::LogisticRegression(m) | Classifier::LinearSvm(m) => m.input_width(),
            Classifier::Knn(m) => m.input_width(),
            Classifier::DecisionTree(m) => m.input_width(),
            Classifier::FullyConnected(g) => g.tabular_input()[0],
        }
    }

    pub fn predict(&self, x: &[f32]) -> Result<usize> {
        match self {
            Classifier::LogisticRegression(m) | Classifier::LinearSvm(m) => m.predict(x),
            Classifier::Knn(m) => m.predict(x),
            Classifier::DecisionTree(m) => m.predict(x),
            Classifier::FullyConnected(_) => {
                check_width(self.input_width(), x.len())?;
                let t = Tensor::new([1, x.len()], x.to_vec())?;
                Ok(self.predict_batch(&t)?[0])
            }
        }
    }

    /// Predicts every row of an `[N, F]` matrix.
    pub fn predict_batch(&self, x: &Tensor<f32>) -> Result<Vec<usize>> {
        if x.rank() != 2 {
            return Err(Error::InvalidShape {
                shape: x.shape().to_vec(),
                reason: "expected an [N, F] matrix".into(),
            });
        }
        check_width(self.input_width(), x.row_len())?;
        match self {
            Classifier::FullyConnected(g) => {
                let probs = predict_probs(
                    g,
                    ModelInput {
                        tabular: x,
                        image: None,
                    },
                    256,
                )?;
                Ok(argmax_last(&probs))
            }
            _ => (0..x.rows()).map(|i| self.predict(x.row(i))).collect(),
        }
    }
}
