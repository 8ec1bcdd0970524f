use alloc::vec;
use alloc::vec::Vec;

use super::config::TrainingConfig;
use super::loss::{ce_logit_grad, l1_norm};
use super::optim::RmspropState;
use crate::error::{Error, Result};
use crate::models::{ModelGraph, ModelInput};
use crate::rng::Rng;
use crate::scalar::Real;
use crate::tensor::{argmax_last, Tensor};

/// Borrowed training set: row `i` of each tensor belongs to `labels[i]`.
#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a, T: Real> {
    pub tabular: &'a Tensor<T>,
    pub image: Option<&'a Tensor<T>>,
    pub labels: &'a [usize],
}

impl<T: Real> TrainData<'_, T> {
    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if n == 0 || self.tabular.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.tabular.rows() != n || self.image.is_some_and(|i| i.rows() != n) {
            return Err(Error::ShapeMismatch {
                op: "training data rows",
                left: self.tabular.shape().to_vec(),
                right: vec![n],
            });
        }
        Ok(())
    }
}

/// Per-epoch summary passed to observers.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean cross-entropy plus the mean L1 term over the epoch's batches.
    pub loss: f64,
    /// Accuracy of the pre-update predictions seen during the epoch.
    pub accuracy: f64,
}

/// A model after training, with its per-epoch loss trace.
#[derive(Clone, Debug)]
pub struct TrainedModel<T: Real = f32> {
    pub model: ModelGraph<T>,
    pub loss_trace: Vec<f64>,
    pub accuracy_trace: Vec<f64>,
}

/// Mini-batch RMSProp on cross-entropy plus L1.
///
/// Each epoch reshuffles with a seeded Fisher-Yates pass and keeps the short
/// final batch. Identical inputs and config give a bit-identical loss trace.
pub fn train<T: Real>(
    model: ModelGraph<T>,
    data: TrainData<'_, T>,
    cfg: &TrainingConfig,
) -> Result<TrainedModel<T>> {
    train_with_observer(model, data, cfg, |_, _| {})
}

pub fn train_with_observer<T: Real>(
    mut model: ModelGraph<T>,
    data: TrainData<'_, T>,
    cfg: &TrainingConfig,
    mut observer: impl FnMut(&EpochStats, &ModelGraph<T>),
) -> Result<TrainedModel<T>> {
    cfg.validate()?;
    data.validate()?;
    let n = data.labels.len();
    if let Some(&bad) = data.labels.iter().find(|&&l| l >= crate::NUM_CLASSES) {
        return Err(Error::InvalidLabel {
            label: bad,
            classes: crate::NUM_CLASSES,
        });
    }

    let mask = model.l1_mask(cfg.l1_placement);
    let mut state = RmspropState::zeros_like(model.params());
    let mut rng = Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut sample_ce = vec![0.0f64; n];
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut accuracy_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut l1_sum = 0.0;
        let mut batches = 0usize;
        let mut correct = 0usize;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let tab = data.tabular.select_rows(idx)?;
            let img = data.image.map(|t| t.select_rows(idx)).transpose()?;
            let labels: Vec<usize> = idx.iter().map(|&i| data.labels[i]).collect();

            let probs = model.forward(ModelInput {
                tabular: &tab,
                image: img.as_ref(),
            })?;
            let l1 = if cfg.l1_alpha > 0.0 {
                l1_norm(&model.l1_weights(cfg.l1_placement))
            } else {
                0.0
            };
            let mut batch_ce = 0.0;
            for (r, (&i, &y)) in idx.iter().zip(&labels).enumerate() {
                let ce = -libm::log(probs.row(r)[y].as_f64().max(1e-12));
                sample_ce[i] = ce;
                batch_ce += ce;
            }
            let batch_loss = batch_ce / idx.len() as f64 + cfg.l1_alpha * l1;
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            correct += argmax_last(&probs)
                .iter()
                .zip(&labels)
                .filter(|(p, y)| p == y)
                .count();
            l1_sum += l1;
            batches += 1;

            let d_logits = ce_logit_grad(&probs, &labels)?;
            model.backward_from_logits(&d_logits)?;
            let mut params = model.params_mut();
            if cfg.l1_alpha > 0.0 {
                let alpha = T::from_f64(cfg.l1_alpha);
                for (p, _) in params.iter_mut().zip(&mask).filter(|(_, m)| **m) {
                    for (g, &w) in p.grad.data_mut().iter_mut().zip(p.value.data()) {
                        if w > T::zero() {
                            *g += alpha;
                        } else if w < T::zero() {
                            *g -= alpha;
                        }
                    }
                }
            }
            state.step(params, cfg)?;
        }
        // Summed in sample order so the trace does not depend on the shuffle.
        let ce: f64 = sample_ce.iter().sum::<f64>() / n as f64;
        let loss = ce + cfg.l1_alpha * l1_sum / batches as f64;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: batches,
            });
        }
        let stats = EpochStats {
            epoch,
            loss,
            accuracy: correct as f64 / n as f64,
        };
        observer(&stats, &model);
        loss_trace.push(loss);
        accuracy_trace.push(stats.accuracy);
    }
    Ok(TrainedModel {
        model,
        loss_trace,
        accuracy_trace,
    })
}

impl<T: Real> TrainedModel<T> {
    /// Predicted class per row.
    pub fn predict(&self, input: ModelInput<'_, T>) -> Result<Vec<usize>> {
        let probs = crate::models::predict_probs(&self.model, input, 256)?;
        Ok(argmax_last(&probs))
    }

    /// Fraction of rows whose predicted class equals the label.
    pub fn accuracy(&self, input: ModelInput<'_, T>, labels: &[usize]) -> Result<f64> {
        let pred = self.predict(input)?;
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(pred.iter().zip(labels).filter(|(p, y)| p == y).count() as f64 / labels.len() as f64)
    }
}
