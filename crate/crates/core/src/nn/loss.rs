use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::Tensor;

const PROB_FLOOR: f64 = 1e-12;

fn check_labels<T: Real>(probs: &Tensor<T>, labels: &[usize]) -> Result<usize> {
    if probs.rank() != 2 || probs.rows() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "loss",
            left: probs.shape().to_vec(),
            right: alloc::vec![labels.len()],
        });
    }
    let classes = probs.shape()[1];
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidLabel {
            label: bad,
            classes,
        });
    }
    Ok(classes)
}

/// Mean categorical cross-entropy of `[B, k]` probabilities.
pub fn cross_entropy<T: Real>(probs: &Tensor<T>, labels: &[usize]) -> Result<f64> {
    check_labels(probs, labels)?;
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(r, &l)| -libm::log(probs.row(r)[l].as_f64().max(PROB_FLOOR)))
        .sum();
    Ok(total / labels.len() as f64)
}

/// `Σ|w|` over the given tensors.
pub fn l1_norm<T: Real>(weights: &[&Tensor<T>]) -> f64 {
    weights
        .iter()
        .flat_map(|w| w.data().iter())
        .map(|v| v.as_f64().abs())
        .sum()
}

/// Mean cross-entropy plus `alpha · Σ|w|`.
///
/// Rows of `probs` must sum to one within 1e-5.
pub fn loss_ce_l1<T: Real>(
    probs: &Tensor<T>,
    labels: &[usize],
    weights: &[&Tensor<T>],
    alpha: f64,
) -> Result<f64> {
    check_labels(probs, labels)?;
    for r in 0..probs.rows() {
        let s: f64 = probs.row(r).iter().map(|v| v.as_f64()).sum();
        if (s - 1.0).abs() > 1e-5 {
            return Err(Error::InvalidShape {
                shape: probs.shape().to_vec(),
                reason: alloc::format!("row {r} sums to {s}, not 1"),
            });
        }
    }
    Ok(cross_entropy(probs, labels)? + alpha * l1_norm(weights))
}

/// Gradient of mean cross-entropy with respect to the pre-softmax logits:
/// `(p - onehot) / B`.
pub fn ce_logit_grad<T: Real>(probs: &Tensor<T>, labels: &[usize]) -> Result<Tensor<T>> {
    let k = check_labels(probs, labels)?;
    let inv_b = 1.0 / labels.len().max(1) as f64;
    let mut data: Vec<T> = Vec::with_capacity(probs.len());
    for (r, &l) in labels.iter().enumerate() {
        for (j, p) in probs.row(r).iter().enumerate() {
            let y = if j == l { 1.0 } else { 0.0 };
            data.push(T::from_f64((p.as_f64() - y) * inv_b));
        }
    }
    Tensor::new([labels.len(), k], data)
}

/// Gradient of mean cross-entropy with respect to the probabilities.
pub fn ce_prob_grad<T: Real>(probs: &Tensor<T>, labels: &[usize]) -> Result<Tensor<T>> {
    let k = check_labels(probs, labels)?;
    let inv_b = 1.0 / labels.len().max(1) as f64;
    let mut data: Vec<T> = alloc::vec![T::zero(); probs.len()];
    for (r, &l) in labels.iter().enumerate() {
        let p = probs.row(r)[l].as_f64();
        if p > PROB_FLOOR {
            data[r * k + l] = T::from_f64(-inv_b / p);
        }
    }
    Tensor::new([labels.len(), k], data)
}
