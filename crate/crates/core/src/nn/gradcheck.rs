//! Central finite-difference gradient checks.
//!
//! The numeric side only ever calls pure forward passes ([`Layer::infer`],
//! [`ModelGraph::infer`]), so it stays independent of the backward code it
//! is checking. Run it on `f64` builds.

use alloc::vec;
use alloc::vec::Vec;

use super::config::L1Placement;
use super::layers::Layer;
use super::loss::{ce_prob_grad, cross_entropy, l1_norm};
use crate::error::Result;
use crate::models::{ModelGraph, ModelInput};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// `‖a − n‖ / max(‖a‖, ‖n‖)`, or 0 when both are negligible.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n) * (a - n))
        .sum();
    let na: f64 = analytic.iter().map(|a| a * a).sum();
    let nn: f64 = numeric.iter().map(|a| a * a).sum();
    let denom = libm::sqrt(na.max(nn));
    if denom < 1e-10 {
        return 0.0;
    }
    libm::sqrt(diff) / denom
}

/// Outcome of one check: the worst relative error over checked tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    /// Relative error per checked tensor (input first for layer checks).
    pub per_tensor: Vec<f64>,
    pub coordinates: usize,
}

fn sample_coords(len: usize, max: usize, rng: &mut Rng) -> Vec<usize> {
    if len <= max {
        return (0..len).collect();
    }
    let mut all: Vec<usize> = (0..len).collect();
    rng.shuffle(&mut all);
    all.truncate(max);
    all.sort_unstable();
    all
}

fn finish(per_tensor: Vec<f64>, coordinates: usize) -> GradCheck {
    GradCheck {
        max_relative_error: per_tensor.iter().copied().fold(0.0, f64::max),
        per_tensor,
        coordinates,
    }
}

/// Checks one layer on the scalar objective `Σ forward(x) ⊙ R` for a fixed
/// random `R`, covering the input gradient and every parameter gradient.
pub fn check_layer(
    layer: &mut Layer<f64>,
    input: &Tensor<f64>,
    step: f64,
    max_coords: usize,
    rng: &mut Rng,
) -> Result<GradCheck> {
    let out = layer.forward(input)?;
    let weights = Tensor::from_fn(out.shape().to_vec(), |_| rng.uniform_range(-1.0, 1.0));
    let objective = |l: &Layer<f64>, x: &Tensor<f64>| -> Result<f64> {
        let y = l.infer(x)?;
        Ok(y.data()
            .iter()
            .zip(weights.data())
            .map(|(a, b)| a * b)
            .sum())
    };
    let dx = layer.backward(&weights)?;

    let mut per_tensor = Vec::new();
    let mut coords_total = 0;

    let coords = sample_coords(input.len(), max_coords, rng);
    let mut numeric = Vec::with_capacity(coords.len());
    let mut x = input.clone();
    for &c in &coords {
        let orig = x.data()[c];
        x.data_mut()[c] = orig + step;
        let plus = objective(layer, &x)?;
        x.data_mut()[c] = orig - step;
        let minus = objective(layer, &x)?;
        x.data_mut()[c] = orig;
        numeric.push((plus - minus) / (2.0 * step));
    }
    let analytic: Vec<f64> = coords.iter().map(|&c| dx.data()[c]).collect();
    per_tensor.push(relative_error(&analytic, &numeric));
    coords_total += coords.len();

    let grads: Vec<Tensor<f64>> = layer.params().iter().map(|p| p.grad.clone()).collect();
    for (pi, grad) in grads.iter().enumerate() {
        let coords = sample_coords(grad.len(), max_coords, rng);
        let mut numeric = Vec::with_capacity(coords.len());
        for &c in &coords {
            let orig = layer.params()[pi].value.data()[c];
            layer.params_mut()[pi].value.data_mut()[c] = orig + step;
            let plus = objective(layer, input)?;
            layer.params_mut()[pi].value.data_mut()[c] = orig - step;
            let minus = objective(layer, input)?;
            layer.params_mut()[pi].value.data_mut()[c] = orig;
            numeric.push((plus - minus) / (2.0 * step));
        }
        let analytic: Vec<f64> = coords.iter().map(|&c| grad.data()[c]).collect();
        per_tensor.push(relative_error(&analytic, &numeric));
        coords_total += coords.len();
    }
    Ok(finish(per_tensor, coords_total))
}

/// Total loss of a model the way training defines it, via the pure path.
pub fn model_loss(
    model: &ModelGraph<f64>,
    input: ModelInput<'_, f64>,
    labels: &[usize],
    alpha: f64,
    placement: L1Placement,
) -> Result<f64> {
    let probs = model.infer(input)?.probs;
    Ok(cross_entropy(&probs, labels)? + alpha * l1_norm(&model.l1_weights(placement)))
}

/// Checks every parameter tensor of a composed model against the total loss
/// (cross-entropy through the softmax layer plus L1), sampling at most
/// `max_coords` coordinates per tensor.
pub fn check_model(
    model: &mut ModelGraph<f64>,
    input: ModelInput<'_, f64>,
    labels: &[usize],
    alpha: f64,
    placement: L1Placement,
    step: f64,
    max_coords: usize,
    rng: &mut Rng,
) -> Result<GradCheck> {
    let probs = model.forward(input)?;
    let d_probs = ce_prob_grad(&probs, labels)?;
    model.backward(&d_probs)?;
    let mask = model.l1_mask(placement);
    let analytic_grads: Vec<Tensor<f64>> = model
        .params()
        .iter()
        .zip(&mask)
        .map(|(p, &m)| {
            let mut g = p.grad.clone();
            if m {
                for (gv, &w) in g.data_mut().iter_mut().zip(p.value.data()) {
                    *gv += alpha
                        * if w > 0.0 {
                            1.0
                        } else if w < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                }
            }
            g
        })
        .collect();

    let mut per_tensor = vec![];
    let mut coords_total = 0;
    for (pi, grad) in analytic_grads.iter().enumerate() {
        let coords = sample_coords(grad.len(), max_coords, rng);
        let mut numeric = Vec::with_capacity(coords.len());
        for &c in &coords {
            let orig = model.params()[pi].value.data()[c];
            model.params_mut()[pi].value.data_mut()[c] = orig + step;
            let plus = model_loss(model, input, labels, alpha, placement)?;
            model.params_mut()[pi].value.data_mut()[c] = orig - step;
            let minus = model_loss(model, input, labels, alpha, placement)?;
            model.params_mut()[pi].value.data_mut()[c] = orig;
            numeric.push((plus - minus) / (2.0 * step));
        }
        let analytic: Vec<f64> = coords.iter().map(|&c| grad.data()[c]).collect();
        per_tensor.push(relative_error(&analytic, &numeric));
        coords_total += coords.len();
    }
    Ok(finish(per_tensor, coords_total))
}
