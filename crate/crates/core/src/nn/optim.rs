use alloc::vec::Vec;

use super::config::TrainingConfig;
use super::layers::Param;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::Tensor;

/// One RMSProp update of a single tensor, elementwise:
///
/// ```text
/// s <- decay * s + (1 - decay) * g^2
/// p <- p - lr * g / (sqrt(s) + eps)
/// ```
pub fn rmsprop_step<T: Real>(
    param: &mut Tensor<T>,
    grad: &Tensor<T>,
    state: &mut Tensor<T>,
    cfg: &TrainingConfig,
) -> Result<()> {
    if param.shape() != grad.shape() || param.shape() != state.shape() {
        return Err(Error::ShapeMismatch {
            op: "rmsprop_step",
            left: param.shape().to_vec(),
            right: grad.shape().to_vec(),
        });
    }
    let (decay, lr, eps) = (cfg.rmsprop_decay, cfg.learning_rate, cfg.rmsprop_epsilon);
    for ((p, g), s) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(state.data_mut())
    {
        let g = g.as_f64();
        let ms = decay * s.as_f64() + (1.0 - decay) * g * g;
        *s = T::from_f64(ms);
        *p = T::from_f64(p.as_f64() - lr * g / (libm::sqrt(ms) + eps));
    }
    Ok(())
}

/// Running mean of squared gradients for every parameter, in visit order.
#[derive(Clone, Debug)]
pub struct RmspropState<T: Real> {
    pub mean_square: Vec<Tensor<T>>,
}

impl<T: Real> RmspropState<T> {
    pub fn zeros_like<'a>(params: impl IntoIterator<Item = &'a Param<T>>) -> Self {
        RmspropState {
            mean_square: params
                .into_iter()
                .map(|p| Tensor::zeros(p.value.shape().to_vec()))
                .collect(),
        }
    }

    /// Applies [`rmsprop_step`] to each parameter using its stored gradient.
    pub fn step(&mut self, params: Vec<&mut Param<T>>, cfg: &TrainingConfig) -> Result<()> {
        if params.len() != self.mean_square.len() {
            return Err(Error::ShapeMismatch {
                op: "rmsprop state",
                left: alloc::vec![params.len()],
                right: alloc::vec![self.mean_square.len()],
            });
        }
        for (p, s) in params.into_iter().zip(&mut self.mean_square) {
            rmsprop_step(&mut p.value, &p.grad, s, cfg)?;
        }
        Ok(())
    }
}
