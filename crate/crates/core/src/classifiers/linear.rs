use alloc::vec;
use alloc::vec::Vec;

use super::{argmax, check_training_set, check_width, ClassifierParams};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;
use crate::NUM_CLASSES;

/// One-vs-rest linear scorer shared by logistic regression and the linear SVM.
///
/// Classes absent from the training labels are never predicted.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    width: usize,
    /// Row-major `[NUM_CLASSES, width]`.
    weights: Vec<f64>,
    bias: [f64; NUM_CLASSES],
    present: [bool; NUM_CLASSES],
    objective_trace: Vec<f64>,
}

fn presence(y: &[usize]) -> [bool; NUM_CLASSES] {
    let mut present = [false; NUM_CLASSES];
    for &l in y {
        present[l] = true;
    }
    present
}

fn dot(w: &[f64], x: &[f32]) -> f64 {
    w.iter().zip(x).map(|(a, &b)| a * b as f64).sum()
}

fn check_hyper(p: &ClassifierParams) -> Result<()> {
    if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) || !(p.l2 >= 0.0 && p.l2.is_finite())
    {
        return Err(Error::InvalidConfig(
            "linear classifiers need learning_rate > 0 and l2 >= 0".into(),
        ));
    }
    Ok(())
}

impl LinearModel {
    /// Builds a model from `[NUM_CLASSES, F]` weights and `[NUM_CLASSES]` biases.
    /// A bias of negative infinity marks a class absent at fit time.
    pub fn from_parts(weights: &Tensor<f32>, bias: &Tensor<f32>) -> Result<Self> {
        if weights.rank() != 2 || weights.shape()[0] != NUM_CLASSES || bias.shape() != [NUM_CLASSES]
        {
            return Err(Error::ShapeMismatch {
                op: "linear model parts",
                left: weights.shape().to_vec(),
                right: bias.shape().to_vec(),
            });
        }
        let mut b = [0.0; NUM_CLASSES];
        for (dst, &src) in b.iter_mut().zip(bias.data()) {
            *dst = src as f64;
        }
        Ok(LinearModel {
            width: weights.shape()[1],
            weights: weights.data().iter().map(|&v| v as f64).collect(),
            bias: b,
            present: b.map(|v| v != f64::NEG_INFINITY),
            objective_trace: Vec::new(),
        })
    }

    pub fn weights(&self) -> Tensor<f32> {
        Tensor::new(
            [NUM_CLASSES, self.width],
            self.weights.iter().map(|&v| v as f32).collect(),
        )
        .expect("sized")
    }

    pub fn bias(&self) -> Tensor<f32> {
        let b: [f32; NUM_CLASSES] = core::array::from_fn(|c| {
            if self.present[c] {
                self.bias[c] as f32
            } else {
                f32::NEG_INFINITY
            }
        });
        Tensor::vector(&b)
    }

    pub fn input_width(&self) -> usize {
        self.width
    }

    /// Per-class scores `w_c · x + b_c`.
    pub fn scores(&self, x: &[f32]) -> Result<[f64; NUM_CLASSES]> {
        check_width(self.width, x.len())?;
        Ok(core::array::from_fn(|c| {
            if self.present[c] {
                dot(&self.weights[c * self.width..(c + 1) * self.width], x) + self.bias[c]
            } else {
                f64::NEG_INFINITY
            }
        }))
    }

    pub fn predict(&self, x: &[f32]) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }

    /// SVM primal objective of the averaged iterate after each epoch, summed
    /// over the one-vs-rest problems. Empty for logistic regression.
    pub fn objective_trace(&self) -> &[f64] {
        &self.objective_trace
    }

    /// Per-sample SGD on the logistic loss with L2 decay, seeded shuffle.
    pub fn fit_logistic(x: &Tensor<f32>, y: &[usize], p: &ClassifierParams) -> Result<Self> {
        check_training_set(x, y)?;
        check_hyper(p)?;
        let (n, f) = (x.rows(), x.row_len());
        let mut w = vec![0.0f64; NUM_CLASSES * f];
        let mut b = [0.0f64; NUM_CLASSES];
        let mut rng = Rng::seed_from_u64(p.seed);
        let mut order: Vec<usize> = (0..n).collect();
        let decay = 1.0 - p.learning_rate * p.l2;
        for _ in 0..p.epochs {
            rng.shuffle(&mut order);
            for &i in &order {
                let xi = x.row(i);
                for c in 0..NUM_CLASSES {
                    let wc = &mut w[c * f..(c + 1) * f];
                    let z = dot(wc, xi) + b[c];
                    let target = if y[i] == c { 1.0 } else { 0.0 };
                    let g = 1.0 / (1.0 + libm::exp(-z)) - target;
                    for (wj, &xj) in wc.iter_mut().zip(xi) {
                        *wj = *wj * decay - p.learning_rate * g * xj as f64;
                    }
                    b[c] -= p.learning_rate * g;
                }
            }
        }
        Ok(LinearModel {
            width: f,
            weights: w,
            bias: b,
            present: presence(y),
            objective_trace: Vec::new(),
        })
    }

    /// Full-batch subgradient descent on the L2-regularized hinge loss.
    /// The returned weights are the running average of all iterates.
    pub fn fit_svm(x: &Tensor<f32>, y: &[usize], p: &ClassifierParams) -> Result<Self> {
        check_training_set(x, y)?;
        check_hyper(p)?;
        let (n, f) = (x.rows(), x.row_len());
        let mut w = vec![0.0f64; NUM_CLASSES * f];
        let mut b = [0.0f64; NUM_CLASSES];
        let mut avg_w = w.clone();
        let mut avg_b = b;
        let mut trace = Vec::with_capacity(p.epochs);
        let mut grad = vec![0.0f64; f];
        for t in 1..=p.epochs {
            for c in 0..NUM_CLASSES {
                let wc = &mut w[c * f..(c + 1) * f];
                grad.iter_mut()
                    .zip(wc.iter())
                    .for_each(|(g, &wj)| *g = p.l2 * wj);
                let mut gb = 0.0;
                for i in 0..n {
                    let xi = x.row(i);
                    let target = if y[i] == c { 1.0 } else { -1.0 };
                    if target * (dot(wc, xi) + b[c]) < 1.0 {
                        for (g, &xj) in grad.iter_mut().zip(xi) {
                            *g -= target * xj as f64 / n as f64;
                        }
                        gb -= target / n as f64;
                    }
                }
                for (wj, g) in wc.iter_mut().zip(&grad) {
                    *wj -= p.learning_rate * g;
                }
                b[c] -= p.learning_rate * gb;

                let k = 1.0 / t as f64;
                for (a, &wj) in avg_w[c * f..(c + 1) * f].iter_mut().zip(wc.iter()) {
                    *a += (wj - *a) * k;
                }
                avg_b[c] += (b[c] - avg_b[c]) * k;
            }
            trace.push(svm_objective(&avg_w, &avg_b, x, y, p.l2));
        }
        Ok(LinearModel {
            width: f,
            weights: avg_w,
            bias: avg_b,
            present: presence(y),
            objective_trace: trace,
        })
    }
}

/// Sum over classes of `l2/2 · |w_c|² + mean_i max(0, 1 − t_ic (w_c·x_i + b_c))`.
pub(crate) fn svm_objective(
    w: &[f64],
    b: &[f64; NUM_CLASSES],
    x: &Tensor<f32>,
    y: &[usize],
    l2: f64,
) -> f64 {
    let (n, f) = (x.rows(), x.row_len());
    let mut total = 0.0;
    for c in 0..NUM_CLASSES {
        let wc = &w[c * f..(c + 1) * f];
        let mut hinge = 0.0;
        for i in 0..n {
            let target = if y[i] == c { 1.0 } else { -1.0 };
            hinge += (1.0 - target * (dot(wc, x.row(i)) + b[c])).max(0.0);
        }
        total += 0.5 * l2 * wc.iter().map(|v| v * v).sum::<f64>() + hinge / n as f64;
    }
    total
}
