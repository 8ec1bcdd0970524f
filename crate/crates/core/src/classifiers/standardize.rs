use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Per-column affine map to zero mean and unit variance, fitted on one
/// matrix and applied to others. Constant columns map to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Tensor<f32>) -> Result<Self> {
        if x.rank() != 2 || x.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let (n, f) = (x.rows(), x.row_len());
        let mut mean = alloc::vec![0.0f64; f];
        for i in 0..n {
            for (m, &v) in mean.iter_mut().zip(x.row(i)) {
                *m += v as f64;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = alloc::vec![0.0f64; f];
        for i in 0..n {
            for ((s, &v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v as f64 - m) * (v as f64 - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n as f64);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn from_parts(mean: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if mean.len() != scale.len() || scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig(
                "standardizer needs matching positive scales".into(),
            ));
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn transform(&self, x: &Tensor<f32>) -> Result<Tensor<f32>> {
        if x.rank() != 2 || x.row_len() != self.mean.len() {
            return Err(Error::ShapeMismatch {
                op: "standardize",
                left: x.shape().to_vec(),
                right: alloc::vec![self.mean.len()],
            });
        }
        let f = self.mean.len();
        let data = x
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| ((v as f64 - self.mean[i % f]) / self.scale[i % f]) as f32)
            .collect();
        Tensor::new(x.shape().to_vec(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_variance() {
        let x = Tensor::new([4, 2], alloc::vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0]).unwrap();
        let s = Standardizer::fit(&x).unwrap();
        let z = s.transform(&x).unwrap();
        let col0: Vec<f64> = (0..4).map(|i| z.row(i)[0] as f64).collect();
        assert!(col0.iter().sum::<f64>().abs() < 1e-6);
        assert!((col0.iter().map(|v| v * v).sum::<f64>() / 4.0 - 1.0).abs() < 1e-6);
        assert!((0..4).all(|i| z.row(i)[1] == 0.0));
    }
}
