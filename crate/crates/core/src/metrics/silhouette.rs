use alloc::vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean silhouette coefficient of the rows of `points` under `labels`,
/// using Euclidean distance. Points alone in their cluster score 0.
pub fn mean_silhouette(points: &Tensor<f32>, labels: &[usize]) -> Result<f64> {
    let n = labels.len();
    if points.rank() != 2 || points.rows() != n {
        return Err(Error::ShapeMismatch {
            op: "silhouette",
            left: points.shape().to_vec(),
            right: vec![n],
        });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    if n == 0 || labels.iter().filter(|&&l| l == labels[0]).count() == n {
        return Err(Error::InvalidConfig(
            "silhouette needs at least two clusters".into(),
        ));
    }
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    let mut total = 0.0;
    let mut sums = vec![0.0f64; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                let d: f64 = points
                    .row(i)
                    .iter()
                    .zip(points.row(j))
                    .map(|(&a, &b)| (a as f64 - b as f64) * (a as f64 - b as f64))
                    .sum();
                sums[labels[j]] += libm::sqrt(d);
            }
        }
        let own = labels[i];
        if sizes[own] < 2 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_clusters_near_one() {
        let x = Tensor::new([4, 1], alloc::vec![0.0, 0.1, 10.0, 10.1]).unwrap();
        assert!(mean_silhouette(&x, &[0, 0, 1, 1]).unwrap() > 0.95);
    }

    #[test]
    fn mixed_clusters_negative() {
        let x = Tensor::new([4, 1], alloc::vec![0.0, 0.1, 10.0, 10.1]).unwrap();
        assert!(mean_silhouette(&x, &[0, 1, 0, 1]).unwrap() < 0.0);
    }
}
