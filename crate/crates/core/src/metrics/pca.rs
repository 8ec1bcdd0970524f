use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

pub const PCA_TOLERANCE: f64 = 1e-9;
pub const PCA_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaResult {
    /// `[N, dims]` scores of the centered data.
    pub projection: Tensor<f32>,
    /// `dims` unit vectors of length F, mutually orthogonal.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the sample covariance for each component.
    pub explained_variance: Vec<f64>,
    /// Share of total variance per component; all zero for constant data.
    pub explained_variance_ratio: Vec<f64>,
    pub total_variance: f64,
    /// Power iterations spent per component.
    pub iterations: Vec<usize>,
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
}

fn sign_fix(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Top principal components by power iteration with deflation.
///
/// Each component starts from a seeded random vector, is kept orthogonal to
/// the earlier components, and stops when successive iterates move less than
/// [`PCA_TOLERANCE`] or after [`PCA_MAX_ITERATIONS`]. Signs are fixed so the
/// largest-magnitude coordinate is positive.
pub fn pca_project(x: &Tensor<f32>, dims: usize, seed: u64) -> Result<PcaResult> {
    if x.rank() != 2 || x.rows() < 3 || x.row_len() < 2 {
        return Err(Error::InvalidShape {
            shape: x.shape().to_vec(),
            reason: "pca needs at least 3 rows and 2 columns".into(),
        });
    }
    let (n, f) = (x.rows(), x.row_len());
    if dims == 0 || dims > f {
        return Err(Error::InvalidConfig(alloc::format!(
            "pca dims {dims} outside 1..={f}"
        )));
    }

    let mut mean = vec![0.0f64; f];
    for i in 0..n {
        mean.iter_mut()
            .zip(x.row(i))
            .for_each(|(m, &v)| *m += v as f64);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<f64> = (0..n)
        .flat_map(|i| {
            x.row(i)
                .iter()
                .zip(&mean)
                .map(|(&v, m)| v as f64 - m)
                .collect::<Vec<_>>()
        })
        .collect();

    let mut cov = vec![0.0f64; f * f];
    for row in centered.chunks_exact(f) {
        for a in 0..f {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in a..f {
                cov[a * f + b] += ra * row[b];
            }
        }
    }
    for a in 0..f {
        for b in a..f {
            let v = cov[a * f + b] / (n - 1) as f64;
            cov[a * f + b] = v;
            cov[b * f + a] = v;
        }
    }
    let total_variance: f64 = (0..f).map(|a| cov[a * f + a]).sum();
    let degenerate = total_variance <= 1e-12 * (1.0 + mean.iter().map(|m| m * m).sum::<f64>());

    let mut rng = Rng::seed_from_u64(seed);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(dims);
    let mut eigen = Vec::with_capacity(dims);
    let mut iterations = Vec::with_capacity(dims);
    let mut deflated = cov.clone();
    let mut next = vec![0.0f64; f];
    for _ in 0..dims {
        let mut v: Vec<f64> = (0..f).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        orthogonalize(&mut v, &components);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut lambda = 0.0;
        let mut iters = 0;
        if !degenerate {
            while iters < PCA_MAX_ITERATIONS {
                iters += 1;
                for (a, out) in next.iter_mut().enumerate() {
                    *out = deflated[a * f..(a + 1) * f]
                        .iter()
                        .zip(&v)
                        .map(|(c, x)| c * x)
                        .sum();
                }
                orthogonalize(&mut next, &components);
                let nn = norm(&next);
                if nn <= 1e-300 {
                    break;
                }
                next.iter_mut().for_each(|x| *x /= nn);
                let delta = norm(&next.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
                core::mem::swap(&mut v, &mut next);
                if delta < PCA_TOLERANCE {
                    break;
                }
            }
            let cv: Vec<f64> = (0..f)
                .map(|a| {
                    cov[a * f..(a + 1) * f]
                        .iter()
                        .zip(&v)
                        .map(|(c, x)| c * x)
                        .sum()
                })
                .collect();
            lambda = cv.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        }
        // A final re-orthogonalization keeps the basis orthonormal to rounding.
        orthogonalize(&mut v, &components);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        sign_fix(&mut v);
        for a in 0..f {
            for b in 0..f {
                deflated[a * f + b] -= lambda * v[a] * v[b];
            }
        }
        components.push(v);
        eigen.push(lambda);
        iterations.push(iters);
    }

    let mut proj = Vec::with_capacity(n * dims);
    for row in centered.chunks_exact(f) {
        for comp in &components {
            let s: f64 = if degenerate {
                0.0
            } else {
                row.iter().zip(comp).map(|(a, b)| a * b).sum()
            };
            proj.push(s as f32);
        }
    }
    let ratio = eigen
        .iter()
        .map(|&l| if degenerate { 0.0 } else { l / total_variance })
        .collect();
    Ok(PcaResult {
        projection: Tensor::new([n, dims], proj)?,
        components,
        explained_variance: if degenerate { vec![0.0; dims] } else { eigen },
        explained_variance_ratio: ratio,
        total_variance: if degenerate { 0.0 } else { total_variance },
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_rank_one() {
        let dir = [1.0f32, -2.0, 0.5, 3.0, 1.5];
        let mut data = Vec::new();
        for i in 0..20 {
            let t = i as f32 * 0.37 - 3.0;
            data.extend(dir.iter().map(|d| d * t + 1.0));
        }
        let r = pca_project(&Tensor::new([20, 5], data).unwrap(), 2, 0).unwrap();
        assert!(r.explained_variance_ratio[0] >= 0.999);
    }

    #[test]
    fn zero_variance() {
        let r = pca_project(&Tensor::full([5, 3], 2.5f32), 2, 0).unwrap();
        assert!(r.projection.data().iter().all(|&v| v == 0.0));
        assert_eq!(r.explained_variance, vec![0.0, 0.0]);
        assert_eq!(r.explained_variance_ratio, vec![0.0, 0.0]);
    }

    #[test]
    fn too_small() {
        assert!(pca_project(&Tensor::zeros([2, 3]), 2, 0).is_err());
        assert!(pca_project(&Tensor::zeros([5, 1]), 1, 0).is_err());
        assert!(pca_project(&Tensor::zeros([5, 3]), 4, 0).is_err());
    }

    #[test]
    fn sign_convention() {
        let mut data = Vec::new();
        for i in 0..10 {
            data.extend_from_slice(&[i as f32, -(i as f32) * 3.0]);
        }
        let r = pca_project(&Tensor::new([10, 2], data).unwrap(), 2, 4).unwrap();
        for c in &r.components {
            let big = c
                .iter()
                .copied()
                .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(big > 0.0);
        }
    }
}
