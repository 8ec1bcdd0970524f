use alloc::vec::Vec;

use super::{argmax, check_training_set, check_width};
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::NUM_CLASSES;

/// k-nearest-neighbour vote under Euclidean distance. Fitting stores the
/// training set verbatim.
#[derive(Clone, Debug, PartialEq)]
pub struct Knn {
    k: usize,
    x: Tensor<f32>,
    y: Vec<usize>,
}

impl Knn {
    pub fn fit(x: &Tensor<f32>, y: &[usize], k: usize) -> Result<Self> {
        check_training_set(x, y)?;
        if k == 0 || k > y.len() {
            return Err(Error::InvalidConfig(alloc::format!(
                "knn k = {k} must lie in 1..={}",
                y.len()
            )));
        }
        Ok(Knn {
            k,
            x: x.clone(),
            y: y.to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stored_points(&self) -> &Tensor<f32> {
        &self.x
    }

    pub fn stored_labels(&self) -> &[usize] {
        &self.y
    }

    pub fn input_width(&self) -> usize {
        self.x.row_len()
    }

    /// Indices of the `k` nearest stored points, nearest first; equal
    /// distances keep the lower index first.
    pub fn neighbours(&self, q: &[f32]) -> Result<Vec<usize>> {
        check_width(self.input_width(), q.len())?;
        let mut d: Vec<(f64, usize)> = (0..self.y.len())
            .map(|i| {
                let dist = self
                    .x
                    .row(i)
                    .iter()
                    .zip(q)
                    .map(|(&a, &b)| {
                        let t = a as f64 - b as f64;
                        t * t
                    })
                    .sum::<f64>();
                (dist, i)
            })
            .collect();
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by);
            d.truncate(self.k);
        }
        d.sort_unstable_by(by);
        Ok(d.into_iter().map(|(_, i)| i).collect())
    }

    /// Majority class among the neighbours; tied votes go to the smallest class.
    pub fn predict(&self, q: &[f32]) -> Result<usize> {
        let mut votes = [0.0f64; NUM_CLASSES];
        for i in self.neighbours(q)? {
            votes[self.y[i]] += 1.0;
        }
        Ok(argmax(&votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Tensor<f32>, Vec<usize>) {
        let x = Tensor::new(
            [5, 2],
            alloc::vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 5.0, 5.0, 6.0, 5.0],
        )
        .unwrap();
        (x, alloc::vec![0, 1, 2, 3, 3])
    }

    #[test]
    fn lazy_fit_stores_verbatim() {
        let (x, y) = fixture();
        let m = Knn::fit(&x, &y, 3).unwrap();
        assert_eq!(m.stored_points(), &x);
        assert_eq!(m.stored_labels(), &y[..]);
    }

    #[test]
    fn k1_nearest_label() {
        let (x, y) = fixture();
        let m = Knn::fit(&x, &y, 1).unwrap();
        assert_eq!(m.predict(&[0.9, 0.1]).unwrap(), 1);
        assert_eq!(m.predict(&[5.9, 5.0]).unwrap(), 3);
    }

    #[test]
    fn equidistant_lower_index_first() {
        let (x, y) = fixture();
        let m = Knn::fit(&x, &y, 1).unwrap();
        // (0.5, 0) is equidistant from rows 0 and 1.
        assert_eq!(m.neighbours(&[0.5, 0.0]).unwrap(), alloc::vec![0]);
    }

    #[test]
    fn vote_ties_smallest_class() {
        let (x, y) = fixture();
        let m = Knn::fit(&x, &y, 3).unwrap();
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn k_bounds() {
        let (x, y) = fixture();
        assert!(Knn::fit(&x, &y, 0).is_err());
        assert!(Knn::fit(&x, &y, 6).is_err());
        assert!(Knn::fit(&x, &y, 5).is_ok());
    }
}
