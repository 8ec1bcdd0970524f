//! Seeded stratified train/test partition.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Splits record indices so each class keeps (to rounding) the same share in
/// train as in the full set. Both index lists come back sorted.
pub fn stratified_split(
    labels: &[usize],
    train_ratio: f64,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "split ratio {train_ratio} outside (0, 1)"
        )));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        rng.shuffle(&mut idx);
        let n_train = libm::round(train_ratio * idx.len() as f64) as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
