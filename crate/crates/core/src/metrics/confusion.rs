use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// Counts indexed `[true][predicted]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::ShapeMismatch {
                op: "confusion matrix",
                left: alloc::vec![truth.len()],
                right: alloc::vec![predicted.len()],
            });
        }
        let mut cm = Self::new();
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        for label in [truth, predicted] {
            if label >= NUM_CLASSES {
                return Err(Error::InvalidLabel {
                    label,
                    classes: NUM_CLASSES,
                });
            }
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    /// Row sums: number of samples whose true class is `c`.
    pub fn supports(&self) -> [u64; NUM_CLASSES] {
        self.counts.map(|row| row.iter().sum())
    }
}

/// One-vs-rest metrics for one class.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub per_class: [ClassMetrics; NUM_CLASSES],
    /// Unweighted mean over classes with nonzero support.
    pub macro_avg: Averages,
    /// Support-weighted mean.
    pub weighted_avg: Averages,
    pub accuracy: f64,
    pub total: u64,
    /// Metric cells whose denominator was zero and were set to 0.
    pub zero_division: usize,
    /// Classes included in the macro average.
    pub macro_classes: Vec<usize>,
}

fn ratio(num: u64, den: u64, zero_division: &mut usize) -> f64 {
    if den == 0 {
        *zero_division += 1;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 per class plus their macro and weighted means,
/// and accuracy as trace over total.
pub fn metrics(cm: &ConfusionMatrix) -> Result<EvalReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let c = cm.counts();
    let mut zero_division = 0;
    let per_class: [ClassMetrics; NUM_CLASSES] = core::array::from_fn(|k| {
        let tp = c[k][k];
        let support: u64 = c[k].iter().sum();
        let predicted: u64 = (0..NUM_CLASSES).map(|t| c[t][k]).sum();
        let (fp, fn_) = (predicted - tp, support - tp);
        let precision = ratio(tp, predicted, &mut zero_division);
        let recall = ratio(tp, support, &mut zero_division);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            zero_division += 1;
            0.0
        };
        ClassMetrics {
            tp,
            fp,
            fn_,
            tn: total - tp - fp - fn_,
            support,
            precision,
            recall,
            f1,
        }
    });
    let macro_classes: Vec<usize> = (0..NUM_CLASSES)
        .filter(|&k| per_class[k].support > 0)
        .collect();
    let m = macro_classes.len() as f64;
    let mut macro_avg = Averages::default();
    let mut weighted_avg = Averages::default();
    for pc in &per_class {
        if pc.support > 0 {
            macro_avg.precision += pc.precision / m;
            macro_avg.recall += pc.recall / m;
            macro_avg.f1 += pc.f1 / m;
        }
        let w = pc.support as f64 / total as f64;
        weighted_avg.precision += w * pc.precision;
        weighted_avg.recall += w * pc.recall;
        weighted_avg.f1 += w * pc.f1;
    }
    Ok(EvalReport {
        confusion: cm.clone(),
        per_class,
        macro_avg,
        weighted_avg,
        accuracy: cm.trace() as f64 / total as f64,
        total,
        zero_division,
        macro_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_perfect() {
        let cm =
            ConfusionMatrix::from_counts([[3, 0, 0, 0], [0, 1, 0, 0], [0, 0, 7, 0], [0, 0, 0, 2]]);
        let r = metrics(&cm).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(
            r.macro_avg,
            Averages {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(r.zero_division, 0);
    }

    #[test]
    fn f1_limit_guarded() {
        // Class 1 is never predicted: precision 0/0 and recall 0.
        let cm =
            ConfusionMatrix::from_counts([[2, 0, 0, 0], [3, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
        let r = metrics(&cm).unwrap();
        assert_eq!(r.per_class[1].precision, 0.0);
        assert_eq!(r.per_class[1].f1, 0.0);
        assert_eq!(r.zero_division, 2);
        assert!((r.per_class[0].f1 - 2.0 * 0.4 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn macro_skips_absent_classes() {
        let cm =
            ConfusionMatrix::from_counts([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]);
        let r = metrics(&cm).unwrap();
        assert_eq!(r.macro_classes, alloc::vec![0, 1]);
        assert_eq!(r.macro_avg.f1, 1.0);
    }

    #[test]
    fn empty_errors() {
        assert_eq!(
            metrics(&ConfusionMatrix::new()).unwrap_err(),
            Error::EmptyDataset
        );
    }

    #[test]
    fn bad_label() {
        assert!(ConfusionMatrix::from_predictions(&[4], &[0]).is_err());
    }
}
