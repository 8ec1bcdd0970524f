use alloc::format;

use crate::error::{Error, Result};

/// Which weight tensors carry the L1 penalty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum L1Placement {
    /// Kernel of the final dense layer feeding the softmax.
    #[default]
    OutputLayer,
    /// Every dense and conv kernel.
    AllWeights,
}

impl L1Placement {
    pub fn name(self) -> &'static str {
        match self {
            L1Placement::OutputLayer => "output",
            L1Placement::AllWeights => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "output" => Ok(L1Placement::OutputLayer),
            "all" => Ok(L1Placement::AllWeights),
            other => Err(Error::InvalidConfig(format!(
                "unknown l1 placement `{other}` (expected output|all)"
            ))),
        }
    }
}

/// Hyperparameters for [`train`](super::train).
///
/// Defaults: learning rate 0.001, batch 32, RMSProp decay 0.9 and epsilon
/// 1e-8, L1 alpha 0.1, 100 epochs, seed 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub rmsprop_decay: f64,
    pub rmsprop_epsilon: f64,
    pub l1_alpha: f64,
    pub l1_placement: L1Placement,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.001,
            batch_size: 32,
            rmsprop_decay: 0.9,
            rmsprop_epsilon: 1e-8,
            l1_alpha: 0.1,
            l1_placement: L1Placement::OutputLayer,
            epochs: 100,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        // lr = 0 is accepted: it is the frozen-parameters control case.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate {} must be >= 0",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rmsprop_decay {} outside (0, 1)",
                self.rmsprop_decay
            )));
        }
        if !(self.rmsprop_epsilon > 0.0) {
            return Err(Error::InvalidConfig("rmsprop_epsilon must be > 0".into()));
        }
        if !(self.l1_alpha >= 0.0 && self.l1_alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "l1_alpha {} must be >= 0",
                self.l1_alpha
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = TrainingConfig::default();
        assert_eq!(c.learning_rate, 0.001);
        assert_eq!(c.batch_size, 32);
        assert_eq!(c.l1_alpha, 0.1);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            TrainingConfig {
                batch_size: 0,
                ..Default::default()
            },
            TrainingConfig {
                rmsprop_decay: 1.0,
                ..Default::default()
            },
            TrainingConfig {
                l1_alpha: -0.1,
                ..Default::default()
            },
            TrainingConfig {
                learning_rate: f64::NAN,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
