//! Layers, loss, optimizer and the training loop shared by every model.

mod config;
pub mod gradcheck;
mod layers;
mod loss;
mod optim;
mod train;

pub use config::{L1Placement, TrainingConfig};
pub use layers::*;
pub use loss::{ce_logit_grad, ce_prob_grad, cross_entropy, l1_norm, loss_ce_l1};
pub use optim::{rmsprop_step, RmspropState};
pub use train::{train, train_with_observer, EpochStats, TrainData, TrainedModel};
