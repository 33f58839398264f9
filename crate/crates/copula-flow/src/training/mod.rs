//! Exact-gradient MLE training: analytic reverse-mode adjoints over the
//! flow and base log-density, Adam optimization, and bootstrap confidence
//! intervals for sweep aggregation.

pub mod adam;
pub mod bootstrap;
pub mod grad;
pub mod train;

pub use adam::AdamState;
pub use bootstrap::bootstrap_ci;
pub use grad::{loss_and_grad, LossGrad};
pub use train::{train, LossHistory, TrainConfig, TrainOutcome};
