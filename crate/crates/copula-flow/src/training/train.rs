//! The MLE training loop: shuffled minibatches, Adam updates, and a loss
//! history evaluated on a per-epoch schedule.

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::grad::{accumulate, GradScratch};
use crate::coupling::CopulaBase;
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::numerics::Rng;
use crate::Dataset;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Global-norm gradient clip; absent means off.
    pub grad_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            epochs: 50,
            grad_clip: None,
        }
    }
}

/// Training and test loss (mean NLL) at each evaluation point. Index 0 is
/// the pre-training evaluation; index e is the state after epoch e.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    pub epochs: Vec<usize>,
    pub train_nll: Vec<f64>,
    pub test_nll: Vec<f64>,
}

impl LossHistory {
    pub fn final_test_nll(&self) -> f64 {
        *self.test_nll.last().expect("history has the initial evaluation")
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: LossHistory,
    /// Set when the loss was non-finite at three consecutive evaluation
    /// points; the loop aborts early in that case.
    pub diverged: bool,
}

/// Mean NLL over a dataset; non-finite values propagate.
fn mean_nll(flow: &Flow, base: &CopulaBase, data: &Dataset) -> f64 {
    let mut sum = 0.0;
    for row in data.rows() {
        sum += -flow.model_log_pdf(base, row);
    }
    sum / data.len() as f64
}

/// MLE training of the flow against the base distribution.
///
/// Shuffles with the caller's RNG each epoch, uses the last partial
/// minibatch, and evaluates train/test NLL after every epoch (plus the
/// initial state). A trial whose evaluation is non-finite three times in
/// a row is aborted and flagged as diverged, never dropped silently.
pub fn train(
    flow: &mut Flow,
    base: &CopulaBase,
    train_data: &Dataset,
    test_data: &Dataset,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<TrainOutcome> {
    if train_data.dim() != flow.dim() || test_data.dim() != flow.dim() {
        return Err(Error::Config("data dimension does not match the flow".into()));
    }
    if config.batch_size == 0 || config.batch_size > train_data.len() {
        return Err(Error::Config(format!(
            "batch size {} must be in 1..={}",
            config.batch_size,
            train_data.len()
        )));
    }

    let mut history = LossHistory {
        epochs: Vec::with_capacity(config.epochs + 1),
        train_nll: Vec::with_capacity(config.epochs + 1),
        test_nll: Vec::with_capacity(config.epochs + 1),
    };
    let mut adam = AdamState::new(flow.n_params());
    let mut scratch = GradScratch::for_flow(flow);
    let mut grad = vec![0.0; flow.n_params()];
    let mut indices: Vec<usize> = (0..train_data.len()).collect();
    let mut consecutive_bad = 0usize;
    let mut diverged = false;

    let evaluate = |flow: &Flow, epoch: usize, history: &mut LossHistory| -> bool {
        let tr = mean_nll(flow, base, train_data);
        let te = mean_nll(flow, base, test_data);
        history.epochs.push(epoch);
        history.train_nll.push(tr);
        history.test_nll.push(te);
        tr.is_finite() && te.is_finite()
    };

    if !evaluate(flow, 0, &mut history) {
        consecutive_bad = 1;
    }

    'epochs: for epoch in 1..=config.epochs {
        // Fisher-Yates with the trial stream
        for i in (1..indices.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            indices.swap(i, j);
        }
        for chunk in indices.chunks(config.batch_size) {
            grad.fill(0.0);
            let rows = chunk.iter().map(|&i| train_data.row(i));
            let (_nll, _bad) = accumulate(flow, base, rows, chunk.len(), &mut scratch, &mut grad);
            if let Some(clip) = config.grad_clip {
                let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > clip {
                    let s = clip / norm;
                    for g in grad.iter_mut() {
                        *g *= s;
                    }
                }
            }
            adam.step(flow.params_mut(), &grad);
        }
        if evaluate(flow, epoch, &mut history) {
            consecutive_bad = 0;
        } else {
            consecutive_bad += 1;
            if consecutive_bad >= 3 {
                diverged = true;
                break 'epochs;
            }
        }
    }

    Ok(TrainOutcome { history, diverged })
}
