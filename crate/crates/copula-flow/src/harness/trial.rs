//! One experiment trial: draw fresh data from the trial's sub-streams,
//! train a freshly initialized flow, and evaluate the diagnostics.

use std::path::PathBuf;

use serde::Serialize;

use super::config::{streams, ExperimentConfig};
use crate::coupling::CopulaBase;
use crate::error::Result;
use crate::evaluation::{empirical_quantile, model_quantiles, QuantileCurve};
use crate::flow::Flow;
use crate::numerics::Rng;
use crate::training::{train, LossHistory};
use crate::Dataset;

/// Probability grid used for the quantile diagnostics: 0.05 .. 0.95.
pub fn quantile_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

/// Draws for the model-side quantile curves.
const QUANTILE_DRAWS: usize = 100_000;

/// Per-trial metadata.
#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub index: usize,
    /// First sub-stream of the trial's block under the master seed.
    pub stream: u64,
    pub final_test_nll: f64,
    pub diverged: bool,
    /// Final test NLL above the divergence threshold. Applied only at
    /// aggregation time; the trial's artifacts are kept either way.
    pub excluded: bool,
    pub artifacts: Vec<PathBuf>,
}

/// Everything a trial produces, before any file is written.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub result: TrialResult,
    pub history: LossHistory,
    pub params: Vec<f64>,
    /// model_* and data_* quantile curves on [`quantile_grid`].
    pub quantiles: Vec<QuantileCurve>,
    /// Saturated inverse passes during the quantile sampling.
    pub saturated_draws: usize,
}

/// Sample the study's target distribution (Gumbel ρ=2.5 copula with
/// t₂(0,1) marginals).
pub fn generate_target(rng: &mut Rng, n: usize) -> Dataset {
    crate::coupling::target_distribution().sample(rng, n)
}

/// Run trial `index` of the configured experiment. Deterministic in
/// (config, index); independent of all other trials.
pub fn run_trial(config: &ExperimentConfig, index: usize) -> Result<TrialOutput> {
    let target = config.target.build()?;
    let base = config.base.build()?;
    run_trial_with(config, index, &target, &base)
}

pub(crate) fn run_trial_with(
    config: &ExperimentConfig,
    index: usize,
    target: &CopulaBase,
    base: &CopulaBase,
) -> Result<TrialOutput> {
    let seed = config.sweep.seed;
    let stream = |slot: u64| Rng::substream(seed, streams::trial(index, slot));

    let train_data = target.sample(&mut stream(streams::TRAIN_DATA), config.training.n_train);
    let test_data = target.sample(&mut stream(streams::TEST_DATA), config.training.n_test);

    let mut flow = Flow::standard(config.dim(), &mut stream(streams::FLOW_INIT));
    let outcome = train(
        &mut flow,
        base,
        &train_data,
        &test_data,
        &config.training.train_config(),
        &mut stream(streams::SHUFFLE),
    )?;

    let final_test_nll = if outcome.diverged {
        f64::INFINITY
    } else {
        outcome.history.final_test_nll()
    };
    let excluded = !(final_test_nll <= config.sweep.divergence_threshold);

    let ps = quantile_grid();
    let mq = model_quantiles(
        &flow,
        base,
        &mut stream(streams::QUANTILES),
        QUANTILE_DRAWS,
        &ps,
    );
    let mut quantiles = Vec::with_capacity(6);
    for curve in &mq.coords {
        quantiles.push(QuantileCurve {
            ps: curve.ps.clone(),
            values: curve.values.clone(),
            label: format!("model_{}", curve.label),
        });
    }
    quantiles.push(QuantileCurve {
        ps: mq.norm.ps.clone(),
        values: mq.norm.values.clone(),
        label: "model_norm".to_string(),
    });
    for j in 0..test_data.dim() {
        quantiles.push(empirical_quantile(
            &test_data.column(j),
            &ps,
            &format!("data_x{}", j + 1),
        ));
    }
    let norms: Vec<f64> = test_data
        .rows()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    quantiles.push(empirical_quantile(&norms, &ps, "data_norm"));

    Ok(TrialOutput {
        result: TrialResult {
            index,
            stream: streams::trial(index, 0),
            final_test_nll,
            diverged: outcome.diverged,
            excluded,
            artifacts: Vec::new(),
        },
        history: outcome.history,
        params: flow.params().to_vec(),
        quantiles,
        saturated_draws: mq.saturated,
    })
}
