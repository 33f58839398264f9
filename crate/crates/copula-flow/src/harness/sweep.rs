//! Trial sweeps: run every trial (in parallel), aggregate the included
//! ones with bootstrap confidence bands, and emit the file set.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{streams, ExperimentConfig};
use super::io::{
    write_losses_csv, write_manifest, write_params, write_quantiles_csv, write_summary_csv,
    write_trials_csv, Manifest, SummaryRow, TrialRow,
};
use super::trial::{run_trial_with, TrialOutput};
use crate::error::Result;
use crate::flow::Flow;
use crate::numerics::Rng;
use crate::training::bootstrap_ci;

/// Aggregated sweep statistics over the included trials.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub epochs: Vec<usize>,
    pub mean_train: Vec<f64>,
    pub ci_train: Vec<(f64, f64)>,
    pub mean_test: Vec<f64>,
    pub ci_test: Vec<(f64, f64)>,
    pub n_included: usize,
    pub excluded: usize,
    pub diverged: usize,
    /// True when the exclusion rule removed every trial.
    pub empty_aggregate: bool,
}

/// Sweep results: the aggregate plus every per-trial output, in index
/// order.
#[derive(Debug)]
pub struct SweepOutcome {
    pub summary: SweepSummary,
    pub trials: Vec<TrialOutput>,
}

/// Run all configured trials and aggregate. Trials execute concurrently;
/// each consumes only its own sub-streams, so the outcome is a pure
/// function of the configuration.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let target = config.target.build()?;
    let base = config.base.build()?;
    let trials: Vec<TrialOutput> = (0..config.sweep.trials)
        .into_par_iter()
        .map(|i| run_trial_with(config, i, &target, &base))
        .collect::<Result<Vec<_>>>()?;
    let summary = aggregate(config, &trials);
    Ok(SweepOutcome { summary, trials })
}

/// The exclusion rule is applied here and only here: excluded trials stay
/// on disk and in `trials`, they just do not enter the aggregate.
pub fn aggregate(config: &ExperimentConfig, trials: &[TrialOutput]) -> SweepSummary {
    let included: Vec<&TrialOutput> = trials.iter().filter(|t| !t.result.excluded).collect();
    let excluded = trials.len() - included.len();
    let diverged = trials.iter().filter(|t| t.result.diverged).count();

    if included.is_empty() {
        return SweepSummary {
            epochs: Vec::new(),
            mean_train: Vec::new(),
            ci_train: Vec::new(),
            mean_test: Vec::new(),
            ci_test: Vec::new(),
            n_included: 0,
            excluded,
            diverged,
            empty_aggregate: true,
        };
    }

    let epochs = included[0].history.epochs.clone();
    for t in &included {
        assert_eq!(
            t.history.epochs, epochs,
            "included trials share the evaluation schedule"
        );
    }
    let mut rng = Rng::substream(config.sweep.seed, streams::BOOTSTRAP);
    let level = config.sweep.confidence_level;
    let resamples = config.sweep.bootstrap_resamples;

    let mut mean_train = Vec::with_capacity(epochs.len());
    let mut ci_train = Vec::with_capacity(epochs.len());
    let mut mean_test = Vec::with_capacity(epochs.len());
    let mut ci_test = Vec::with_capacity(epochs.len());
    for e in 0..epochs.len() {
        // train first, then test, consuming the bootstrap stream in a
        // fixed order
        let train: Vec<f64> = included.iter().map(|t| t.history.train_nll[e]).collect();
        mean_train.push(train.iter().sum::<f64>() / train.len() as f64);
        ci_train.push(bootstrap_ci(&train, level, resamples, &mut rng));
        let test: Vec<f64> = included.iter().map(|t| t.history.test_nll[e]).collect();
        mean_test.push(test.iter().sum::<f64>() / test.len() as f64);
        ci_test.push(bootstrap_ci(&test, level, resamples, &mut rng));
    }

    SweepSummary {
        epochs,
        mean_train,
        ci_train,
        mean_test,
        ci_test,
        n_included: included.len(),
        excluded,
        diverged,
        empty_aggregate: false,
    }
}

/// Write the sweep's file set under `out_dir`. Returns the emitted paths
/// (also recorded in the manifest) and fills each trial's artifact list.
pub fn emit_sweep(
    config: &ExperimentConfig,
    outcome: &mut SweepOutcome,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    fs::create_dir_all(out_dir.join("params"))?;
    let mut artifacts = Vec::new();

    let losses: Vec<(usize, &crate::training::LossHistory)> = outcome
        .trials
        .iter()
        .map(|t| (t.result.index, &t.history))
        .collect();
    let path = out_dir.join("losses.csv");
    write_losses_csv(&path, &losses)?;
    artifacts.push(path);

    let path = out_dir.join("summary.csv");
    write_summary_csv(&path, &summary_rows(&outcome.summary))?;
    artifacts.push(path);

    let rows: Vec<TrialRow> = outcome
        .trials
        .iter()
        .map(|t| TrialRow {
            trial: t.result.index,
            stream: t.result.stream,
            final_test_nll: t.result.final_test_nll,
            diverged: t.result.diverged,
            excluded: t.result.excluded,
        })
        .collect();
    let path = out_dir.join("trials.csv");
    write_trials_csv(&path, &rows)?;
    artifacts.push(path);

    let curves: Vec<(usize, &crate::evaluation::QuantileCurve)> = outcome
        .trials
        .iter()
        .flat_map(|t| t.quantiles.iter().map(move |q| (t.result.index, q)))
        .collect();
    let path = out_dir.join("quantiles.csv");
    write_quantiles_csv(&path, &curves)?;
    artifacts.push(path);

    let dim = config.dim();
    for t in &mut outcome.trials {
        let mut flow = Flow::standard(dim, &mut Rng::substream(0, 0));
        flow.set_params(&t.params)?;
        let path = out_dir.join(format!("params/trial_{:04}.txt", t.result.index));
        write_params(&path, &flow)?;
        t.result.artifacts.push(path.clone());
        artifacts.push(path);

        if config.sweep.emit_surfaces {
            let paths = super::surface::emit_surfaces_for_flow(
                &flow,
                config,
                out_dir,
                &format!("trial_{:04}_", t.result.index),
            )?;
            t.result.artifacts.extend(paths.iter().cloned());
            artifacts.extend(paths);
        }
    }

    // manifest records paths relative to the run directory, so identical
    // runs emit identical bytes regardless of where they land
    let manifest = Manifest {
        config_hash: config.hash(),
        master_seed: config.sweep.seed,
        base: config.base.label(),
        trials: outcome.trials.len(),
        included: outcome.summary.n_included,
        excluded: outcome.summary.excluded,
        diverged: outcome.summary.diverged,
        empty_aggregate: outcome.summary.empty_aggregate,
        artifacts: artifacts
            .iter()
            .map(|p| p.strip_prefix(out_dir).unwrap_or(p).to_path_buf())
            .collect(),
    };
    let path = out_dir.join("manifest.json");
    write_manifest(&path, &manifest)?;
    artifacts.push(path);
    Ok(artifacts)
}

pub(crate) fn summary_rows(summary: &SweepSummary) -> Vec<SummaryRow> {
    let mut rows = Vec::with_capacity(summary.epochs.len() * 2);
    for (i, &epoch) in summary.epochs.iter().enumerate() {
        rows.push(SummaryRow {
            epoch,
            split: "train",
            mean: summary.mean_train[i],
            ci_lo: summary.ci_train[i].0,
            ci_hi: summary.ci_train[i].1,
            n_included: summary.n_included,
        });
        rows.push(SummaryRow {
            epoch,
            split: "test",
            mean: summary.mean_test[i],
            ci_lo: summary.ci_test[i].0,
            ci_hi: summary.ci_test[i].1,
            n_included: summary.n_included,
        });
    }
    rows
}
