//! The batch interface: experiment configs, trial/sweep execution,
//! surface and quantile reports, target-data generation, and the
//! invariant selftest.

pub mod config;
pub mod io;
pub mod selftest;
pub mod surface;
pub mod sweep;
pub mod trial;

pub use config::{BaseSpec, ExperimentConfig, SweepSection, TargetSpec, TrainingSection};
pub use surface::{run_surface_report, SurfaceReport};
pub use sweep::{aggregate, emit_sweep, run_sweep, SweepOutcome, SweepSummary};
pub use trial::{generate_target, run_trial, TrialOutput, TrialResult};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::coupling::BasePreset;
use crate::error::Result;
use crate::evaluation::model_quantiles;
use crate::flow::Flow;
use crate::numerics::Rng;

#[derive(Debug, Parser)]
#[command(
    name = "copula-flow",
    about = "Normalizing flows with copula-coupled base distributions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Experiment config file (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base distribution preset (normal | heavierTails | correctFamily | exactMarginals).
    #[arg(long)]
    preset: Option<BasePreset>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count for sweeps.
    #[arg(long)]
    trials: Option<usize>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = self.preset {
            config.base = BaseSpec::preset(p);
        }
        if let Some(s) = self.seed {
            config.sweep.seed = s;
        }
        if let Some(t) = self.trials {
            config.sweep.trials = t;
        }
        if let Some(e) = self.epochs {
            config.training.epochs = e;
        }
        if let Some(o) = &self.out {
            config.sweep.out_dir = Some(o.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full multi-trial sweep and write aggregate tables.
    Sweep(ConfigArgs),
    /// Run a single trial and write its artifacts.
    Trial {
        #[command(flatten)]
        common: ConfigArgs,
        /// Which trial of the sweep to run.
        #[arg(long, default_value_t = 0)]
        trial_index: usize,
    },
    /// Lipschitz surfaces of T and T⁻¹ for stored parameters.
    Surfaces {
        #[command(flatten)]
        common: ConfigArgs,
        /// Parameter file written by sweep/trial.
        #[arg(long)]
        params: PathBuf,
    },
    /// Export model quantile curves for stored (or fresh) parameters.
    Quantiles {
        #[command(flatten)]
        common: ConfigArgs,
        /// Parameter file; identity-initialized flow when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Number of model draws.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Sample the target distribution to data.csv.
    GenData {
        #[command(flatten)]
        common: ConfigArgs,
        /// Number of samples.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Run the cross-module invariant suite.
    Selftest,
}

/// Entry point of the binary; returns the process exit status.
pub fn cli_main(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage/help text
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(common) => {
            let config = common.resolve()?;
            let out_dir = config.out_dir();
            let mut outcome = run_sweep(&config)?;
            emit_sweep(&config, &mut outcome, &out_dir)?;
            println!(
                "sweep: {} trials ({} included, {} excluded, {} diverged) -> {}",
                outcome.trials.len(),
                outcome.summary.n_included,
                outcome.summary.excluded,
                outcome.summary.diverged,
                out_dir.display()
            );
            Ok(())
        }
        Command::Trial {
            common,
            trial_index,
        } => {
            let config = common.resolve()?;
            let out_dir = config.out_dir();
            let trial = run_trial(&config, trial_index)?;
            let mut outcome = SweepOutcome {
                summary: aggregate(&config, std::slice::from_ref(&trial)),
                trials: vec![trial],
            };
            emit_sweep(&config, &mut outcome, &out_dir)?;
            let t = &outcome.trials[0].result;
            println!(
                "trial {}: final test nll {}{} -> {}",
                t.index,
                t.final_test_nll,
                if t.diverged { " (diverged)" } else { "" },
                out_dir.display()
            );
            Ok(())
        }
        Command::Surfaces { common, params } => {
            let config = common.resolve()?;
            let out_dir = config.out_dir();
            let report = run_surface_report(&config, &params, &out_dir)?;
            let (fmax, fmean, fvar) = report.forward.log10_summary();
            let (imax, imean, ivar) = report.inverse.log10_summary();
            println!("surfaces -> {}", out_dir.display());
            println!("forward: max_log10 {fmax:.4} mean_log10 {fmean:.4} var_log10 {fvar:.4}");
            println!("inverse: max_log10 {imax:.4} mean_log10 {imean:.4} var_log10 {ivar:.4}");
            Ok(())
        }
        Command::Quantiles { common, params, n } => {
            let config = common.resolve()?;
            let out_dir = config.out_dir();
            std::fs::create_dir_all(&out_dir)?;
            let base = config.base.build()?;
            let mut flow = Flow::standard(config.dim(), &mut Rng::substream(config.sweep.seed, 0));
            if let Some(path) = &params {
                io::read_params_into(path, &mut flow)?;
            }
            let ps = trial::quantile_grid();
            let mq = model_quantiles(
                &flow,
                &base,
                &mut Rng::substream(config.sweep.seed, config::streams::trial(0, config::streams::QUANTILES)),
                n,
                &ps,
            );
            let mut curves = Vec::new();
            for c in &mq.coords {
                curves.push(crate::evaluation::QuantileCurve {
                    ps: c.ps.clone(),
                    values: c.values.clone(),
                    label: format!("model_{}", c.label),
                });
            }
            curves.push(crate::evaluation::QuantileCurve {
                ps: mq.norm.ps.clone(),
                values: mq.norm.values.clone(),
                label: "model_norm".to_string(),
            });
            let rows: Vec<(usize, &crate::evaluation::QuantileCurve)> =
                curves.iter().map(|c| (0usize, c)).collect();
            let path = out_dir.join("quantiles.csv");
            io::write_quantiles_csv(&path, &rows)?;
            println!(
                "quantiles ({} draws, {} saturated) -> {}",
                n,
                mq.saturated,
                path.display()
            );
            Ok(())
        }
        Command::GenData { common, n } => {
            let config = common.resolve()?;
            let out_dir = config.out_dir();
            std::fs::create_dir_all(&out_dir)?;
            let target = config.target.build()?;
            let mut rng = Rng::substream(config.sweep.seed, config::streams::trial(0, config::streams::TRAIN_DATA));
            let data = target.sample(&mut rng, n);
            let path = out_dir.join("data.csv");
            io::write_data_csv(&path, &data)?;
            println!("gen-data: {n} samples -> {}", path.display());
            Ok(())
        }
        Command::Selftest => {
            if selftest::run_selftest() {
                println!("selftest: all invariants hold");
                Ok(())
            } else {
                Err(crate::Error::Config("selftest failed".into()))
            }
        }
    }
}
