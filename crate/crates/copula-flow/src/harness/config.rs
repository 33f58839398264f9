//! Experiment configuration: TOML sections for target, base, training,
//! and sweep, with CLI-flag overrides layered on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::copulas::Copula;
use crate::coupling::{BasePreset, CopulaBase};
use crate::error::{Error, Result};
use crate::marginals::Marginal1D;
use crate::training::TrainConfig;

/// Environment variable consulted for the default output root.
pub const OUT_DIR_ENV: &str = "COPULA_FLOW_OUT";

/// The distribution the experiment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetSpec {
    pub copula: Copula,
    pub marginals: Vec<Marginal1D>,
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self {
            copula: Copula::gumbel(2.5),
            marginals: vec![
                Marginal1D::student_t(2.0, 0.0, 1.0),
                Marginal1D::student_t(2.0, 0.0, 1.0),
            ],
        }
    }
}

impl TargetSpec {
    pub fn build(&self) -> Result<CopulaBase> {
        CopulaBase::new(self.marginals.clone(), self.copula.clone())
    }
}

/// Base distribution: a named preset or an explicit coupling.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseSpec {
    pub preset: Option<BasePreset>,
    pub copula: Option<Copula>,
    pub marginals: Option<Vec<Marginal1D>>,
}

impl BaseSpec {
    pub fn preset(p: BasePreset) -> Self {
        Self {
            preset: Some(p),
            copula: None,
            marginals: None,
        }
    }

    pub fn build(&self) -> Result<CopulaBase> {
        if let Some(p) = self.preset {
            return Ok(p.build());
        }
        match (&self.copula, &self.marginals) {
            (Some(c), Some(ms)) => CopulaBase::new(ms.clone(), c.clone()),
            _ => Err(Error::Config(
                "base distribution needs either a preset or both copula and marginals".into(),
            )),
        }
    }

    /// Short name used in file labels.
    pub fn label(&self) -> String {
        match self.preset {
            Some(p) => p.name().to_string(),
            None => "explicit".to_string(),
        }
    }
}

/// Training-section settings (extends [`TrainConfig`] with data sizes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingSection {
    pub batch_size: usize,
    pub epochs: usize,
    pub grad_clip: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            batch_size: 128,
            epochs: 50,
            grad_clip: None,
            n_train: 10_000,
            n_test: 10_000,
        }
    }
}

impl TrainingSection {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            grad_clip: self.grad_clip,
        }
    }
}

/// Sweep-section settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    pub trials: usize,
    pub seed: u64,
    pub divergence_threshold: f64,
    pub out_dir: Option<PathBuf>,
    /// Also emit per-trial Lipschitz surfaces (slow).
    pub emit_surfaces: bool,
    /// Resamples for the bootstrap confidence intervals.
    pub bootstrap_resamples: usize,
    /// Confidence level of the aggregated bands.
    pub confidence_level: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 17,
            divergence_threshold: 25.0,
            out_dir: None,
            emit_surfaces: false,
            bootstrap_resamples: 10_000,
            confidence_level: 0.95,
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub base: BaseSpec,
    pub training: TrainingSection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.target.build()?;
        if self.training.n_train == 0 || self.training.n_test == 0 {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.training.batch_size == 0 || self.training.batch_size > self.training.n_train {
            return Err(Error::Config(format!(
                "batch size {} must be in 1..={}",
                self.training.batch_size, self.training.n_train
            )));
        }
        if self.sweep.trials == 0 {
            return Err(Error::Config("trial count must be positive".into()));
        }
        if !(self.sweep.divergence_threshold > 0.0) {
            return Err(Error::Config("divergence threshold must be positive".into()));
        }
        if !(self.sweep.confidence_level > 0.0 && self.sweep.confidence_level < 1.0) {
            return Err(Error::Config("confidence level must be in (0, 1)".into()));
        }
        Ok(())
    }

    /// Output directory: explicit config, else the env root, else ./runs.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.sweep.out_dir {
            return dir.clone();
        }
        if let Ok(root) = std::env::var(OUT_DIR_ENV) {
            return PathBuf::from(root);
        }
        PathBuf::from("runs")
    }

    /// SHA-256 of the canonical TOML encoding.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn dim(&self) -> usize {
        self.target.marginals.len()
    }
}

/// Sub-stream allocation under the master seed. Stream 0 is consumed by
/// the surface-direction draws, stream 1 by bootstrap aggregation, and
/// each trial owns a contiguous block starting at [`TRIAL_BASE`].
pub mod streams {
    pub const BOOTSTRAP: u64 = 1;
    pub const TRIAL_BASE: u64 = 16;
    pub const TRIAL_SPAN: u64 = 8;

    pub const TRAIN_DATA: u64 = 0;
    pub const TEST_DATA: u64 = 1;
    pub const FLOW_INIT: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const QUANTILES: u64 = 4;

    pub fn trial(index: usize, slot: u64) -> u64 {
        TRIAL_BASE + index as u64 * TRIAL_SPAN + slot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_the_study_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.training.n_train, 10_000);
        assert_eq!(c.training.n_test, 10_000);
        assert_eq!(c.training.batch_size, 128);
        assert_eq!(c.sweep.trials, 100);
        assert_eq!(c.sweep.divergence_threshold, 25.0);
        assert_eq!(c.target, TargetSpec::default());
        let target = c.target.build().unwrap();
        assert_eq!(target.copula(), &Copula::gumbel(2.5));
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig::default();
        c.base = BaseSpec::preset(BasePreset::ExactMarginals);
        c.sweep.trials = 10;
        let text = toml::to_string(&c).unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash(), back.hash());
    }

    #[test]
    fn section_parsing_with_overridden_keys() {
        let text = r#"
            [base]
            preset = "heavierTails"

            [training]
            epochs = 7
            batch_size = 64

            [sweep]
            trials = 3
            seed = 99
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.base.preset, Some(BasePreset::HeavierTails));
        assert_eq!(c.training.epochs, 7);
        assert_eq!(c.training.batch_size, 64);
        assert_eq!(c.sweep.trials, 3);
        assert_eq!(c.sweep.seed, 99);
        // untouched sections keep their defaults
        assert_eq!(c.training.n_train, 10_000);
    }

    #[test]
    fn explicit_base_encoding() {
        // bivariate Gaussian correlation as the bare off-diagonal entry
        let text = r#"
            [base]
            copula = { family = "gaussian", corr = 0.7 }
            marginals = [
                { family = "normal", loc = 0.0, scale = 1.0 },
                { family = "student_t", df = 5.0, loc = 0.0, scale = 2.0 },
            ]
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let base = c.base.build().unwrap();
        assert_eq!(base.dim(), 2);
        assert_eq!(c.base.label(), "explicit");
        match base.copula() {
            Copula::Gaussian { corr } => assert_eq!(corr.entry(0, 1), 0.7),
            other => panic!("wrong copula {other:?}"),
        }
        // the full-rows spelling works too
        let rows = r#"
            [base]
            copula = { family = "gaussian", corr = [[1.0, 0.7], [0.7, 1.0]] }
            marginals = [
                { family = "normal", loc = 0.0, scale = 1.0 },
                { family = "normal", loc = 0.0, scale = 1.0 },
            ]
        "#;
        assert!(ExperimentConfig::from_toml(rows).is_ok());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("[training]\nbatch_size = 0").is_err());
        assert!(ExperimentConfig::from_toml("[sweep]\ntrials = 0").is_err());
        assert!(ExperimentConfig::from_toml("[sweep]\ndivergence_threshold = -1.0").is_err());
        assert!(ExperimentConfig::from_toml("not toml at all [").is_err());
        // rho below 1 fails the copula validation
        assert!(
            ExperimentConfig::from_toml("[target]\ncopula = { family = \"gumbel\", rho = 0.5 }")
                .is_err()
        );
    }

    #[test]
    fn base_without_preset_or_coupling_fails_at_build() {
        let c = ExperimentConfig::default();
        assert!(c.base.build().is_err());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        b.sweep.seed = 18;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn trial_streams_do_not_overlap() {
        use super::streams;
        let mut seen = std::collections::HashSet::new();
        seen.insert(0u64); // surface directions
        seen.insert(streams::BOOTSTRAP);
        for trial in 0..50 {
            for slot in 0..streams::TRIAL_SPAN {
                assert!(seen.insert(streams::trial(trial, slot)), "stream collision");
            }
        }
    }
}
