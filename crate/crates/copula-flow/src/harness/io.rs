//! File formats: delimited tables with one header line, a text parameter
//! file with a layout header, and the JSON run manifest.
//!
//! Floats are written with Rust's shortest-round-trip formatting, so every
//! emitted value parses back to the identical bit pattern and aggregate
//! tables can be recomputed exactly from the per-trial tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{LipschitzSurface, QuantileCurve};
use crate::flow::Flow;
use crate::training::LossHistory;

/// One finite or non-finite float, losslessly.
fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse()
            .map_err(|e| Error::Config(format!("bad float '{other}': {e}"))),
    }
}

pub fn write_losses_csv(path: &Path, histories: &[(usize, &LossHistory)]) -> Result<()> {
    let mut out = String::from("trial,epoch,split,nll\n");
    for (trial, h) in histories {
        for (i, &epoch) in h.epochs.iter().enumerate() {
            let _ = writeln!(out, "{trial},{epoch},train,{}", fmt_f64(h.train_nll[i]));
            let _ = writeln!(out, "{trial},{epoch},test,{}", fmt_f64(h.test_nll[i]));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Rows of the per-evaluation-point aggregate.
pub struct SummaryRow {
    pub epoch: usize,
    pub split: &'static str,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_included: usize,
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::from("epoch,split,mean,ci_lo,ci_hi,n_included\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epoch,
            r.split,
            fmt_f64(r.mean),
            fmt_f64(r.ci_lo),
            fmt_f64(r.ci_hi),
            r.n_included
        );
    }
    fs::write(path, out)?;
    Ok(())
}

pub struct TrialRow {
    pub trial: usize,
    pub stream: u64,
    pub final_test_nll: f64,
    pub diverged: bool,
    pub excluded: bool,
}

pub fn write_trials_csv(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let mut out = String::from("trial,stream,final_test_nll,diverged,excluded\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.trial,
            r.stream,
            fmt_f64(r.final_test_nll),
            r.diverged,
            r.excluded
        );
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_quantiles_csv(path: &Path, curves: &[(usize, &QuantileCurve)]) -> Result<()> {
    let mut out = String::from("p,value,label,trial\n");
    for (trial, curve) in curves {
        for (&p, &v) in curve.ps.iter().zip(&curve.values) {
            let _ = writeln!(out, "{},{},{},{trial}", fmt_f64(p), fmt_f64(v), curve.label);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_data_csv(path: &Path, data: &crate::Dataset) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "{}", header.join(","));
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Surface table: metadata header line, then (x1, x2, value) rows. With
/// `log_scale` the value column carries log10 of the estimate.
pub fn write_surface_csv(path: &Path, surface: &LipschitzSurface, log_scale: bool) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# epsilon={} n_dirs={} seed={} log_scale={}",
        fmt_f64(surface.epsilon),
        surface.n_dirs,
        surface.direction_seed,
        log_scale
    );
    out.push_str("x1,x2,value\n");
    for ix in 0..surface.grid.nx {
        for iy in 0..surface.grid.ny {
            let raw = surface.value_at(ix, iy);
            let v = if log_scale { raw.log10() } else { raw };
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(surface.grid.x_at(ix)),
                fmt_f64(surface.grid.y_at(iy)),
                fmt_f64(v)
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Flow parameters as text: layout header plus one value per line.
pub fn write_params(path: &Path, flow: &Flow) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# copula-flow parameters v1");
    let _ = writeln!(
        out,
        "# dim={} layers={} hidden={} degrees=natural",
        flow.dim(),
        flow.n_layers(),
        flow.hidden()
    );
    let _ = writeln!(out, "# n={}", flow.n_params());
    for &p in flow.params() {
        let _ = writeln!(out, "{}", fmt_f64(p));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load parameters into a flow, rejecting any layout mismatch.
pub fn read_params_into(path: &Path, flow: &mut Flow) -> Result<()> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some((key, value)) = token.split_once('=') {
                    let expected = match key {
                        "dim" => Some(flow.dim()),
                        "layers" => Some(flow.n_layers()),
                        "hidden" => Some(flow.hidden()),
                        "n" => Some(flow.n_params()),
                        _ => None,
                    };
                    if let Some(expected) = expected {
                        let got: usize = value.parse().map_err(|_| {
                            Error::LayoutMismatch(format!("bad header token '{token}'"))
                        })?;
                        if got != expected {
                            return Err(Error::LayoutMismatch(format!(
                                "{key}={got} in {} but the configured flow has {key}={expected}",
                                path.display()
                            )));
                        }
                    }
                }
            }
            continue;
        }
        values.push(parse_f64(line)?);
    }
    flow.set_params(&values)
}

/// Machine-readable run manifest. Field order is fixed by declaration, so
/// emission is deterministic.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub master_seed: u64,
    pub base: String,
    pub trials: usize,
    pub included: usize,
    pub excluded: usize,
    pub diverged: usize,
    pub empty_aggregate: bool,
    pub artifacts: Vec<PathBuf>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Config(format!("manifest encode: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
