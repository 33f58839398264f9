//! Lipschitz-surface reports for a trained transform and its inverse,
//! over the study's [-10, 10]² box (ε = 1e-3, 100 Gaussian directions).

use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::io::{read_params_into, write_surface_csv};
use crate::error::Result;
use crate::evaluation::{lipschitz_surface, GridSpec, LipschitzSurface};
use crate::flow::Flow;
use crate::numerics::Rng;

pub const SURFACE_EPSILON: f64 = 1e-3;
pub const SURFACE_DIRECTIONS: usize = 100;

/// Surfaces for T (forward) and T⁻¹ (inverse) plus their log-scale
/// summary statistics.
#[derive(Debug)]
pub struct SurfaceReport {
    pub forward: LipschitzSurface,
    pub inverse: LipschitzSurface,
    pub artifacts: Vec<PathBuf>,
}

/// Both surfaces for a flow, sharing one direction draw per seed.
pub fn surfaces_for_flow(
    flow: &Flow,
    grid: &GridSpec,
    direction_seed: u64,
) -> (LipschitzSurface, LipschitzSurface) {
    let fwd = lipschitz_surface(
        |p| {
            let out = flow.forward(&p);
            [out.z[0], out.z[1]]
        },
        grid,
        SURFACE_EPSILON,
        SURFACE_DIRECTIONS,
        direction_seed,
    );
    let inv = lipschitz_surface(
        |p| {
            let out = flow.inverse(&p);
            [out.z[0], out.z[1]]
        },
        grid,
        SURFACE_EPSILON,
        SURFACE_DIRECTIONS,
        direction_seed,
    );
    (fwd, inv)
}

/// Run the surface report for a stored parameter file.
pub fn run_surface_report(
    config: &ExperimentConfig,
    params_path: &Path,
    out_dir: &Path,
) -> Result<SurfaceReport> {
    let mut flow = Flow::standard(config.dim(), &mut Rng::substream(0, 0));
    read_params_into(params_path, &mut flow)?;
    fs::create_dir_all(out_dir)?;
    let artifacts = emit_surfaces_for_flow(&flow, config, out_dir, "")?;
    let (forward, inverse) = surfaces_for_flow(&flow, &GridSpec::default(), config.sweep.seed);
    Ok(SurfaceReport {
        forward,
        inverse,
        artifacts,
    })
}

/// Write surface_fwd.csv / surface_inv.csv (log scale, matching the
/// figures) and a summary table of the log10 statistics.
pub(crate) fn emit_surfaces_for_flow(
    flow: &Flow,
    config: &ExperimentConfig,
    out_dir: &Path,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    let (fwd, inv) = surfaces_for_flow(flow, &GridSpec::default(), config.sweep.seed);
    let mut artifacts = Vec::new();

    let path = out_dir.join(format!("{prefix}surface_fwd.csv"));
    write_surface_csv(&path, &fwd, true)?;
    artifacts.push(path);
    let path = out_dir.join(format!("{prefix}surface_inv.csv"));
    write_surface_csv(&path, &inv, true)?;
    artifacts.push(path);

    let mut out = String::from("map,max_log10,mean_log10,var_log10,masked\n");
    for (name, s) in [("forward", &fwd), ("inverse", &inv)] {
        let (max, mean, var) = s.log10_summary();
        out.push_str(&format!("{name},{max},{mean},{var},{}\n", s.masked));
    }
    let path = out_dir.join(format!("{prefix}surface_summary.csv"));
    fs::write(&path, out)?;
    artifacts.push(path);
    Ok(artifacts)
}
