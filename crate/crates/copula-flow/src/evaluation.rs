//! Diagnostics for trained flows: empirical quantile functions, test NLL,
//! empirical tail dependence, and the local-Lipschitz surface estimator
//! for the transform and its inverse.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::CopulaBase;
use crate::flow::Flow;
use crate::numerics::Rng;
use crate::Dataset;

/// An estimated quantile function on a probability grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileCurve {
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

/// Empirical quantiles by the linear order-statistic rule: at probability
/// p the estimate interpolates between the order statistics bracketing
/// rank p(n-1). The convention is fixed so curves reproduce bit for bit.
pub fn empirical_quantile(samples: &[f64], ps: &[f64], label: &str) -> QuantileCurve {
    assert!(!samples.is_empty(), "need at least one sample");
    assert!(
        ps.iter().all(|&p| p > 0.0 && p < 1.0),
        "probabilities must lie in (0, 1)"
    );
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let values = ps.iter().map(|&p| sorted_quantile(&sorted, p)).collect();
    QuantileCurve {
        ps: ps.to_vec(),
        values,
        label: label.to_string(),
    }
}

pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Kolmogorov-Smirnov sup-distance between a sample (sorted in place) and
/// an analytic cdf.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Quantile curves of the model distribution: per coordinate and of the
/// Euclidean norm, from n base draws pushed through the inverse flow.
#[derive(Debug, Clone)]
pub struct ModelQuantiles {
    pub coords: Vec<QuantileCurve>,
    pub norm: QuantileCurve,
    /// Inverse passes that hit the log-scale clamp.
    pub saturated: usize,
}

pub fn model_quantiles(
    flow: &Flow,
    base: &CopulaBase,
    rng: &mut Rng,
    n: usize,
    ps: &[f64],
) -> ModelQuantiles {
    assert!(n >= 10_000, "model quantiles want at least 1e4 draws");
    let d = flow.dim();
    let z = base.sample(rng, n);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    let mut norms: Vec<f64> = Vec::with_capacity(n);
    let mut saturated = 0usize;
    for row in z.rows() {
        let out = flow.inverse(row);
        if out.saturated {
            saturated += 1;
        }
        let mut norm2 = 0.0;
        for (j, &v) in out.z.iter().enumerate() {
            cols[j].push(v);
            norm2 += v * v;
        }
        norms.push(norm2.sqrt());
    }
    let coords = cols
        .iter()
        .enumerate()
        .map(|(j, col)| empirical_quantile(col, ps, &format!("x{}", j + 1)))
        .collect();
    let norm = empirical_quantile(&norms, ps, "norm");
    ModelQuantiles {
        coords,
        norm,
        saturated,
    }
}

/// Mean NLL over a dataset, with the non-finite contribution count
/// reported separately (a single tail sample can poison the mean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NllReport {
    pub nll: f64,
    pub non_finite: usize,
}

pub fn evaluate_nll(flow: &Flow, base: &CopulaBase, data: &Dataset) -> NllReport {
    assert!(!data.is_empty(), "evaluate_nll needs data");
    let mut sum = 0.0;
    let mut non_finite = 0usize;
    for row in data.rows() {
        let lp = flow.model_log_pdf(base, row);
        if !lp.is_finite() {
            non_finite += 1;
        }
        sum += -lp;
    }
    NllReport {
        nll: sum / data.len() as f64,
        non_finite,
    }
}

/// A regular 2-D evaluation lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_range: (-10.0, 10.0),
            y_range: (-10.0, 10.0),
            nx: 100,
            ny: 100,
        }
    }
}

impl GridSpec {
    pub fn x_at(&self, ix: usize) -> f64 {
        lattice_point(self.x_range, self.nx, ix)
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        lattice_point(self.y_range, self.ny, iy)
    }
}

fn lattice_point(range: (f64, f64), n: usize, i: usize) -> f64 {
    if n == 1 {
        return 0.5 * (range.0 + range.1);
    }
    range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
}

/// Local-Lipschitz estimates over a grid: at each node x the maximum of
/// ‖map(x) - map(x + ε v̂)‖/ε over the shared random directions.
#[derive(Debug, Clone)]
pub struct LipschitzSurface {
    pub grid: GridSpec,
    /// Row-major over (ix, iy); NaN marks a masked cell.
    pub values: Vec<f64>,
    pub epsilon: f64,
    pub n_dirs: usize,
    pub direction_seed: u64,
    pub masked: usize,
}

impl LipschitzSurface {
    pub fn value_at(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.grid.ny + iy]
    }

    /// (max, mean, variance) of log10 of the unmasked estimates.
    pub fn log10_summary(&self) -> (f64, f64, f64) {
        let logs: Vec<f64> = self
            .values
            .iter()
            .filter(|v| v.is_finite() && **v > 0.0)
            .map(|v| v.log10())
            .collect();
        let n = logs.len() as f64;
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = logs.iter().sum::<f64>() / n;
        let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
        (max, mean, var)
    }
}

/// Estimate the local-Lipschitz surface of a 2-D map.
///
/// Directions are drawn once per surface from `direction_seed` and shared
/// across grid nodes. Nodes where any map evaluation is non-finite are
/// masked, not aborted. Grid nodes are evaluated in parallel; the result
/// does not depend on evaluation order.
pub fn lipschitz_surface(
    map: impl Fn([f64; 2]) -> [f64; 2] + Sync,
    grid: &GridSpec,
    epsilon: f64,
    n_dirs: usize,
    direction_seed: u64,
) -> LipschitzSurface {
    assert!(epsilon > 0.0, "epsilon must be positive");
    assert!(n_dirs >= 1, "need at least one direction");
    let mut rng = Rng::substream(direction_seed, 0);
    let dirs: Vec<[f64; 2]> = (0..n_dirs)
        .map(|_| {
            let v = [rng.standard_normal(), rng.standard_normal()];
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / norm, v[1] / norm]
        })
        .collect();

    let values: Vec<f64> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|idx| {
            let ix = idx / grid.ny;
            let iy = idx % grid.ny;
            let x = [grid.x_at(ix), grid.y_at(iy)];
            let fx = map(x);
            if !(fx[0].is_finite() && fx[1].is_finite()) {
                return f64::NAN;
            }
            let mut best = 0.0f64;
            for v in &dirs {
                let fp = map([x[0] + epsilon * v[0], x[1] + epsilon * v[1]]);
                if !(fp[0].is_finite() && fp[1].is_finite()) {
                    return f64::NAN;
                }
                let d0 = fx[0] - fp[0];
                let d1 = fx[1] - fp[1];
                best = best.max((d0 * d0 + d1 * d1).sqrt() / epsilon);
            }
            best
        })
        .collect();

    let masked = values.iter().filter(|v| !v.is_finite()).count();
    LipschitzSurface {
        grid: *grid,
        values,
        epsilon,
        n_dirs,
        direction_seed,
        masked,
    }
}

/// One tail-dependence estimate at threshold u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDependenceEstimate {
    pub u: f64,
    /// λ̂_U(u); None when fewer than 50 samples condition the ratio.
    pub upper: Option<f64>,
    /// λ̂_L(u), mirrored into the lower-left corner.
    pub lower: Option<f64>,
}

/// Empirical tail-dependence coefficients of 2-D samples.
///
/// λ̂_U(u) is the fraction of samples whose second coordinate exceeds its
/// empirical u-quantile among those whose first coordinate does; λ̂_L
/// mirrors this below the (1-u)-quantiles.
pub fn empirical_tail_dependence(
    samples: &Dataset,
    thresholds: &[f64],
) -> Vec<TailDependenceEstimate> {
    assert_eq!(samples.dim(), 2, "tail dependence is a bivariate statistic");
    assert!(samples.len() >= 100_000, "need at least 1e5 samples");
    assert!(
        thresholds.iter().all(|&u| u > 0.9 && u < 1.0),
        "thresholds must lie in (0.9, 1)"
    );
    let mut c0 = samples.column(0);
    let mut c1 = samples.column(1);
    c0.sort_by(f64::total_cmp);
    c1.sort_by(f64::total_cmp);
    thresholds
        .iter()
        .map(|&u| {
            let q0u = sorted_quantile(&c0, u);
            let q1u = sorted_quantile(&c1, u);
            let q0l = sorted_quantile(&c0, 1.0 - u);
            let q1l = sorted_quantile(&c1, 1.0 - u);
            let (mut upper_cond, mut upper_joint) = (0usize, 0usize);
            let (mut lower_cond, mut lower_joint) = (0usize, 0usize);
            for row in samples.rows() {
                if row[0] > q0u {
                    upper_cond += 1;
                    if row[1] > q1u {
                        upper_joint += 1;
                    }
                }
                if row[0] <= q0l {
                    lower_cond += 1;
                    if row[1] <= q1l {
                        lower_joint += 1;
                    }
                }
            }
            let ratio = |joint: usize, cond: usize| {
                (cond >= 50).then(|| joint as f64 / cond as f64)
            };
            TailDependenceEstimate {
                u,
                upper: ratio(upper_joint, upper_cond),
                lower: ratio(lower_joint, lower_cond),
            }
        })
        .collect()
}
