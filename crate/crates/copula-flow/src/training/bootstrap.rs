//! Percentile bootstrap for confidence intervals of the mean.

use crate::numerics::Rng;

/// (lo, hi) percentile-bootstrap confidence interval for the mean of
/// `values` at the given level, e.g. 0.95.
pub fn bootstrap_ci(values: &[f64], level: f64, resamples: usize, rng: &mut Rng) -> (f64, f64) {
    assert!(!values.is_empty(), "bootstrap needs at least one value");
    assert!(level > 0.0 && level < 1.0, "level must be in (0, 1)");
    assert!(resamples >= 1);
    let n = values.len();
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut sum = 0.0;
        for _ in 0..n {
            let idx = (rng.next_u64() % n as u64) as usize;
            sum += values[idx];
        }
        means.push(sum / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    (percentile(&means, tail), percentile(&means, 1.0 - tail))
}

/// Linear order-statistic interpolation on a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
