//! Univariate parametric distributions: the surrogate base marginals and
//! the target-generation marginals.
//!
//! Every family exposes pdf/cdf/quantile/sampling plus the log-pdf
//! derivative the training gradients need. The quantile is the
//! right-inverse of the cdf; for Student-t it falls back to a bracketed
//! bisection with Newton polish where no closed form exists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{
    ln_beta, reg_inc_beta, std_normal_cdf, std_normal_quantile_unchecked,
};
use crate::numerics::Rng;

const LN_2PI: f64 = 1.837_877_066_409_345_4;

/// A univariate distribution with location/scale parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal1D {
    Normal { loc: f64, scale: f64 },
    StudentT { df: f64, loc: f64, scale: f64 },
    Laplace { loc: f64, scale: f64 },
    /// Uniform on [loc, loc + scale].
    Uniform { loc: f64, scale: f64 },
}

impl Marginal1D {
    pub fn normal(loc: f64, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        Marginal1D::Normal { loc, scale }
    }

    pub fn student_t(df: f64, loc: f64, scale: f64) -> Self {
        assert!(df > 0.0, "degrees of freedom must be positive");
        assert!(scale > 0.0, "scale must be positive");
        Marginal1D::StudentT { df, loc, scale }
    }

    pub fn laplace(loc: f64, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        Marginal1D::Laplace { loc, scale }
    }

    pub fn uniform(loc: f64, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        Marginal1D::Uniform { loc, scale }
    }

    /// Parameter sanity check for values built from external config.
    pub fn validate(&self) -> Result<()> {
        let (scale, df) = match *self {
            Marginal1D::Normal { scale, .. }
            | Marginal1D::Laplace { scale, .. }
            | Marginal1D::Uniform { scale, .. } => (scale, 1.0),
            Marginal1D::StudentT { df, scale, .. } => (scale, df),
        };
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("marginal scale must be positive, got {scale}")));
        }
        if !(df > 0.0 && df.is_finite()) {
            return Err(Error::Config(format!("marginal df must be positive, got {df}")));
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let lp = self.log_pdf(x);
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            lp.exp()
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal1D::Normal { loc, scale } => {
                let t = (x - loc) / scale;
                -0.5 * t * t - scale.ln() - 0.5 * LN_2PI
            }
            Marginal1D::StudentT { df, loc, scale } => {
                let t = (x - loc) / scale;
                // ln Γ((ν+1)/2) - ln Γ(ν/2) - ½ln(νπ) = -ln B(ν/2, ½) - ½ln ν
                let ln_norm = -ln_beta(0.5 * df, 0.5) - 0.5 * df.ln();
                ln_norm - scale.ln() - 0.5 * (df + 1.0) * (t * t / df).ln_1p()
            }
            Marginal1D::Laplace { loc, scale } => {
                -(x - loc).abs() / scale - (2.0 * scale).ln()
            }
            Marginal1D::Uniform { loc, scale } => {
                if x >= loc && x <= loc + scale {
                    -scale.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// d/dx log pdf(x); used by the training adjoints.
    pub fn d_log_pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal1D::Normal { loc, scale } => -(x - loc) / (scale * scale),
            Marginal1D::StudentT { df, loc, scale } => {
                let t = (x - loc) / scale;
                -(df + 1.0) * t / ((df + t * t) * scale)
            }
            Marginal1D::Laplace { loc, scale } => {
                if x > loc {
                    -1.0 / scale
                } else if x < loc {
                    1.0 / scale
                } else {
                    0.0
                }
            }
            Marginal1D::Uniform { .. } => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match *self {
            Marginal1D::Normal { loc, scale } => std_normal_cdf((x - loc) / scale),
            Marginal1D::StudentT { df, loc, scale } => {
                let t = (x - loc) / scale;
                let z = df / (df + t * t);
                let half_tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, z).expect("valid beta args");
                if t >= 0.0 {
                    1.0 - half_tail
                } else {
                    half_tail
                }
            }
            Marginal1D::Laplace { loc, scale } => {
                let t = (x - loc) / scale;
                if t < 0.0 {
                    0.5 * t.exp()
                } else {
                    1.0 - 0.5 * (-t).exp()
                }
            }
            Marginal1D::Uniform { loc, scale } => ((x - loc) / scale).clamp(0.0, 1.0),
        }
    }

    /// Upper-tail probability P(X > x), computed directly so deep tails
    /// do not cancel to zero the way `1 - cdf(x)` does.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Marginal1D::Normal { loc, scale } => {
                0.5 * crate::numerics::erfc((x - loc) / (scale * std::f64::consts::SQRT_2))
            }
            Marginal1D::StudentT { df, loc, scale } => {
                let t = (x - loc) / scale;
                let z = df / (df + t * t);
                let half_tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, z).expect("valid beta args");
                if t >= 0.0 {
                    half_tail
                } else {
                    1.0 - half_tail
                }
            }
            Marginal1D::Laplace { loc, scale } => {
                let t = (x - loc) / scale;
                if t < 0.0 {
                    1.0 - 0.5 * t.exp()
                } else {
                    0.5 * (-t).exp()
                }
            }
            Marginal1D::Uniform { loc, scale } => 1.0 - ((x - loc) / scale).clamp(0.0, 1.0),
        }
    }

    /// Right-inverse of the cdf, for p in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires 0 < p < 1, got {p}")));
        }
        Ok(match *self {
            Marginal1D::Normal { loc, scale } => loc + scale * std_normal_quantile_unchecked(p),
            Marginal1D::StudentT { df, loc, scale } => loc + scale * student_t_quantile_std(df, p),
            Marginal1D::Laplace { loc, scale } => {
                if p < 0.5 {
                    loc + scale * (2.0 * p).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - p)).ln()
                }
            }
            Marginal1D::Uniform { loc, scale } => loc + scale * p,
        })
    }

    /// n i.i.d. draws. Every family standardizes first and then applies
    /// loc + scale * z, so location-scale equivariance holds draw for draw.
    pub fn sample(&self, rng: &mut Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one(&self, rng: &mut Rng) -> f64 {
        let (loc, scale) = self.loc_scale();
        let std = match *self {
            Marginal1D::Normal { .. } => rng.standard_normal(),
            Marginal1D::StudentT { df, .. } => {
                let z = rng.standard_normal();
                let w = rng.chi_square(df);
                z / (w / df).sqrt()
            }
            Marginal1D::Laplace { .. } => {
                // inverse cdf of the standard Laplace
                let u = rng.uniform_open();
                if u < 0.5 {
                    (2.0 * u).ln()
                } else {
                    -(2.0 * (1.0 - u)).ln()
                }
            }
            Marginal1D::Uniform { .. } => rng.uniform(),
        };
        loc + scale * std
    }

    fn loc_scale(&self) -> (f64, f64) {
        match *self {
            Marginal1D::Normal { loc, scale }
            | Marginal1D::StudentT { loc, scale, .. }
            | Marginal1D::Laplace { loc, scale }
            | Marginal1D::Uniform { loc, scale } => (loc, scale),
        }
    }
}

/// Standard (loc 0, scale 1) Student-t quantile.
///
/// Closed forms for ν = 1 and ν = 2; otherwise bisection down to a
/// 1e-10 bracket followed by two Newton polish steps, which stays robust
/// in the far tails where Newton alone diverges.
fn student_t_quantile_std(df: f64, p: f64) -> f64 {
    if df == 1.0 {
        return (std::f64::consts::PI * (p - 0.5)).tan();
    }
    if df == 2.0 {
        let q = 2.0 * p - 1.0;
        return q * (2.0 / (1.0 - q * q)).sqrt();
    }
    if p == 0.5 {
        return 0.0;
    }
    let m = Marginal1D::student_t(df, 0.0, 1.0);
    // Symmetric problem: solve for the upper half.
    let (target, negate) = if p >= 0.5 { (p, false) } else { (1.0 - p, true) };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while m.cdf(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-10 * hi.abs().max(1.0) {
            break;
        }
        if m.cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let density = m.pdf(x);
        if density > 0.0 {
            x -= (m.cdf(x) - target) / density;
        }
    }
    if negate {
        -x
    } else {
        x
    }
}

/// Families that [`fit_marginal_mle`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFamily {
    Normal,
    StudentT,
    Laplace,
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, Copy)]
pub struct MarginalFit {
    pub marginal: Marginal1D,
    /// False when the optimizer exhausted its budget without stabilizing.
    pub converged: bool,
    /// True when the input was (numerically) constant and the scale was
    /// clamped to 1e-8 to keep downstream sweeps alive.
    pub degenerate: bool,
}

const DEGENERATE_SCALE: f64 = 1e-8;

/// Univariate MLE for the given family.
///
/// Normal and Laplace use their closed forms; Student-t runs a
/// Nelder-Mead ascent over (loc, ln scale, ln(df - 0.5)) so df >= 0.5
/// holds throughout.
pub fn fit_marginal_mle(family: FitFamily, data: &[f64]) -> Result<MarginalFit> {
    if data.len() < 10 {
        return Err(Error::Domain(format!(
            "fit_marginal_mle needs at least 10 points, got {}",
            data.len()
        )));
    }
    let n = data.len() as f64;
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        let marginal = match family {
            FitFamily::Normal => Marginal1D::normal(lo, DEGENERATE_SCALE),
            FitFamily::Laplace => Marginal1D::laplace(lo, DEGENERATE_SCALE),
            FitFamily::StudentT => Marginal1D::student_t(4.0, lo, DEGENERATE_SCALE),
        };
        return Ok(MarginalFit {
            marginal,
            converged: true,
            degenerate: true,
        });
    }

    match family {
        FitFamily::Normal => {
            let mean = data.iter().sum::<f64>() / n;
            let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            Ok(MarginalFit {
                marginal: Marginal1D::normal(mean, var.sqrt().max(DEGENERATE_SCALE)),
                converged: true,
                degenerate: false,
            })
        }
        FitFamily::Laplace => {
            let loc = median(data);
            let scale = data.iter().map(|x| (x - loc).abs()).sum::<f64>() / n;
            Ok(MarginalFit {
                marginal: Marginal1D::laplace(loc, scale.max(DEGENERATE_SCALE)),
                converged: true,
                degenerate: false,
            })
        }
        FitFamily::StudentT => Ok(fit_student_t(data)),
    }
}

fn median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fit_student_t(data: &[f64]) -> MarginalFit {
    // θ = (loc, ln scale, ln(df - 0.5))
    let objective = |theta: &[f64; 3]| -> f64 {
        let m = Marginal1D::StudentT {
            df: 0.5 + theta[2].exp(),
            loc: theta[0],
            scale: theta[1].exp(),
        };
        let ll: f64 = data.iter().map(|&x| m.log_pdf(x)).sum();
        -ll
    };
    let loc0 = median(data);
    let mad = data.iter().map(|x| (x - loc0).abs()).sum::<f64>() / data.len() as f64;
    let start = [loc0, mad.max(DEGENERATE_SCALE).ln(), (4.0f64 - 0.5).ln()];
    let (theta, converged) = nelder_mead(&objective, start, 600, 1e-9);
    MarginalFit {
        marginal: Marginal1D::StudentT {
            df: 0.5 + theta[2].exp(),
            loc: theta[0],
            scale: theta[1].exp().max(DEGENERATE_SCALE),
        },
        converged,
        degenerate: false,
    }
}

/// Minimal Nelder-Mead in three dimensions. Returns the best point and
/// whether the simplex contracted below `tol` within the budget.
fn nelder_mead(
    f: &dyn Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    max_iter: usize,
    tol: f64,
) -> ([f64; 3], bool) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let mut simplex: Vec<[f64; 3]> = vec![start];
    for i in 0..3 {
        let mut v = start;
        v[i] += if v[i].abs() > 1e-3 { 0.1 * v[i].abs() } else { 0.1 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[3];
        let second_worst = order[2];

        if (values[worst] - values[best]).abs() <= tol * (1.0 + values[best].abs()) {
            return (simplex[best], true);
        }

        let mut centroid = [0.0; 3];
        for &i in &order[..3] {
            for k in 0..3 {
                centroid[k] += simplex[i][k] / 3.0;
            }
        }
        let reflect = std::array::from_fn(|k| centroid[k] + ALPHA * (centroid[k] - simplex[worst][k]));
        let fr = f(&reflect);
        if fr < values[best] {
            let expand =
                std::array::from_fn(|k| centroid[k] + GAMMA * (reflect[k] - centroid[k]));
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract =
                std::array::from_fn(|k| centroid[k] + RHO * (simplex[worst][k] - centroid[k]));
            let fc = f(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                let best_point = simplex[best];
                for i in 0..4 {
                    if i == best {
                        continue;
                    }
                    for k in 0..3 {
                        simplex[i][k] = best_point[k] + SIGMA * (simplex[i][k] - best_point[k]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best], false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Closed-form t cdf for ν = 2: F(x) = 1/2 + x / (2 sqrt(2 + x²)).
    fn t2_cdf_closed(x: f64) -> f64 {
        0.5 + x / (2.0 * (2.0 + x * x).sqrt())
    }

    fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
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

    #[test]
    fn pdf_reference_points() {
        // t₂ mode: Γ(3/2)/(√(2π)Γ(1)) = 1/(2√2)
        let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
        assert_abs_diff_eq!(t2.pdf(0.0), 1.0 / (2.0 * 2.0f64.sqrt()), epsilon = 1e-12);
        let lap = Marginal1D::laplace(0.0, 4.0);
        assert_abs_diff_eq!(lap.pdf(0.0), 0.125, epsilon = 1e-15);
        let norm = Marginal1D::normal(0.0, 1.0);
        assert_abs_diff_eq!(
            norm.pdf(0.0),
            crate::numerics::std_normal_pdf(0.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(norm.pdf(0.0), 0.3989423, epsilon = 1e-7);
    }

    #[test]
    fn cdf_reference_points() {
        let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
        assert_abs_diff_eq!(t2.cdf(0.0), 0.5, epsilon = 1e-12);
        // Independent oracle: ν=2 closed form.
        assert_abs_diff_eq!(t2.cdf(1.0), t2_cdf_closed(1.0), epsilon = 1e-10);
        assert_abs_diff_eq!(t2.cdf(1.0), 0.788675, epsilon = 1e-6);
        for &x in &[-30.0, -3.2, -0.7, 0.4, 2.9, 50.0] {
            assert_abs_diff_eq!(t2.cdf(x), t2_cdf_closed(x), epsilon = 1e-10);
        }
        let lap = Marginal1D::laplace(0.0, 4.0);
        assert_abs_diff_eq!(lap.cdf(-4.0), 0.5 * (-1.0f64).exp(), epsilon = 1e-13);
        assert_eq!(lap.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(lap.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn quantile_reference_points() {
        for m in [
            Marginal1D::normal(0.0, 2.0),
            Marginal1D::student_t(2.0, 0.0, 1.0),
            Marginal1D::student_t(5.0, 0.0, 1.0),
            Marginal1D::laplace(0.0, 3.0),
        ] {
            assert_abs_diff_eq!(m.quantile(0.5).unwrap(), 0.0, epsilon = 1e-9);
        }
        let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
        assert_abs_diff_eq!(t2.quantile(t2_cdf_closed(1.0)).unwrap(), 1.0, epsilon = 1e-6);
        let u = Marginal1D::uniform(0.0, 1.0);
        assert_abs_diff_eq!(u.quantile(0.25).unwrap(), 0.25, epsilon = 1e-15);
        assert!(t2.quantile(0.0).is_err());
        assert!(t2.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_is_right_inverse_of_cdf() {
        for m in [
            Marginal1D::normal(1.0, 2.0),
            Marginal1D::student_t(2.0, 0.0, 1.0),
            Marginal1D::student_t(5.0, -1.0, 2.0),
            Marginal1D::student_t(3.7, 0.0, 1.0),
            Marginal1D::laplace(0.5, 4.0),
        ] {
            for i in 1..40 {
                let p = i as f64 / 40.0;
                let x = m.quantile(p).unwrap();
                assert!(
                    (m.cdf(x) - p).abs() < 1e-8,
                    "cdf(quantile({p})) off for {m:?}: {}",
                    m.cdf(x)
                );
            }
            // deep tails
            for &p in &[1e-6, 1e-4, 1.0 - 1e-4, 1.0 - 1e-6] {
                let x = m.quantile(p).unwrap();
                assert!((m.cdf(x) - p).abs() < 1e-8, "tail quantile off at {p} for {m:?}");
            }
        }
    }

    #[test]
    fn sampling_matches_analytic_cdf() {
        let mut rng = Rng::seed_from(7);
        let t5 = Marginal1D::student_t(5.0, 0.0, 1.0);
        let mut draws = t5.sample(&mut rng, 1_000_000);
        let ks = ks_distance(&mut draws, |x| t5.cdf(x));
        assert!(ks < 0.002, "t5 KS distance {ks}");

        let norm = Marginal1D::normal(0.0, 1.0);
        let draws = norm.sample(&mut rng, 1_000_000);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 0.005);

        let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
        let mut draws = t2.sample(&mut rng, 1_000_000);
        draws.sort_by(f64::total_cmp);
        let med = 0.5 * (draws[499_999] + draws[500_000]);
        assert_abs_diff_eq!(med, 0.0, epsilon = 0.01);
    }

    #[test]
    fn laplace_sampling_matches_cdf() {
        let mut rng = Rng::seed_from(8);
        let lap = Marginal1D::laplace(0.0, 4.0);
        let mut draws = lap.sample(&mut rng, 1_000_000);
        let ks = ks_distance(&mut draws, |x| lap.cdf(x));
        assert!(ks < 0.002, "laplace KS distance {ks}");
    }

    #[test]
    fn location_scale_equivariance() {
        // Same stream on both paths: the sampler is loc + scale * standardized.
        for (std_m, m, loc, scale) in [
            (
                Marginal1D::normal(0.0, 1.0),
                Marginal1D::normal(2.0, 3.0),
                2.0,
                3.0,
            ),
            (
                Marginal1D::student_t(5.0, 0.0, 1.0),
                Marginal1D::student_t(5.0, -1.0, 2.0),
                -1.0,
                2.0,
            ),
            (
                Marginal1D::laplace(0.0, 1.0),
                Marginal1D::laplace(0.0, 4.0),
                0.0,
                4.0,
            ),
        ] {
            let mut r1 = Rng::seed_from(123);
            let mut r2 = Rng::seed_from(123);
            let std_draws = std_m.sample(&mut r1, 1000);
            let draws = m.sample(&mut r2, 1000);
            for (s, d) in std_draws.iter().zip(&draws) {
                assert_eq!(loc + scale * s, *d);
            }
        }
    }

    #[test]
    fn pdf_normalizes_over_effective_support() {
        use crate::numerics::adaptive_simpson;
        for m in [
            Marginal1D::normal(0.3, 1.7),
            Marginal1D::student_t(2.0, 0.0, 1.0),
            Marginal1D::student_t(5.0, 1.0, 2.0),
            Marginal1D::laplace(-0.5, 4.0),
            Marginal1D::uniform(0.0, 2.0),
        ] {
            let eps = 1e-7;
            let lo = m.quantile(eps).unwrap();
            let hi = m.quantile(1.0 - eps).unwrap();
            let mass = adaptive_simpson(&|x| m.pdf(x), lo, hi, 1e-9);
            assert_abs_diff_eq!(mass, 1.0 - 2.0 * eps, epsilon = 1e-6);
        }
    }

    #[test]
    fn student_t_tail_index() {
        // (1 - F(x)) x^ν approaches a constant; ratios stable to 10%.
        for &df in &[2.0, 5.0] {
            let m = Marginal1D::student_t(df, 0.0, 1.0);
            let vals: Vec<f64> = [1e2, 1e3, 1e4]
                .iter()
                .map(|&x: &f64| m.sf(x) * x.powf(df))
                .collect();
            assert!(vals[0] > 0.0);
            for w in vals.windows(2) {
                let ratio = w[1] / w[0];
                assert!((ratio - 1.0).abs() < 0.1, "tail ratio {ratio} for df={df}");
            }
        }
    }

    #[test]
    fn fit_normal_two_points() {
        let fit = fit_marginal_mle(FitFamily::Normal, &[-1.0; 5].iter().chain(&[1.0; 5]).copied().collect::<Vec<_>>()).unwrap();
        match fit.marginal {
            Marginal1D::Normal { loc, scale } => {
                assert_abs_diff_eq!(loc, 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(scale, 1.0, epsilon = 1e-12);
            }
            other => panic!("wrong family {other:?}"),
        }
        assert!(fit.converged && !fit.degenerate);
    }

    #[test]
    fn fit_laplace_consistency() {
        let truth = Marginal1D::laplace(0.0, 4.0);
        let mut rng = Rng::seed_from(11);
        let data = truth.sample(&mut rng, 100_000);
        let fit = fit_marginal_mle(FitFamily::Laplace, &data).unwrap();
        match fit.marginal {
            Marginal1D::Laplace { loc, scale } => {
                assert_abs_diff_eq!(loc, 0.0, epsilon = 0.05);
                assert_abs_diff_eq!(scale, 4.0, epsilon = 0.1);
            }
            other => panic!("wrong family {other:?}"),
        }
    }

    #[test]
    fn fit_student_t_consistency() {
        let truth = Marginal1D::student_t(2.0, 0.0, 1.0);
        let mut rng = Rng::seed_from(12);
        let data = truth.sample(&mut rng, 100_000);
        let fit = fit_marginal_mle(FitFamily::StudentT, &data).unwrap();
        let (df, loc, scale) = match fit.marginal {
            Marginal1D::StudentT { df, loc, scale } => (df, loc, scale),
            other => panic!("wrong family {other:?}"),
        };
        assert!(fit.converged, "t fit did not converge");
        assert!((1.8..=2.2).contains(&df), "df estimate {df}");
        assert_abs_diff_eq!(loc, 0.0, epsilon = 0.05);
        assert_abs_diff_eq!(scale, 1.0, epsilon = 0.05);

        // Grid-search oracle over df with profile (loc, scale) by the EM
        // fixed point: the chosen df must score at least as well as every
        // grid point up to a tiny likelihood slack.
        let profile_ll = |df: f64| -> f64 {
            let (mut loc, mut scale) = (median(&data), 1.0f64);
            for _ in 0..60 {
                let mut sw = 0.0;
                let mut swx = 0.0;
                for &x in &data {
                    let t = (x - loc) / scale;
                    let w = (df + 1.0) / (df + t * t);
                    sw += w;
                    swx += w * x;
                }
                let new_loc = swx / sw;
                let mut s2 = 0.0;
                for &x in &data {
                    let t = (x - new_loc) / scale;
                    let w = (df + 1.0) / (df + t * t);
                    s2 += w * (x - new_loc) * (x - new_loc);
                }
                loc = new_loc;
                scale = (s2 / data.len() as f64).sqrt();
            }
            let m = Marginal1D::student_t(df, loc, scale);
            data.iter().map(|&x| m.log_pdf(x)).sum::<f64>()
        };
        let fitted_ll: f64 = data.iter().map(|&x| fit.marginal.log_pdf(x)).sum();
        let mut best_grid_df = f64::NAN;
        let mut best_grid_ll = f64::NEG_INFINITY;
        for i in 0..=40 {
            let grid_df = 0.5 * 1.15f64.powi(i); // 0.5 .. ~133
            let ll = profile_ll(grid_df);
            if ll > best_grid_ll {
                best_grid_ll = ll;
                best_grid_df = grid_df;
            }
        }
        assert!((1.8..=2.2).contains(&best_grid_df), "oracle df {best_grid_df}");
        assert!(
            fitted_ll >= best_grid_ll - 1e-3 * data.len() as f64,
            "fit log-lik {fitted_ll} below grid oracle {best_grid_ll}"
        );
    }

    #[test]
    fn fit_degenerate_data_is_flagged() {
        let data = vec![3.0; 64];
        for family in [FitFamily::Normal, FitFamily::Laplace, FitFamily::StudentT] {
            let fit = fit_marginal_mle(family, &data).unwrap();
            assert!(fit.degenerate);
            let (_, scale) = fit.marginal.loc_scale();
            assert_eq!(scale, 1e-8);
        }
    }

    #[test]
    fn fit_rejects_tiny_samples() {
        assert!(fit_marginal_mle(FitFamily::Normal, &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn quantile_cdf_roundtrip(
            family in 0usize..4,
            loc in -3.0f64..3.0,
            scale in 0.2f64..5.0,
            df in 1.0f64..20.0,
            p in 1e-6f64..0.999999,
        ) {
            let m = match family {
                0 => Marginal1D::normal(loc, scale),
                1 => Marginal1D::student_t(df, loc, scale),
                2 => Marginal1D::laplace(loc, scale),
                _ => Marginal1D::uniform(loc, scale),
            };
            let x = m.quantile(p).unwrap();
            prop_assert!((m.cdf(x) - p).abs() < 1e-6);
        }
    }
}
