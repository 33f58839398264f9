//! Gauss-Legendre quadrature rules and an adaptive Simpson fallback for
//! integrands with localized structure.

/// Nodes and weights for numerical integration over `[lo, hi]`.
///
/// Weights sum to `hi - lo`, so the rule is exact for constants.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    /// n-point Gauss-Legendre rule on `[lo, hi]`.
    pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Self {
        assert!(n >= 1);
        assert!(hi >= lo);
        let (xs, ws) = legendre_nodes(n);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let nodes = xs.iter().map(|&x| mid + half * x).collect();
        let weights = ws.iter().map(|&w| half * w).collect();
        Self {
            nodes,
            weights,
            interval: (lo, hi),
        }
    }

    /// Composite rule: an n-point Gauss-Legendre panel between each pair of
    /// consecutive edges. Graded edges handle integrable endpoint
    /// singularities (copula densities blow up at unit-cube corners).
    pub fn gauss_legendre_composite(n: usize, edges: &[f64]) -> Self {
        assert!(edges.len() >= 2);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            let panel = Self::gauss_legendre(n, pair[0], pair[1]);
            nodes.extend(panel.nodes);
            weights.extend(panel.weights);
        }
        Self {
            nodes,
            weights,
            interval: (edges[0], *edges.last().unwrap()),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        gauss_quadrature(f, self)
    }
}

/// Σ w_i f(node_i) for the given rule.
pub fn gauss_quadrature(f: impl Fn(f64) -> f64, rule: &QuadratureRule) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f(x))
        .sum()
}

/// Evenly spaced panel edges from `lo` to `hi`.
pub fn uniform_edges(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    assert!(panels >= 1);
    (0..=panels)
        .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
        .collect()
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        ws[i] = w;
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Simpson integration on `[lo, hi]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let flo = f(lo);
    let fmid = f(mid);
    let fhi = f(hi);
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let flmid = f(lmid);
    let frmid = f(rmid);
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1)
        + simpson_step(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{std_normal_cdf, std_normal_pdf};
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_integrand_recovers_length() {
        let rule = QuadratureRule::gauss_legendre(16, 0.0, 1.0);
        assert_abs_diff_eq!(rule.integrate(|_| 1.0), 1.0, epsilon = 1e-14);
        let sum: f64 = rule.weights.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn linear_integrand_exact() {
        let rule = QuadratureRule::gauss_legendre(8, 0.0, 1.0);
        assert_abs_diff_eq!(rule.integrate(|x| x), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_exactness_order() {
        // n-point rule is exact for degree 2n-1.
        let rule = QuadratureRule::gauss_legendre(5, -1.0, 2.0);
        let exact = (2.0f64.powi(10) - (-1.0f64).powi(10)) / 10.0;
        assert_abs_diff_eq!(rule.integrate(|x| x.powi(9)), exact, epsilon = 1e-12);
    }

    #[test]
    fn normal_density_normalizes() {
        // Cross-checked against the erf-based cdf.
        let rule = QuadratureRule::gauss_legendre_composite(24, &uniform_edges(-8.0, 8.0, 16));
        let mass = rule.integrate(std_normal_pdf);
        let cdf_mass = std_normal_cdf(8.0) - std_normal_cdf(-8.0);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mass, cdf_mass, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_simpson_matches_gauss() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -6.0, 6.0, 1e-12);
        assert_abs_diff_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn composite_weights_sum_to_interval() {
        let rule = QuadratureRule::gauss_legendre_composite(10, &[0.0, 0.1, 0.7, 2.0]);
        let sum: f64 = rule.weights.iter().sum();
        assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-13);
        assert_eq!(rule.interval, (0.0, 2.0));
    }
}
