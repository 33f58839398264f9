//! Copula families: multivariate distributions on the unit hypercube with
//! standard uniform marginals, plus their tail-dependence analytics.
//!
//! Three families are provided. The Independence copula is the product of
//! uniforms; the Gaussian copula couples coordinates through a correlation
//! matrix; the bivariate Gumbel copula
//! `C(u) = exp(-((-ln u_1)^ρ + (-ln u_2)^ρ)^{1/ρ})` adds upper tail
//! dependence with coefficient `λ_U = 2 - 2^{1/ρ}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile_unchecked};
use crate::numerics::{adaptive_simpson, Rng};
use crate::Dataset;

/// Inputs to density evaluation are clamped to this interior band; the
/// training path pushes marginal cdf outputs arbitrarily close to 0/1.
pub const UNIT_CLAMP: f64 = 1e-12;

/// A symmetric positive-definite matrix with unit diagonal, stored dense
/// row-major together with its Cholesky factor.
///
/// Config encoding: a bare number is the off-diagonal entry of a 2x2
/// matrix; larger dimensions spell out the full rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrEncoding", into = "CorrEncoding")]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<f64>,
    chol: Vec<f64>, // lower triangular, row-major
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrEncoding {
    OffDiagonal(f64),
    Rows(Vec<Vec<f64>>),
}

impl CorrelationMatrix {
    /// Build from dense rows, checking symmetry, unit diagonal, and
    /// positive definiteness (via the Cholesky factorization itself).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(Error::Domain("correlation matrix needs dimension >= 2".into()));
        }
        let mut entries = vec![0.0; dim * dim];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Domain("correlation matrix must be square".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                entries[i * dim + j] = v;
            }
        }
        for i in 0..dim {
            if (entries[i * dim + i] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain("correlation matrix needs a unit diagonal".into()));
            }
            for j in 0..i {
                if (entries[i * dim + j] - entries[j * dim + i]).abs() > 1e-12 {
                    return Err(Error::Domain("correlation matrix must be symmetric".into()));
                }
            }
        }
        let chol = cholesky(&entries, dim).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { dim, entries, chol })
    }

    /// 2x2 matrix with off-diagonal entry `r`.
    pub fn bivariate(r: f64) -> Result<Self> {
        Self::new(vec![vec![1.0, r], vec![r, 1.0]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Lower Cholesky factor L with R = L Lᵀ.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        (0..self.dim)
            .map(|i| 2.0 * self.chol[i * self.dim + i].ln())
            .sum()
    }

    /// Solve R x = b via the Cholesky factor.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut y = b.to_vec();
        for i in 0..d {
            for j in 0..i {
                y[i] -= self.chol[i * d + j] * y[j];
            }
            y[i] /= self.chol[i * d + i];
        }
        for i in (0..d).rev() {
            for j in i + 1..d {
                y[i] -= self.chol[j * d + i] * y[j];
            }
            y[i] /= self.chol[i * d + i];
        }
        y
    }
}

impl TryFrom<CorrEncoding> for CorrelationMatrix {
    type Error = Error;
    fn try_from(enc: CorrEncoding) -> Result<Self> {
        match enc {
            CorrEncoding::OffDiagonal(r) => Self::bivariate(r),
            CorrEncoding::Rows(rows) => Self::new(rows),
        }
    }
}

impl From<CorrelationMatrix> for CorrEncoding {
    fn from(m: CorrelationMatrix) -> Self {
        if m.dim == 2 {
            CorrEncoding::OffDiagonal(m.entry(0, 1))
        } else {
            CorrEncoding::Rows(
                (0..m.dim)
                    .map(|i| (0..m.dim).map(|j| m.entry(i, j)).collect())
                    .collect(),
            )
        }
    }
}

fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// A copula distribution on `[0,1]^D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Copula {
    Independence { dim: usize },
    Gaussian { corr: CorrelationMatrix },
    /// Bivariate Gumbel with parameter ρ >= 1.
    Gumbel { rho: f64 },
}

impl Copula {
    pub fn independence(dim: usize) -> Self {
        assert!(dim >= 2, "copula dimension must be at least 2");
        Copula::Independence { dim }
    }

    /// Bivariate Gaussian copula with correlation `r`.
    pub fn gaussian_bivariate(r: f64) -> Result<Self> {
        Ok(Copula::Gaussian {
            corr: CorrelationMatrix::bivariate(r)?,
        })
    }

    pub fn gumbel(rho: f64) -> Self {
        assert!(rho >= 1.0, "Gumbel parameter must satisfy rho >= 1");
        Copula::Gumbel { rho }
    }

    pub fn dim(&self) -> usize {
        match self {
            Copula::Independence { dim } => *dim,
            Copula::Gaussian { corr } => corr.dim(),
            Copula::Gumbel { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Copula::Independence { dim } if *dim < 2 => {
                Err(Error::Config("copula dimension must be >= 2".into()))
            }
            Copula::Gumbel { rho } if !(*rho >= 1.0) => {
                Err(Error::Config(format!("Gumbel rho must be >= 1, got {rho}")))
            }
            _ => Ok(()),
        }
    }

    /// C(u) for u componentwise in [0, 1].
    ///
    /// Boundary coordinates are handled first: any zero gives 0, and ones
    /// drop out of the joint (uniform-marginal property).
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        assert_eq!(u.len(), self.dim(), "point dimension mismatch");
        for &v in u {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("copula cdf needs u in [0,1], got {v}")));
            }
            if v == 0.0 {
                return Ok(0.0);
            }
        }
        match self {
            Copula::Independence { .. } => Ok(u.iter().product()),
            Copula::Gumbel { rho } => Ok(gumbel_cdf(*rho, u[0], u[1])),
            Copula::Gaussian { corr } => {
                if corr.dim() != 2 {
                    return Err(Error::Unsupported(
                        "Gaussian copula cdf is implemented for dimension 2".into(),
                    ));
                }
                let r = corr.entry(0, 1);
                // ones reduce to the remaining coordinate
                if u[0] == 1.0 {
                    return Ok(u[1]);
                }
                if u[1] == 1.0 {
                    return Ok(u[0]);
                }
                let x = std_normal_quantile_unchecked(u[0]);
                let y = std_normal_quantile_unchecked(u[1]);
                Ok(bivariate_normal_cdf(x, y, r))
            }
        }
    }

    /// ln c(u) at an interior point, with inputs clamped to
    /// `[UNIT_CLAMP, 1 - UNIT_CLAMP]`. Returns the clamp indicator too.
    pub fn log_density_flagged(&self, u: &[f64]) -> (f64, bool) {
        assert_eq!(u.len(), self.dim(), "point dimension mismatch");
        let mut clamped = false;
        let mut cu = [0.0f64; 8];
        let d = self.dim();
        assert!(d <= 8, "copula dimension beyond the supported bound");
        for (slot, &v) in cu.iter_mut().zip(u) {
            let c = v.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
            if c != v {
                clamped = true;
            }
            *slot = c;
        }
        let cu = &cu[..d];
        let ld = match self {
            Copula::Independence { .. } => 0.0,
            Copula::Gumbel { rho } => gumbel_log_density(*rho, cu[0], cu[1]),
            Copula::Gaussian { corr } => {
                // ln c = -½ qᵀ(R⁻¹ - I)q - ½ ln det R with q = Φ⁻¹(u)
                let q: Vec<f64> = cu.iter().map(|&v| std_normal_quantile_unchecked(v)).collect();
                let rinv_q = corr.solve(&q);
                let quad: f64 = q.iter().zip(&rinv_q).map(|(a, b)| a * b).sum();
                let qq: f64 = q.iter().map(|a| a * a).sum();
                -0.5 * (quad - qq) - 0.5 * corr.log_det()
            }
        };
        (ld, clamped)
    }

    /// ln c(u); see [`Copula::log_density_flagged`] for the clamp policy.
    pub fn log_density(&self, u: &[f64]) -> f64 {
        self.log_density_flagged(u).0
    }

    /// ∂ ln c / ∂u_j at the (clamped) point, for the training adjoints.
    /// Entries are zero wherever the clamp saturated.
    pub fn d_log_density(&self, u: &[f64], out: &mut [f64]) {
        assert_eq!(u.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        match self {
            Copula::Independence { .. } => out.fill(0.0),
            Copula::Gumbel { rho } => {
                let u0 = u[0].clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
                let u1 = u[1].clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
                let (d0, d1) = gumbel_d_log_density(*rho, u0, u1);
                out[0] = if u0 == u[0] { d0 } else { 0.0 };
                out[1] = if u1 == u[1] { d1 } else { 0.0 };
            }
            Copula::Gaussian { corr } => {
                let cu: Vec<f64> = u
                    .iter()
                    .map(|&v| v.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP))
                    .collect();
                let q: Vec<f64> = cu.iter().map(|&v| std_normal_quantile_unchecked(v)).collect();
                let rinv_q = corr.solve(&q);
                for j in 0..q.len() {
                    if cu[j] != u[j] {
                        out[j] = 0.0;
                    } else {
                        // d/dq_j of the quadratic form, then dq/du = 1/φ(q)
                        out[j] = -(rinv_q[j] - q[j]) / std_normal_pdf(q[j]);
                    }
                }
            }
        }
    }

    /// n draws from the copula.
    ///
    /// Independence: i.i.d. uniforms. Gaussian: correlated normals through
    /// the Cholesky factor, mapped by Φ. Gumbel: Marshall-Olkin with a
    /// positive stable mixing variate.
    pub fn sample(&self, rng: &mut Rng, n: usize) -> Dataset {
        let d = self.dim();
        let mut out = Dataset::with_capacity(d, n);
        let mut row = vec![0.0f64; d];
        match self {
            Copula::Independence { .. } => {
                for _ in 0..n {
                    for slot in row.iter_mut() {
                        *slot = rng.uniform();
                    }
                    out.push_row(&row);
                }
            }
            Copula::Gaussian { corr } => {
                let l = corr.cholesky_factor();
                let mut z = vec![0.0f64; d];
                for _ in 0..n {
                    for slot in z.iter_mut() {
                        *slot = rng.standard_normal();
                    }
                    for i in 0..d {
                        let mut s = 0.0;
                        for k in 0..=i {
                            s += l[i * d + k] * z[k];
                        }
                        row[i] = std_normal_cdf(s);
                    }
                    out.push_row(&row);
                }
            }
            Copula::Gumbel { rho } => {
                if *rho == 1.0 {
                    // reduces to independence
                    for _ in 0..n {
                        row[0] = rng.uniform();
                        row[1] = rng.uniform();
                        out.push_row(&row);
                    }
                } else {
                    let alpha = 1.0 / rho;
                    for _ in 0..n {
                        let v = rng.positive_stable(alpha);
                        for slot in row.iter_mut() {
                            let e = rng.standard_exponential();
                            *slot = (-(e / v).powf(alpha)).exp();
                        }
                        out.push_row(&row);
                    }
                }
            }
        }
        out
    }

    /// λ_U: limiting probability of a joint upper-tail event.
    pub fn upper_tail_dependence(&self) -> f64 {
        match self {
            Copula::Independence { .. } => 0.0,
            Copula::Gaussian { .. } => 0.0,
            Copula::Gumbel { rho } => 2.0 - 2.0f64.powf(1.0 / rho),
        }
    }

    /// λ_L: limiting probability of a joint lower-tail event.
    pub fn lower_tail_dependence(&self) -> f64 {
        match self {
            Copula::Independence { .. } | Copula::Gaussian { .. } | Copula::Gumbel { .. } => 0.0,
        }
    }
}

fn gumbel_cdf(rho: f64, u0: f64, u1: f64) -> f64 {
    if u0 == 1.0 {
        return u1;
    }
    if u1 == 1.0 {
        return u0;
    }
    let x = -u0.ln();
    let y = -u1.ln();
    let w = (x.powf(rho) + y.powf(rho)).powf(1.0 / rho);
    (-w).exp()
}

/// Closed-form mixed partial of the Gumbel cdf, in log form:
///
/// ln c = -w + (ρ-1)(ln x + ln y) + (x + y) + (2-2ρ) ln w + ln(1 + (ρ-1)/w)
/// with x = -ln u0, y = -ln u1, w = (x^ρ + y^ρ)^{1/ρ}.
fn gumbel_log_density(rho: f64, u0: f64, u1: f64) -> f64 {
    if rho == 1.0 {
        return 0.0;
    }
    let x = -u0.ln();
    let y = -u1.ln();
    let w = (x.powf(rho) + y.powf(rho)).powf(1.0 / rho);
    -w + (rho - 1.0) * (x.ln() + y.ln()) + (x + y) + (2.0 - 2.0 * rho) * w.ln()
        + ((rho - 1.0) / w).ln_1p()
}

/// (∂ ln c/∂u0, ∂ ln c/∂u1) for the Gumbel density above.
fn gumbel_d_log_density(rho: f64, u0: f64, u1: f64) -> (f64, f64) {
    if rho == 1.0 {
        return (0.0, 0.0);
    }
    let x = -u0.ln();
    let y = -u1.ln();
    let w = (x.powf(rho) + y.powf(rho)).powf(1.0 / rho);
    // common factor of d(ln c)/dw
    let dlnc_dw = -1.0 + (2.0 - 2.0 * rho) / w - (rho - 1.0) / (w * w + w * (rho - 1.0));
    let dw_dx = (x / w).powf(rho - 1.0);
    let dw_dy = (y / w).powf(rho - 1.0);
    let dlnc_dx = dlnc_dw * dw_dx + (rho - 1.0) / x + 1.0;
    let dlnc_dy = dlnc_dw * dw_dy + (rho - 1.0) / y + 1.0;
    (dlnc_dx * (-1.0 / u0), dlnc_dy * (-1.0 / u1))
}

/// Bivariate standard normal CDF P(X <= x, Y <= y) with correlation r,
/// by adaptive quadrature of φ(s) Φ((y - r s)/√(1-r²)) over s <= x.
pub fn bivariate_normal_cdf(x: f64, y: f64, r: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&r));
    let phi_x = std_normal_cdf(x);
    let phi_y = std_normal_cdf(y);
    if r == 0.0 {
        return phi_x * phi_y;
    }
    if r >= 1.0 - 1e-12 {
        return phi_x.min(phi_y);
    }
    if r <= -1.0 + 1e-12 {
        return (phi_x + phi_y - 1.0).max(0.0);
    }
    // Truncating at -9 loses less than 2e-19 of mass.
    let lo = -9.0;
    if x <= lo {
        return 0.0;
    }
    let hi = x.min(9.0);
    let denom = (1.0 - r * r).sqrt();
    let integrand = move |s: f64| std_normal_pdf(s) * std_normal_cdf((y - r * s) / denom);
    let head = adaptive_simpson(&integrand, lo, hi, 1e-11);
    if x > 9.0 {
        // remaining slab where Φ((y - r s)/denom) is within 1e-18 of its limit
        let tail_limit = if r > 0.0 { 0.0 } else { 1.0 };
        head + (phi_x - std_normal_cdf(9.0)) * tail_limit
    } else {
        head
    }
}
