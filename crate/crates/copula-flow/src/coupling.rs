//! The joint base distribution: D marginals coupled by a copula.
//!
//! `log_pdf` is the copula-density factorization
//! `ln c(F_1(z_1), ..., F_D(z_D)) + Σ_j ln p_j(z_j)`; sampling pushes
//! copula draws through the marginal quantiles. With the Independence
//! copula the joint log-pdf decomposes into the sum of marginal log-pdfs,
//! which is exactly the vanilla flow base when the marginals are standard
//! normal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copulas::{Copula, UNIT_CLAMP};
use crate::error::{Error, Result};
use crate::marginals::Marginal1D;
use crate::numerics::Rng;
use crate::Dataset;

/// Marginals x copula, the flow's base distribution p_z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaBase {
    marginals: Vec<Marginal1D>,
    copula: Copula,
}

impl CopulaBase {
    pub fn new(marginals: Vec<Marginal1D>, copula: Copula) -> Result<Self> {
        if marginals.len() != copula.dim() {
            return Err(Error::Domain(format!(
                "copula dimension {} does not match {} marginals",
                copula.dim(),
                marginals.len()
            )));
        }
        for m in &marginals {
            m.validate()?;
        }
        copula.validate()?;
        Ok(Self { marginals, copula })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal1D] {
        &self.marginals
    }

    pub fn copula(&self) -> &Copula {
        &self.copula
    }

    /// ln p_z(z), with the clamp indicator from the copula evaluation.
    pub fn log_pdf_flagged(&self, z: &[f64]) -> (f64, bool) {
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let mut sum = 0.0;
        for (m, &zj) in self.marginals.iter().zip(z) {
            sum += m.log_pdf(zj);
        }
        if sum == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, false);
        }
        match &self.copula {
            // Independence contributes ln c = 0; skip the cdf evaluations.
            Copula::Independence { .. } => (sum, false),
            copula => {
                let mut u = [0.0f64; 8];
                for (slot, (m, &zj)) in u.iter_mut().zip(self.marginals.iter().zip(z)) {
                    *slot = m.cdf(zj).clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
                }
                let (ld, clamped) = copula.log_density_flagged(&u[..self.dim()]);
                (ld + sum, clamped)
            }
        }
    }

    /// ln p_z(z); -inf where any marginal density vanishes.
    pub fn log_pdf(&self, z: &[f64]) -> f64 {
        self.log_pdf_flagged(z).0
    }

    /// ∂ ln p_z / ∂z, for the training adjoints. Zero copula contribution
    /// wherever the unit-interval clamp saturated.
    pub fn grad_log_pdf(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for ((o, m), &zj) in out.iter_mut().zip(&self.marginals).zip(z) {
            *o = m.d_log_pdf(zj);
        }
        if matches!(self.copula, Copula::Independence { .. }) {
            return;
        }
        let d = self.dim();
        let mut u = vec![0.0f64; d];
        for (slot, (m, &zj)) in u.iter_mut().zip(self.marginals.iter().zip(z)) {
            *slot = m.cdf(zj);
        }
        let mut dcop = vec![0.0f64; d];
        self.copula.d_log_density(&u, &mut dcop);
        for j in 0..d {
            // chain rule: du_j/dz_j = p_j(z_j); d_log_density already
            // zeroes saturated coordinates
            out[j] += dcop[j] * self.marginals[j].pdf(z[j]);
        }
    }

    /// Joint CDF via Sklar: C(F_1(z_1), ..., F_D(z_D)).
    pub fn joint_cdf(&self, z: &[f64]) -> Result<f64> {
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let u: Vec<f64> = self
            .marginals
            .iter()
            .zip(z)
            .map(|(m, &zj)| m.cdf(zj))
            .collect();
        self.copula.cdf(&u)
    }

    /// n draws: copula sample, then componentwise marginal quantiles.
    pub fn sample(&self, rng: &mut Rng, n: usize) -> Dataset {
        let d = self.dim();
        let u = self.copula.sample(rng, n);
        let mut out = Dataset::with_capacity(d, n);
        let mut row = vec![0.0f64; d];
        for urow in u.rows() {
            for (j, slot) in row.iter_mut().enumerate() {
                // copula samplers can emit exact 0/1 in floating point
                let p = urow[j].clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
                *slot = self.marginals[j].quantile(p).expect("p in (0,1)");
            }
            out.push_row(&row);
        }
        out
    }
}

/// The four named base distributions of the toy study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasePreset {
    /// Independence + Normal(0,1)²: the vanilla flow base.
    #[serde(rename = "normal")]
    Normal,
    /// Independence + {Laplace(0,4), t₅(0,2)}.
    #[serde(rename = "heavierTails")]
    HeavierTails,
    /// Independence + t₅(0,1)².
    #[serde(rename = "correctFamily")]
    CorrectFamily,
    /// Independence + t₂(0,1)²: the target's own marginals.
    #[serde(rename = "exactMarginals")]
    ExactMarginals,
}

impl BasePreset {
    pub const ALL: [BasePreset; 4] = [
        BasePreset::Normal,
        BasePreset::HeavierTails,
        BasePreset::CorrectFamily,
        BasePreset::ExactMarginals,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BasePreset::Normal => "normal",
            BasePreset::HeavierTails => "heavierTails",
            BasePreset::CorrectFamily => "correctFamily",
            BasePreset::ExactMarginals => "exactMarginals",
        }
    }

    pub fn build(&self) -> CopulaBase {
        let marginals = match self {
            BasePreset::Normal => vec![Marginal1D::normal(0.0, 1.0), Marginal1D::normal(0.0, 1.0)],
            BasePreset::HeavierTails => vec![
                Marginal1D::laplace(0.0, 4.0),
                Marginal1D::student_t(5.0, 0.0, 2.0),
            ],
            BasePreset::CorrectFamily => vec![
                Marginal1D::student_t(5.0, 0.0, 1.0),
                Marginal1D::student_t(5.0, 0.0, 1.0),
            ],
            BasePreset::ExactMarginals => vec![
                Marginal1D::student_t(2.0, 0.0, 1.0),
                Marginal1D::student_t(2.0, 0.0, 1.0),
            ],
        };
        CopulaBase::new(marginals, Copula::independence(2)).expect("presets are valid")
    }
}

impl FromStr for BasePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(BasePreset::Normal),
            "heavierTails" => Ok(BasePreset::HeavierTails),
            "correctFamily" => Ok(BasePreset::CorrectFamily),
            "exactMarginals" => Ok(BasePreset::ExactMarginals),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected normal | heavierTails | correctFamily | exactMarginals)"
            ))),
        }
    }
}

impl fmt::Display for BasePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The study's target law: Gumbel(ρ=2.5) copula with t₂(0,1) marginals.
pub fn target_distribution() -> CopulaBase {
    CopulaBase::new(
        vec![
            Marginal1D::student_t(2.0, 0.0, 1.0),
            Marginal1D::student_t(2.0, 0.0, 1.0),
        ],
        Copula::gumbel(2.5),
    )
    .expect("target is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use approx::assert_abs_diff_eq;

    fn independence_t2() -> CopulaBase {
        BasePreset::ExactMarginals.build()
    }

    #[test]
    fn log_pdf_reference_points() {
        let normal = BasePreset::Normal.build();
        // isotropic Gaussian at the origin: -ln(2π)
        assert_abs_diff_eq!(normal.log_pdf(&[0.0, 0.0]), -1.837877, epsilon = 1e-6);
        assert_abs_diff_eq!(
            normal.log_pdf(&[0.0, 0.0]),
            -(2.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-12
        );

        // twice the t₂ mode log-density = ln(1/8)
        let t2 = independence_t2();
        assert_abs_diff_eq!(t2.log_pdf(&[0.0, 0.0]), -2.079442, epsilon = 1e-6);
        assert_abs_diff_eq!(t2.log_pdf(&[0.0, 0.0]), -(8.0f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn gaussian_copula_with_normal_marginals_is_bivariate_normal() {
        let base = CopulaBase::new(
            vec![Marginal1D::normal(0.0, 1.0), Marginal1D::normal(0.0, 1.0)],
            Copula::gaussian_bivariate(0.7).unwrap(),
        )
        .unwrap();
        let r: f64 = 0.7;
        let bvn_log_pdf = |x: f64, y: f64| {
            let det = 1.0 - r * r;
            -((x * x - 2.0 * r * x * y + y * y) / det) / 2.0
                - (2.0 * std::f64::consts::PI).ln()
                - 0.5 * det.ln()
        };
        for &(x, y) in &[(0.0, 0.0), (1.0, -0.5), (-2.0, 1.5), (3.0, 3.0)] {
            assert_abs_diff_eq!(base.log_pdf(&[x, y]), bvn_log_pdf(x, y), epsilon = 1e-8);
        }
    }

    #[test]
    fn independence_decomposition_is_exact() {
        let base = independence_t2();
        let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
        for &(x, y) in &[(0.0, 0.0), (1.3, -0.4), (-12.0, 55.0)] {
            assert_eq!(base.log_pdf(&[x, y]), t2.log_pdf(x) + t2.log_pdf(y));
        }
    }

    #[test]
    fn sample_through_identity_quantile_is_the_copula_sample() {
        let base = CopulaBase::new(
            vec![Marginal1D::uniform(0.0, 1.0), Marginal1D::uniform(0.0, 1.0)],
            Copula::independence(2),
        )
        .unwrap();
        let mut r1 = Rng::seed_from(31);
        let mut r2 = Rng::seed_from(31);
        let direct = Copula::independence(2).sample(&mut r1, 500);
        let coupled = base.sample(&mut r2, 500);
        for (a, b) in direct.rows().zip(coupled.rows()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sample_marginals_match_analytic_cdf() {
        let base = independence_t2();
        let mut rng = Rng::seed_from(32);
        let draws = base.sample(&mut rng, 1_000_000);
        let t2 = Marginal1D::student_t(2.0, 0.0, 1.0);
        for j in 0..2 {
            let mut col = draws.column(j);
            col.sort_by(f64::total_cmp);
            let n = col.len() as f64;
            let ks = col
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = t2.cdf(x);
                    (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
                })
                .fold(0.0, f64::max);
            assert!(ks < 0.002, "coordinate {j} KS {ks}");
        }
    }

    #[test]
    fn gumbel_coupling_sklar_consistency() {
        // P(z1 <= 0, z2 <= 0) = C(1/2, 1/2) for symmetric marginals.
        let target = target_distribution();
        let mut rng = Rng::seed_from(33);
        let n = 1_000_000;
        let draws = target.sample(&mut rng, n);
        let hits = draws.rows().filter(|r| r[0] <= 0.0 && r[1] <= 0.0).count();
        let emp = hits as f64 / n as f64;
        let expected = target.joint_cdf(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(expected, 0.40068, epsilon = 1e-5);
        assert_abs_diff_eq!(emp, expected, epsilon = 0.0015);
    }

    #[test]
    fn joint_cdf_reference_points() {
        let base = independence_t2();
        assert_abs_diff_eq!(
            base.joint_cdf(&[f64::INFINITY, f64::INFINITY]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(base.joint_cdf(&[0.0, 0.0]).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn sklar_round_trip_on_grid() {
        let target = target_distribution();
        let mut rng = Rng::seed_from(34);
        let n = 200_000;
        let draws = target.sample(&mut rng, n);
        for &x in &[-1.0, 0.0, 1.0] {
            for &y in &[-1.0, 0.0, 1.0] {
                let c = target.joint_cdf(&[x, y]).unwrap();
                let hits = draws.rows().filter(|r| r[0] <= x && r[1] <= y).count();
                let emp = hits as f64 / n as f64;
                let se = (c * (1.0 - c) / n as f64).sqrt();
                assert!(
                    (emp - c).abs() <= 3.0 * se + 1e-9,
                    "grid ({x},{y}): emp {emp} vs cdf {c}"
                );
            }
        }
    }

    #[test]
    fn two_dimensional_normalization() {
        use crate::numerics::quad::{uniform_edges, QuadratureRule};
        // box covering >= 0.999 marginal mass per axis
        for base in [independence_t2(), target_distribution(), BasePreset::HeavierTails.build()] {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for m in base.marginals() {
                lo = lo.min(m.quantile(0.0005).unwrap());
                hi = hi.max(m.quantile(0.9995).unwrap());
            }
            let rule = QuadratureRule::gauss_legendre_composite(16, &uniform_edges(lo, hi, 48));
            let mass: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&a, &wa)| {
                    wa * rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&b, &wb)| wb * base.log_pdf(&[a, b]).exp())
                        .sum::<f64>()
                })
                .sum();
            assert!(
                (0.995..=1.001).contains(&mass),
                "normalization {mass} for {base:?}"
            );
        }
    }

    #[test]
    fn grad_log_pdf_matches_fd() {
        let h = 1e-6;
        let mut grad = [0.0f64; 2];
        for base in [
            independence_t2(),
            BasePreset::HeavierTails.build(),
            target_distribution(),
            CopulaBase::new(
                vec![Marginal1D::normal(0.0, 1.0), Marginal1D::student_t(5.0, 0.0, 2.0)],
                Copula::gaussian_bivariate(0.6).unwrap(),
            )
            .unwrap(),
        ] {
            for &(x, y) in &[(0.4, -0.2), (1.5, 2.5), (-3.0, 0.1)] {
                base.grad_log_pdf(&[x, y], &mut grad);
                let fdx = (base.log_pdf(&[x + h, y]) - base.log_pdf(&[x - h, y])) / (2.0 * h);
                let fdy = (base.log_pdf(&[x, y + h]) - base.log_pdf(&[x, y - h])) / (2.0 * h);
                assert_abs_diff_eq!(grad[0], fdx, epsilon = 1e-4 * (1.0 + fdx.abs()));
                assert_abs_diff_eq!(grad[1], fdy, epsilon = 1e-4 * (1.0 + fdy.abs()));
            }
        }
    }

    #[test]
    fn presets_build_the_documented_marginals() {
        assert_eq!(
            BasePreset::Normal.build().marginals(),
            &[Marginal1D::normal(0.0, 1.0), Marginal1D::normal(0.0, 1.0)]
        );
        assert_eq!(
            BasePreset::HeavierTails.build().marginals(),
            &[Marginal1D::laplace(0.0, 4.0), Marginal1D::student_t(5.0, 0.0, 2.0)]
        );
        assert_eq!(
            BasePreset::CorrectFamily.build().marginals(),
            &[
                Marginal1D::student_t(5.0, 0.0, 1.0),
                Marginal1D::student_t(5.0, 0.0, 1.0)
            ]
        );
        assert_eq!(
            BasePreset::ExactMarginals.build().marginals(),
            &[
                Marginal1D::student_t(2.0, 0.0, 1.0),
                Marginal1D::student_t(2.0, 0.0, 1.0)
            ]
        );
        for p in BasePreset::ALL {
            assert_eq!(p.name().parse::<BasePreset>().unwrap(), p);
        }
        assert!("gauss".parse::<BasePreset>().is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let res = CopulaBase::new(vec![Marginal1D::normal(0.0, 1.0)], Copula::independence(2));
        assert!(res.is_err());
    }
}
