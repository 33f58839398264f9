//! Seeded random numbers with splittable sub-streams.
//!
//! One fixed algorithm (ChaCha8, a counter-based generator) drives every
//! random draw in the crate. A `(seed, stream)` pair addresses an
//! independent sub-stream, so trial i of a sweep reads stream i and its
//! results do not depend on execution order or on other trials.
//!
//! All variate transforms are implemented here on top of the raw uniform
//! stream: normals go through the shared quantile routine (one code path,
//! exactly reproducible), exponentials through the inverse CDF, gammas
//! through Marsaglia-Tsang, and positive stable variates through the
//! Kanter representation used for Gumbel copula sampling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::special::std_normal_quantile_unchecked;

const INV_2_POW_53: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

/// Deterministic generator: identical `(seed, stream)` gives an identical
/// variate sequence on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    /// Stream 0 of the given seed.
    pub fn seed_from(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent sub-stream `stream` of the given seed.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1), 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_POW_53
    }

    /// Uniform on the open interval (0, 1); safe to feed inverse CDFs.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * INV_2_POW_53
    }

    /// Standard normal via the inverse CDF.
    pub fn standard_normal(&mut self) -> f64 {
        std_normal_quantile_unchecked(self.uniform_open())
    }

    /// Standard exponential via the inverse CDF.
    pub fn standard_exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; the shape < 1 case boosts
    /// from shape + 1.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            let boost = self.gamma(shape + 1.0);
            let u = self.uniform_open();
            return boost * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.uniform_open();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Chi-square with `df` degrees of freedom.
    pub fn chi_square(&mut self, df: f64) -> f64 {
        2.0 * self.gamma(0.5 * df)
    }

    /// Positive stable variate with index `alpha` in (0, 1]: Laplace
    /// transform E[exp(-tV)] = exp(-t^alpha). Kanter's representation.
    pub fn positive_stable(&mut self, alpha: f64) -> f64 {
        assert!(alpha > 0.0 && alpha <= 1.0, "stable index must be in (0, 1]");
        if alpha == 1.0 {
            return 1.0;
        }
        let theta = std::f64::consts::PI * self.uniform_open();
        let e = self.standard_exponential();
        let s = theta.sin();
        (alpha * theta).sin() / s.powf(1.0 / alpha)
            * (((1.0 - alpha) * theta).sin() / e).powf((1.0 - alpha) / alpha)
    }
}
