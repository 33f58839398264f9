//! Special functions, quadrature, and the seeded random-number contract
//! that the rest of the crate builds on.

pub mod quad;
pub mod rng;
pub mod special;

pub use quad::{adaptive_simpson, gauss_quadrature, uniform_edges, QuadratureRule};
pub use rng::Rng;
pub use special::{
    erfc, log_gamma, reg_inc_beta, std_normal_cdf, std_normal_pdf, std_normal_quantile,
};
