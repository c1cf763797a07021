//! Numerical kernels: least-squares projections, quadratic inequalities and
//! the tail-safe truncated normal distribution.

mod linalg;
mod quadratic;
mod truncnorm;

pub use linalg::{aic_quadratic_coeffs, least_squares, residual, OrthoBasis};
pub use quadratic::{solve_quadratic_leq, QuadCoeffs, QUAD_TOL};
pub use truncnorm::{
    erf, erfc, erfcx, invert_pivot_for_mean, log_normal_mass, log_upper_tail, normal_cdf, truncnorm_cdf,
    truncnorm_sf, Inversion,
};
pub(crate) use linalg::aic_quadratic_whitened;
