//! Angular and radial marginal densities of bivariate normal
//! distributions in closed form.
//!
//! A bivariate normal expressed in polar coordinates `(r, theta)` has two
//! marginals: `p(theta)`, the density over direction, and `p(r)`, the
//! density over distance from the origin. [`PolarMarginals`] evaluates both
//! under one of six [`CaseLabel`]s, from the zero-mean isotropic case
//! (uniform angle, Rayleigh radius) to the general case with offset mean
//! and correlated axes (a Bessel series in the radius).
//!
//! ```
//! use polar_marginals::{BivariateNormalParams, PolarMarginals, SeriesControl};
//!
//! let params = BivariateNormalParams::new(1.5, -1.5, 3.0, 2.0, 0.75)?;
//! let marginals = PolarMarginals::new(&params)?;
//! let p_theta = marginals.theta_density(0.3)?;
//! let p_r = marginals.r_density(3.0, &SeriesControl::default())?;
//! assert!(p_theta > 0.0 && p_r > 0.0);
//! # Ok::<(), polar_marginals::Error>(())
//! ```
//!
//! [`numeric`] integrates the joint density directly as an independent
//! check, and [`bench`] times both approaches against each other.

pub mod bench;
pub mod error;
pub mod marginals;
pub mod model;
pub mod numeric;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use marginals::{
    r_curve, r_density, theta_curve, theta_density, uniform_radii, uniform_thetas, weil_series_factor,
    weil_series_scaled, DensityCurve, PolarMarginals, SeriesControl, WeilSum,
};
pub use model::{
    classify, covariance, eval_pdf, principal_frame, BivariateNormalParams, CaseLabel, CovarianceMatrix,
    PrincipalFrame, DEFAULT_CLASSIFY_TOL,
};
pub use numeric::{
    compare_curves, default_grid, default_r_max, numeric_r_density, numeric_theta_density, CurveComparison,
    PolarGrid,
};
pub use specfun::{bessel_i, bessel_i_scaled, bessel_i_scaled_orders, std_normal_cdf, std_normal_pdf, BesselOrder};
