//! Brute-force polar quadrature of the joint density, used as an
//! independent check on the closed forms.
//!
//! `p(theta) = int_0^R r g(r cos theta, r sin theta) dr` by composite
//! Simpson on a uniform radius grid, and
//! `p(r) = int_{-pi}^{pi} r g(r cos theta, r sin theta) dtheta` by the
//! periodic Simpson rule on a uniform angle grid. No renormalization is
//! applied afterwards.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::marginals::{check_abscissa, DensityCurve};
use crate::model::{principal_frame, BivariateNormalParams, Density};

pub const DEFAULT_N_THETA: usize = 3600;
pub const DEFAULT_N_R: usize = 1000;
/// Principal standard deviations added to `|mu|` for the default radius.
pub const TRUNCATION_SIGMAS: f64 = 12.0;

/// Uniform polar sampling: `n_theta` angles `-pi + j 2pi/n_theta` covering
/// [-pi, pi), and `n_r + 1` radii covering [0, r_max] in `n_r` panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    thetas: Vec<f64>,
    rs: Vec<f64>,
    r_max: f64,
}

impl PolarGrid {
    /// Both counts must be even and at least 8.
    pub fn new(n_theta: usize, n_r: usize, r_max: f64) -> Result<Self> {
        check_counts(n_theta, n_r)?;
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid { reason: format!("r_max must be finite and > 0, got {r_max}") });
        }
        let h_theta = TAU / n_theta as f64;
        let h_r = r_max / n_r as f64;
        Ok(PolarGrid {
            thetas: (0..n_theta).map(|j| -PI + j as f64 * h_theta).collect(),
            // the last radius is set exactly so rounding cannot overshoot
            rs: (0..=n_r).map(|i| if i == n_r { r_max } else { i as f64 * h_r }).collect(),
            r_max,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn rs(&self) -> &[f64] {
        &self.rs
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    /// Number of radial panels (one less than the number of radii).
    pub fn n_r(&self) -> usize {
        self.rs.len() - 1
    }

    pub fn theta_step(&self) -> f64 {
        TAU / self.thetas.len() as f64
    }

    pub fn r_step(&self) -> f64 {
        self.r_max / self.n_r() as f64
    }
}

fn check_counts(n_theta: usize, n_r: usize) -> Result<()> {
    for (name, n) in [("n_theta", n_theta), ("n_r", n_r)] {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid { reason: format!("{name} must be even and >= 8, got {n}") });
        }
    }
    Ok(())
}

/// `|mu| + 12 sigma_major`, where `sigma_major` is the larger principal
/// standard deviation.
pub fn default_r_max(params: &BivariateNormalParams) -> Result<f64> {
    let frame = principal_frame(params)?;
    Ok(params.mean_norm() + TRUNCATION_SIGMAS * frame.sigma_x_t.max(frame.sigma_y_t))
}

pub fn default_grid(params: &BivariateNormalParams, n_theta: usize, n_r: usize) -> Result<PolarGrid> {
    check_counts(n_theta, n_r)?;
    PolarGrid::new(n_theta, n_r, default_r_max(params)?)
}

fn theta_row(density: &Density, theta: f64, r_max: f64, n_r: usize) -> f64 {
    let h = r_max / n_r as f64;
    let (sin, cos) = theta.sin_cos();
    let f = |i: usize| {
        let r = if i == n_r { r_max } else { i as f64 * h };
        r * density.eval(r * cos, r * sin)
    };
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n_r {
        if i % 2 == 1 {
            odd += f(i);
        } else {
            even += f(i);
        }
    }
    h / 3.0 * (f(0) + f(n_r) + 4.0 * odd + 2.0 * even)
}

fn trig_table(n_theta: usize) -> Vec<(f64, f64)> {
    let h = TAU / n_theta as f64;
    (0..n_theta).map(|j| (-PI + j as f64 * h).sin_cos()).collect()
}

fn r_row(density: &Density, r: f64, trig: &[(f64, f64)]) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let h = TAU / trig.len() as f64;
    let (mut even, mut odd) = (0.0, 0.0);
    for pair in trig.chunks_exact(2) {
        even += density.eval(r * pair[0].1, r * pair[0].0);
        odd += density.eval(r * pair[1].1, r * pair[1].0);
    }
    r * h / 3.0 * (2.0 * even + 4.0 * odd)
}

/// Quadrature `p(theta)` at one angle, over `n_r` panels on [0, r_max].
pub fn numeric_theta_at(params: &BivariateNormalParams, theta: f64, r_max: f64, n_r: usize) -> Result<f64> {
    params.validate()?;
    check_counts(8, n_r)?;
    if !theta.is_finite() {
        return Err(Error::NonFiniteArgument { function: "numeric_theta_at", value: theta });
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidGrid { reason: format!("r_max must be finite and > 0, got {r_max}") });
    }
    Ok(theta_row(&Density::new(params), theta, r_max, n_r))
}

/// Quadrature `p(r)` at one radius, over `n_theta` angles.
pub fn numeric_r_at(params: &BivariateNormalParams, r: f64, n_theta: usize) -> Result<f64> {
    params.validate()?;
    check_counts(n_theta, 8)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::NegativeRadius { r });
    }
    Ok(r_row(&Density::new(params), r, &trig_table(n_theta)))
}

/// Quadrature `p(theta)` at every grid angle.
pub fn numeric_theta_density(params: &BivariateNormalParams, grid: &PolarGrid) -> Result<DensityCurve> {
    numeric_theta_curve(params, grid.thetas(), grid.r_max(), grid.n_r(), false)
}

/// Quadrature `p(r)` at every grid radius.
pub fn numeric_r_density(params: &BivariateNormalParams, grid: &PolarGrid) -> Result<DensityCurve> {
    numeric_r_curve(params, grid.rs(), grid.n_theta(), false)
}

pub fn numeric_theta_density_par(params: &BivariateNormalParams, grid: &PolarGrid) -> Result<DensityCurve> {
    numeric_theta_curve(params, grid.thetas(), grid.r_max(), grid.n_r(), true)
}

pub fn numeric_r_density_par(params: &BivariateNormalParams, grid: &PolarGrid) -> Result<DensityCurve> {
    numeric_r_curve(params, grid.rs(), grid.n_theta(), true)
}

/// Quadrature `p(theta)` at arbitrary increasing angles, integrating over
/// `n_r` panels on [0, r_max].
pub fn numeric_theta_curve(
    params: &BivariateNormalParams,
    thetas: &[f64],
    r_max: f64,
    n_r: usize,
    parallel: bool,
) -> Result<DensityCurve> {
    params.validate()?;
    check_counts(8, n_r)?;
    check_abscissa(thetas)?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidGrid { reason: format!("r_max must be finite and > 0, got {r_max}") });
    }
    let density = Density::new(params);
    let row = |&t: &f64| theta_row(&density, t, r_max, n_r);
    let values = if parallel { thetas.par_iter().map(row).collect() } else { thetas.iter().map(row).collect() };
    Ok(DensityCurve::from_parts(thetas.to_vec(), values))
}

/// Quadrature `p(r)` at arbitrary increasing radii, integrating over
/// `n_theta` angles.
pub fn numeric_r_curve(params: &BivariateNormalParams, rs: &[f64], n_theta: usize, parallel: bool) -> Result<DensityCurve> {
    params.validate()?;
    check_counts(n_theta, 8)?;
    check_abscissa(rs)?;
    if let Some(&r) = rs.first().filter(|r| **r < 0.0) {
        return Err(Error::NegativeRadius { r }.at(0));
    }
    let density = Density::new(params);
    let trig = trig_table(n_theta);
    let row = |&r: &f64| r_row(&density, r, &trig);
    let values = if parallel { rs.par_iter().map(row).collect() } else { rs.iter().map(row).collect() };
    Ok(DensityCurve::from_parts(rs.to_vec(), values))
}

/// Pointwise difference between two curves on the same abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveComparison {
    pub max_abs: f64,
    /// Largest `|a - b| / |b|` over samples with `|b| > 1e-12`.
    pub max_rel: f64,
    /// Index of `max_abs` (0 for empty or identical curves).
    pub index: usize,
}

pub const REL_FLOOR: f64 = 1e-12;

/// Compares `a` against the reference `b`. The abscissas must match exactly.
pub fn compare_curves(a: &DensityCurve, b: &DensityCurve) -> Result<CurveComparison> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let mut report = CurveComparison { max_abs: 0.0, max_rel: 0.0, index: 0 };
    for (index, ((xa, ya), (xb, yb))) in a.iter().zip(b.iter()).enumerate() {
        if xa != xb {
            return Err(Error::AbscissaMismatch { index, left: xa, right: xb });
        }
        let diff = (ya - yb).abs();
        if diff > report.max_abs {
            report.max_abs = diff;
            report.index = index;
        }
        if yb.abs() > REL_FLOOR {
            report.max_rel = report.max_rel.max(diff / yb.abs());
        }
    }
    Ok(report)
}
