//! Closed-form polar marginals of a bivariate normal.
//!
//! `p(theta)` integrates the density over radius along a ray from the
//! origin; `p(r)` integrates it over angle around the circle of radius
//! `r`. Each [`CaseLabel`] has its own pair of formulas; the less general
//! the case, the cheaper the formula.
//!
//! Anything involving `I_n` is evaluated with exponentially scaled Bessel
//! functions and a single merged exponent, so the densities stay finite
//! where `I_0(b r^2)` alone would overflow.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    classify, principal_frame, BivariateNormalParams, CaseLabel, Density, DEFAULT_CLASSIFY_TOL,
};
use crate::specfun::{normal_cdf, normal_pdf, scaled_orders, BesselOrder, FRAC_1_SQRT_2PI};

/// Truncation control for the Weil series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Stop once a term falls below `tol` times the running sum.
    pub tol: f64,
    /// Hard cap on the number of terms after the `k = 0` term.
    pub k_max: usize,
}

impl SeriesControl {
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_K_MAX: usize = 200;

    pub fn new(tol: f64, k_max: usize) -> Result<Self> {
        let ctl = SeriesControl { tol, k_max };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol > 0.0 && self.tol.is_finite() && self.k_max >= 1 {
            Ok(())
        } else {
            Err(Error::InvalidSeriesControl { tol: self.tol, k_max: self.k_max })
        }
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { tol: Self::DEFAULT_TOL, k_max: Self::DEFAULT_K_MAX }
    }
}

/// Sampled marginal density: strictly increasing abscissa (theta in
/// radians, or r) with a finite non-negative density per sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityCurve {
    abscissa: Vec<f64>,
    density: Vec<f64>,
}

impl DensityCurve {
    pub fn new(abscissa: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if abscissa.len() != density.len() {
            return Err(Error::LengthMismatch { left: abscissa.len(), right: density.len() });
        }
        check_abscissa(&abscissa)?;
        if let Some((index, &value)) =
            density.iter().enumerate().find(|(_, d)| !(d.is_finite() && **d >= 0.0))
        {
            return Err(Error::InvalidDensity { index, value });
        }
        Ok(DensityCurve { abscissa, density })
    }

    /// For producers whose abscissa and density are valid by construction.
    pub(crate) fn from_parts(abscissa: Vec<f64>, density: Vec<f64>) -> Self {
        debug_assert_eq!(abscissa.len(), density.len());
        DensityCurve { abscissa, density }
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.abscissa.iter().copied().zip(self.density.iter().copied())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.abscissa, self.density)
    }
}

pub(crate) fn check_abscissa(abscissa: &[f64]) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (index, &value) in abscissa.iter().enumerate() {
        if !value.is_finite() || value <= prev {
            return Err(Error::InvalidAbscissa { index, value });
        }
        prev = value;
    }
    Ok(())
}

/// The Weil series evaluated with scaled Bessel functions. The unscaled
/// factor `I_0(b r^2) I_0(c r) + 2 sum_k I_k(b r^2) I_2k(c r) cos(2 k psi)`
/// equals `scaled * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeilSum {
    pub scaled: f64,
    pub log_scale: f64,
    /// Number of `k >= 1` terms summed.
    pub terms: usize,
    /// Scaled magnitude of the last term summed.
    pub last_term: f64,
    /// Scaled sum of the magnitudes of all terms; `abs_sum / |scaled|`
    /// bounds the digits lost to cancellation.
    pub abs_sum: f64,
    pub converged: bool,
}

impl WeilSum {
    pub fn value(&self) -> f64 {
        self.scaled * self.log_scale.exp()
    }
}

/// Sums the series until `|I_k(b r^2) I_2k(c r)|` drops below
/// `ctl.tol * |sum|` or `ctl.k_max` terms have been added. The stopping
/// test ignores the `cos(2 k psi)` factor so that a vanishing cosine
/// cannot end the sum early. Inputs are assumed finite with `c, r >= 0`.
pub fn weil_series_scaled(b: f64, c: f64, psi: f64, r: f64, ctl: &SeriesControl) -> WeilSum {
    weil_sum(b, c, psi, r, ctl, &mut Scratch::default())
}

/// Bessel order buffers reused across the points of a curve.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    first: Vec<f64>,
    second: Vec<f64>,
}

fn weil_sum(b: f64, c: f64, psi: f64, r: f64, ctl: &SeriesControl, scratch: &mut Scratch) -> WeilSum {
    let x1 = b * r * r;
    let x2 = c * r;
    let log_scale = x1.abs() + x2;
    let cos_2psi = (2.0 * psi).cos();
    let mut len = initial_terms(x1.abs(), x2).clamp(1, ctl.k_max);
    let Scratch { first, second } = scratch;
    loop {
        first.resize(len + 1, 0.0);
        second.resize(2 * len + 1, 0.0);
        scaled_orders(x1, &mut first[..]);
        scaled_orders(x2, &mut second[..]);

        let mut sum = first[0] * second[0];
        let mut last_term = sum.abs();
        let mut abs_sum = last_term;
        // cos(2 k psi) by the Chebyshev recurrence
        let (mut cos_prev, mut cos_k) = (1.0, cos_2psi);
        for k in 1..=len {
            let product = first[k] * second[2 * k];
            sum += 2.0 * product * cos_k;
            last_term = 2.0 * product.abs();
            abs_sum += last_term;
            if last_term <= ctl.tol * sum.abs() {
                return WeilSum { scaled: sum, log_scale, terms: k, last_term, abs_sum, converged: true };
            }
            (cos_prev, cos_k) = (cos_k, 2.0 * cos_2psi * cos_k - cos_prev);
        }
        if len >= ctl.k_max {
            return WeilSum { scaled: sum, log_scale, terms: len, last_term, abs_sum, converged: false };
        }
        len = (2 * len).min(ctl.k_max);
    }
}

/// Largest tolerated `abs_sum / |sum|` before `p(r)` switches from the
/// series to the integral form, i.e. about 6 of 16 digits lost.
const CANCELLATION_LIMIT: f64 = 1e6;

/// The same factor from its integral representation
/// `(1/2pi) int exp(b r^2 cos 2phi + c r cos(phi - psi)) dphi`, by the
/// periodic trapezoid rule, doubling the node count until two estimates
/// agree. Returns `(scaled, log_scale)` with the shift at the largest
/// sampled exponent, so it stays accurate where the series cancels.
fn weil_integral(b: f64, c: f64, psi: f64, r: f64, nodes: &mut Vec<f64>) -> (f64, f64) {
    let (x1, x2) = (b * r * r, c * r);
    let exponent = |phi: f64| x1 * (2.0 * phi).cos() + x2 * (phi - psi).cos();
    let mut n = 64usize;
    nodes.clear();
    nodes.extend((0..n).map(|j| exponent(j as f64 * TAU / n as f64)));
    let mut shift = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total: f64 = nodes.iter().map(|g| (g - shift).exp()).sum();
    let mut estimate = total / n as f64;
    loop {
        let h = TAU / n as f64;
        nodes.clear();
        nodes.extend((0..n).map(|j| exponent((j as f64 + 0.5) * h)));
        let peak = nodes.iter().copied().fold(shift, f64::max);
        if peak > shift {
            total *= (shift - peak).exp();
            shift = peak;
        }
        total += nodes.iter().map(|g| (g - shift).exp()).sum::<f64>();
        n *= 2;
        let next = total / n as f64;
        if (next - estimate).abs() <= 1e-14 * next || n >= 1 << 22 {
            return (next, shift);
        }
        estimate = next;
    }
}

/// Rough count of terms needed: `I_k(x)/I_0(x)` falls off like
/// `exp(-k^2 / 2x)`, and the second factor only has even orders.
fn initial_terms(x1: f64, x2: f64) -> usize {
    let estimate = |x: f64| 4 + (8.0 * x.sqrt()).ceil() as usize;
    estimate(x1).min(estimate(x2) / 2 + 2)
}

/// The unscaled Weil series factor. Fails with [`Error::SeriesTruncated`]
/// (carrying the partial sum) if `ctl.k_max` terms were not enough.
pub fn weil_series_factor(b: f64, c: f64, psi: f64, r: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    for value in [b, c, psi, r] {
        if !value.is_finite() {
            return Err(Error::NonFiniteArgument { function: "weil_series_factor", value });
        }
    }
    if r < 0.0 {
        return Err(Error::NegativeRadius { r });
    }
    if c < 0.0 {
        return Err(Error::NonFiniteArgument { function: "weil_series_factor (c < 0)", value: c });
    }
    let sum = weil_series_scaled(b, c, psi, r, ctl);
    if sum.converged {
        Ok(sum.value())
    } else {
        Err(Error::SeriesTruncated { k_max: ctl.k_max, last_term: sum.last_term, partial: sum.value() })
    }
}

/// Per-case constants of `p(theta)`.
#[derive(Debug, Clone, Copy)]
enum AngularForm {
    /// (a): 1/(2 pi).
    Uniform,
    /// (b): 1/(2ab), a = 2 pi sx sy, b = cos^2/(2 sx^2) + sin^2/(2 sy^2).
    ZeroMeanDiagonal { a: f64, inv_2sx2: f64, inv_2sy2: f64 },
    /// (c): 1/(2ab) with the correlated quadratic form.
    ZeroMeanFull { a: f64, scale: f64, inv_sx2: f64, inv_sy2: f64, cross: f64 },
    /// (d): phi(a)(1 + b Phi(b)/phi(b)) / sqrt(2 pi).
    OffsetIsotropic { mu_x: f64, mu_y: f64, inv_sigma: f64, a: f64 },
    /// (e): phi(b)(1 + c Phi(c)/phi(c)) / (a sqrt(2 pi sx^2 sy^2)).
    OffsetDiagonal { mu_x: f64, mu_y: f64, inv_sx2: f64, inv_sy2: f64, b: f64, norm: f64, inv_sxsy: f64 },
    /// (f): (b + c d Phi(d) phi(c (mx sin - my cos)/sqrt(a))) / a.
    General { mu_x: f64, mu_y: f64, sx: f64, sy: f64, rho: f64, b: f64, c: f64 },
}

impl AngularForm {
    fn new(params: &BivariateNormalParams, case: CaseLabel) -> Self {
        let BivariateNormalParams { mu_x, mu_y, sigma_x: sx, sigma_y: sy, rho } = *params;
        match case {
            CaseLabel::ZeroMeanIsotropic => AngularForm::Uniform,
            CaseLabel::ZeroMeanAnisoDiagonal => AngularForm::ZeroMeanDiagonal {
                a: TAU * sx * sy,
                inv_2sx2: 1.0 / (2.0 * sx * sx),
                inv_2sy2: 1.0 / (2.0 * sy * sy),
            },
            CaseLabel::ZeroMeanAnisoFull => {
                let one_minus = 1.0 - rho * rho;
                AngularForm::ZeroMeanFull {
                    a: TAU * sx * sy * one_minus.sqrt(),
                    scale: 1.0 / (2.0 * one_minus),
                    inv_sx2: 1.0 / (sx * sx),
                    inv_sy2: 1.0 / (sy * sy),
                    cross: 2.0 * rho / (sx * sy),
                }
            }
            CaseLabel::MeanIsotropic => {
                let inv_sigma = 1.0 / sx;
                AngularForm::OffsetIsotropic { mu_x, mu_y, inv_sigma, a: params.mean_norm() * inv_sigma }
            }
            CaseLabel::MeanAnisoDiagonal => AngularForm::OffsetDiagonal {
                mu_x,
                mu_y,
                inv_sx2: 1.0 / (sx * sx),
                inv_sy2: 1.0 / (sy * sy),
                b: (mu_x / sx).hypot(mu_y / sy),
                norm: 1.0 / ((TAU).sqrt() * sx * sy),
                inv_sxsy: 1.0 / (sx * sy),
            },
            CaseLabel::MeanAnisoFull => AngularForm::General {
                mu_x,
                mu_y,
                sx,
                sy,
                rho,
                b: Density::new(&params.with_zero_mean()).eval(mu_x, mu_y),
                c: 1.0 / (sx * sy * (1.0 - rho * rho).sqrt()),
            },
        }
    }

    #[inline]
    fn eval(&self, theta: f64) -> f64 {
        let (sin, cos) = theta.sin_cos();
        match *self {
            AngularForm::Uniform => 1.0 / TAU,
            AngularForm::ZeroMeanDiagonal { a, inv_2sx2, inv_2sy2 } => {
                let b = cos * cos * inv_2sx2 + sin * sin * inv_2sy2;
                1.0 / (2.0 * a * b)
            }
            AngularForm::ZeroMeanFull { a, scale, inv_sx2, inv_sy2, cross } => {
                let b = scale * (cos * cos * inv_sx2 + sin * sin * inv_sy2 - cross * cos * sin);
                1.0 / (2.0 * a * b)
            }
            AngularForm::OffsetIsotropic { mu_x, mu_y, inv_sigma, a } => {
                // phi(a)/phi(b) = exp(-(a^2 - b^2)/2), and a^2 - b^2 is the
                // squared component of the mean across the ray.
                let b = inv_sigma * (mu_x * cos + mu_y * sin);
                let across = inv_sigma * (mu_x * sin - mu_y * cos);
                FRAC_1_SQRT_2PI * (normal_pdf(a) + b * normal_cdf(b) * (-0.5 * across * across).exp())
            }
            AngularForm::OffsetDiagonal { mu_x, mu_y, inv_sx2, inv_sy2, b, norm, inv_sxsy } => {
                let a = cos * cos * inv_sx2 + sin * sin * inv_sy2;
                let sqrt_a = a.sqrt();
                let c = (mu_x * inv_sx2 * cos + mu_y * inv_sy2 * sin) / sqrt_a;
                let across = (mu_x * sin - mu_y * cos) * inv_sxsy / sqrt_a;
                norm / a * (normal_pdf(b) + c * normal_cdf(c) * (-0.5 * across * across).exp())
            }
            AngularForm::General { mu_x, mu_y, sx, sy, rho, b, c } => {
                let c2 = c * c;
                let sin2 = 2.0 * sin * cos;
                let a = c2 * (sy * sy * cos * cos - rho * sx * sy * sin2 + sx * sx * sin * sin);
                let sqrt_a = a.sqrt();
                let d = c2 / sqrt_a
                    * (mu_x * sy * (sy * cos - rho * sx * sin) + mu_y * sx * (sx * sin - rho * sy * cos));
                let across = c * (mu_x * sin - mu_y * cos) / sqrt_a;
                (b + c * d * normal_cdf(d) * normal_pdf(across)) / a
            }
        }
    }
}

/// Per-case constants of `p(r)`.
#[derive(Debug, Clone, Copy)]
enum RadialForm {
    /// (a) Rayleigh: r/s^2 exp(-r^2/(2 s^2)).
    Rayleigh { inv_var: f64 },
    /// (b), (c): r/(sx sy) exp(-a r^2) I_0(-b r^2), in the principal frame for (c).
    ZeroMean { inv_sxsy: f64, a: f64, b: f64 },
    /// (d) Rician: r/s^2 exp(-(r^2 + m^2)/(2 s^2)) I_0(r m / s^2).
    Rician { inv_var: f64, mean_norm: f64 },
    /// (e), (f): a r exp(-quad r^2) * Weil series, in the principal frame for (f).
    Weil { ln_a: f64, quad: f64, b: f64, c: f64, psi: f64 },
}

impl RadialForm {
    fn new(params: &BivariateNormalParams, case: CaseLabel) -> Result<Self> {
        Ok(match case {
            CaseLabel::ZeroMeanIsotropic => {
                RadialForm::Rayleigh { inv_var: 1.0 / (params.sigma_x * params.sigma_x) }
            }
            CaseLabel::ZeroMeanAnisoDiagonal => Self::zero_mean(params.sigma_x, params.sigma_y),
            CaseLabel::ZeroMeanAnisoFull => {
                let frame = principal_frame(params)?;
                Self::zero_mean(frame.sigma_x_t, frame.sigma_y_t)
            }
            CaseLabel::MeanIsotropic => RadialForm::Rician {
                inv_var: 1.0 / (params.sigma_x * params.sigma_x),
                mean_norm: params.mean_norm(),
            },
            CaseLabel::MeanAnisoDiagonal => Self::weil(params),
            CaseLabel::MeanAnisoFull => Self::weil(&principal_frame(params)?.as_params()),
        })
    }

    fn zero_mean(sx: f64, sy: f64) -> Self {
        let (vx, vy) = (sx * sx, sy * sy);
        let denom = 4.0 * vx * vy;
        RadialForm::ZeroMean { inv_sxsy: 1.0 / (sx * sy), a: (vx + vy) / denom, b: (vx - vy) / denom }
    }

    /// Axis-aligned offset form. psi = atan2(my sx^2, mx sy^2), which is 0
    /// for a zero mean where c = 0 and the series collapses to I_0(b r^2).
    fn weil(p: &BivariateNormalParams) -> Self {
        let (vx, vy) = (p.sigma_x * p.sigma_x, p.sigma_y * p.sigma_y);
        RadialForm::Weil {
            ln_a: -(p.sigma_x * p.sigma_y).ln() - (p.mu_x * p.mu_x * vy + p.mu_y * p.mu_y * vx) / (2.0 * vx * vy),
            quad: (vx + vy) / (4.0 * vx * vy),
            b: (vx - vy) / (4.0 * vx * vy),
            c: (p.mu_x / vx).hypot(p.mu_y / vy),
            psi: (p.mu_y * vx).atan2(p.mu_x * vy),
        }
    }

    fn eval(&self, r: f64, ctl: &SeriesControl, scratch: &mut Scratch) -> Result<f64> {
        Ok(match *self {
            RadialForm::Rayleigh { inv_var } => r * inv_var * (-0.5 * r * r * inv_var).exp(),
            RadialForm::ZeroMean { inv_sxsy, a, b } => {
                let x = b.abs() * r * r;
                r * inv_sxsy * ((-a * r * r) + x).exp() * scaled_i0(x)
            }
            RadialForm::Rician { inv_var, mean_norm } => {
                let d = r - mean_norm;
                r * inv_var * (-0.5 * d * d * inv_var).exp() * scaled_i0(r * mean_norm * inv_var)
            }
            RadialForm::Weil { ln_a, quad, b, c, psi } => {
                if r == 0.0 {
                    return Ok(0.0);
                }
                let sum = weil_sum(b, c, psi, r, ctl, scratch);
                if !sum.converged {
                    return Err(Error::SeriesTruncated {
                        k_max: ctl.k_max,
                        last_term: sum.last_term,
                        partial: sum.value(),
                    });
                }
                let (scaled, log_scale) = if sum.abs_sum > CANCELLATION_LIMIT * sum.scaled.abs() {
                    weil_integral(b, c, psi, r, &mut scratch.first)
                } else {
                    (sum.scaled, sum.log_scale)
                };
                (r * (ln_a - quad * r * r + log_scale).exp() * scaled).max(0.0)
            }
        })
    }
}

#[inline]
fn scaled_i0(x: f64) -> f64 {
    crate::specfun::bessel_i_scaled(BesselOrder::ZERO, x).unwrap_or(f64::NAN)
}

/// Both marginals of one distribution under one case's formulas, with the
/// case constants computed once.
#[derive(Debug, Clone)]
pub struct PolarMarginals {
    params: BivariateNormalParams,
    case: CaseLabel,
    angular: AngularForm,
    radial: RadialForm,
}

impl PolarMarginals {
    /// Classifies `params` with the default tolerance and uses that case.
    pub fn new(params: &BivariateNormalParams) -> Result<Self> {
        let case = classify(params, DEFAULT_CLASSIFY_TOL)?;
        Self::build(params, case)
    }

    /// Uses `case`, which must apply to `params` (see [`CaseLabel::admits`]).
    pub fn with_case(params: &BivariateNormalParams, case: CaseLabel) -> Result<Self> {
        Self::with_case_tol(params, case, DEFAULT_CLASSIFY_TOL)
    }

    pub fn with_case_tol(params: &BivariateNormalParams, case: CaseLabel, tol: f64) -> Result<Self> {
        let detected = classify(params, tol)?;
        if !case.admits(detected) {
            return Err(Error::CaseMismatch { requested: case, detected });
        }
        Self::build(params, case)
    }

    /// Uses `case` without checking that its assumptions hold. Parameters
    /// the case ignores (the mean for (a)-(c), `sigma_y` for isotropic
    /// cases, `rho` for diagonal ones) are dropped.
    pub fn with_case_unchecked(params: &BivariateNormalParams, case: CaseLabel) -> Result<Self> {
        params.validate()?;
        Self::build(params, case)
    }

    fn build(params: &BivariateNormalParams, case: CaseLabel) -> Result<Self> {
        Ok(PolarMarginals {
            params: *params,
            case,
            angular: AngularForm::new(params, case),
            radial: RadialForm::new(params, case)?,
        })
    }

    pub fn params(&self) -> &BivariateNormalParams {
        &self.params
    }

    pub fn case(&self) -> CaseLabel {
        self.case
    }

    /// `p(theta)`, 2 pi periodic.
    pub fn theta_density(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::NonFiniteArgument { function: "theta_density", value: theta });
        }
        Ok(self.angular.eval(theta))
    }

    /// `p(r)` for `r >= 0`; zero at the origin.
    pub fn r_density(&self, r: f64, ctl: &SeriesControl) -> Result<f64> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::NegativeRadius { r });
        }
        self.radial.eval(r, ctl, &mut Scratch::default())
    }

    pub fn theta_curve(&self, thetas: &[f64]) -> Result<DensityCurve> {
        check_abscissa(thetas)?;
        let density = thetas.iter().map(|&t| self.angular.eval(t)).collect();
        Ok(DensityCurve { abscissa: thetas.to_vec(), density })
    }

    pub fn r_curve(&self, rs: &[f64], ctl: &SeriesControl) -> Result<DensityCurve> {
        ctl.validate()?;
        check_radii(rs)?;
        let mut scratch = Scratch::default();
        let density = rs
            .iter()
            .enumerate()
            .map(|(i, &r)| self.radial.eval(r, ctl, &mut scratch).map_err(|e| e.at(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityCurve { abscissa: rs.to_vec(), density })
    }

    /// Data-parallel [`theta_curve`](Self::theta_curve); identical output.
    pub fn theta_curve_par(&self, thetas: &[f64]) -> Result<DensityCurve> {
        check_abscissa(thetas)?;
        let density = thetas.par_iter().map(|&t| self.angular.eval(t)).collect();
        Ok(DensityCurve { abscissa: thetas.to_vec(), density })
    }

    /// Data-parallel [`r_curve`](Self::r_curve); identical output, and the
    /// reported error is the one at the lowest failing index.
    pub fn r_curve_par(&self, rs: &[f64], ctl: &SeriesControl) -> Result<DensityCurve> {
        ctl.validate()?;
        check_radii(rs)?;
        let results: Vec<Result<f64>> = rs.par_iter().map_init(Scratch::default, |scratch, &r| self.radial.eval(r, ctl, scratch)).collect();
        let density = results
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.map_err(|e| e.at(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityCurve { abscissa: rs.to_vec(), density })
    }
}

fn check_radii(rs: &[f64]) -> Result<()> {
    check_abscissa(rs)?;
    match rs.first() {
        Some(&r) if r < 0.0 => Err(Error::NegativeRadius { r }.at(0)),
        _ => Ok(()),
    }
}

/// `p(theta)` under `case`; fails if the case does not apply.
pub fn theta_density(params: &BivariateNormalParams, theta: f64, case: CaseLabel) -> Result<f64> {
    PolarMarginals::with_case(params, case)?.theta_density(theta)
}

/// `p(r)` under `case`; fails if the case does not apply.
pub fn r_density(params: &BivariateNormalParams, r: f64, case: CaseLabel, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    PolarMarginals::with_case(params, case)?.r_density(r, ctl)
}

/// `p(theta)` over `thetas`, classifying automatically unless `case` is given.
pub fn theta_curve(params: &BivariateNormalParams, thetas: &[f64], case: Option<CaseLabel>) -> Result<DensityCurve> {
    marginals_for(params, case)?.theta_curve(thetas)
}

/// `p(r)` over `rs`, classifying automatically unless `case` is given.
pub fn r_curve(
    params: &BivariateNormalParams,
    rs: &[f64],
    case: Option<CaseLabel>,
    ctl: &SeriesControl,
) -> Result<DensityCurve> {
    marginals_for(params, case)?.r_curve(rs, ctl)
}

fn marginals_for(params: &BivariateNormalParams, case: Option<CaseLabel>) -> Result<PolarMarginals> {
    match case {
        Some(case) => PolarMarginals::with_case(params, case),
        None => PolarMarginals::new(params),
    }
}

/// `n` angles uniformly covering [-pi, pi).
pub fn uniform_thetas(n: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    (0..n).map(|j| -PI + j as f64 * h).collect()
}

/// `n + 1` radii uniformly covering [0, r_max].
pub fn uniform_radii(n: usize, r_max: f64) -> Vec<f64> {
    let h = r_max / n as f64;
    (0..=n).map(|i| i as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mx: f64, my: f64, sx: f64, sy: f64, rho: f64) -> BivariateNormalParams {
        BivariateNormalParams::new(mx, my, sx, sy, rho).unwrap()
    }

    const CTL: SeriesControl = SeriesControl { tol: 1e-12, k_max: 200 };

    #[test]
    fn series_control_validation() {
        assert!(SeriesControl::new(0.0, 10).is_err());
        assert!(SeriesControl::new(1e-12, 0).is_err());
        assert!(SeriesControl::new(f64::NAN, 10).is_err());
        assert_eq!(SeriesControl::default(), SeriesControl::new(1e-12, 200).unwrap());
    }

    #[test]
    fn density_curve_validation() {
        assert!(DensityCurve::new(vec![0.0, 1.0], vec![0.1]).is_err());
        assert!(DensityCurve::new(vec![0.0, 0.0], vec![0.1, 0.2]).is_err());
        assert!(DensityCurve::new(vec![0.0, 1.0], vec![0.1, -0.2]).is_err());
        assert!(DensityCurve::new(vec![0.0, 1.0], vec![0.1, f64::NAN]).is_err());
        assert!(DensityCurve::new(vec![], vec![]).unwrap().is_empty());
    }

    #[test]
    fn case_a_examples() {
        let params = p(0.0, 0.0, 2.0, 2.0, 0.0);
        for theta in [-3.0, 0.0, 1.0, 100.0] {
            let v = theta_density(&params, theta, CaseLabel::ZeroMeanIsotropic).unwrap();
            assert!((v - 0.159_154_943_091_895_34).abs() < 1e-16);
        }
        let unit = BivariateNormalParams::standard();
        assert_eq!(r_density(&unit, 0.0, CaseLabel::ZeroMeanIsotropic, &CTL).unwrap(), 0.0);
        let v = r_density(&unit, 1.0, CaseLabel::ZeroMeanIsotropic, &CTL).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn case_b_theta_examples() {
        let params = p(0.0, 0.0, 3.0, 2.0, 0.0);
        let case = CaseLabel::ZeroMeanAnisoDiagonal;
        // mpmath quadrature of r g(r cos t, r sin t) over r
        assert!((theta_density(&params, 0.0, case).unwrap() - 0.238_732_414_637_843).abs() < 1e-14);
        let v = theta_density(&params, PI / 2.0, case).unwrap();
        assert!((v - 0.106_103_295_394_596_89).abs() < 1e-14);
    }

    #[test]
    fn case_d_examples() {
        let params = p(1.5, -1.5, 2.0, 2.0, 0.0);
        let case = CaseLabel::MeanIsotropic;
        // mpmath quadrature oracle
        assert!((theta_density(&params, 0.0, case).unwrap() - 0.265_352_342_947_783_66).abs() < 1e-13);
        assert!((r_density(&params, 2.0, case, &CTL).unwrap() - 0.224_919_854_535_792_84).abs() < 1e-13);
    }

    #[test]
    fn case_e_f_examples() {
        // mpmath quadrature oracle over the full density
        let e = p(1.5, -1.5, 3.0, 2.0, 0.0);
        let v = r_density(&e, 3.0, CaseLabel::MeanAnisoDiagonal, &CTL).unwrap();
        assert!((v - 0.207_753_603_866_636_9).abs() < 1e-12);
        let f = p(1.5, -1.5, 3.0, 2.0, 0.75);
        let v = r_density(&f, 3.0, CaseLabel::MeanAnisoFull, &CTL).unwrap();
        assert!((v - 0.248_801_296_835_800_37).abs() < 1e-12);
        let v = theta_density(&f, 0.3, CaseLabel::MeanAnisoFull).unwrap();
        assert!((v - 0.395_378_215_365_019_7).abs() < 1e-13);
    }

    #[test]
    fn case_f_with_zero_rho_matches_e() {
        let e = p(1.5, -1.5, 3.0, 2.0, 0.0);
        for theta in uniform_thetas(36) {
            let fe = theta_density(&e, theta, CaseLabel::MeanAnisoFull).unwrap();
            let ee = theta_density(&e, theta, CaseLabel::MeanAnisoDiagonal).unwrap();
            assert!((fe - ee).abs() < 1e-14, "theta={theta}: {fe} vs {ee}");
        }
    }

    #[test]
    fn mismatched_case_is_rejected() {
        let offset = p(1.5, 0.0, 2.0, 2.0, 0.0);
        let err = theta_density(&offset, 0.0, CaseLabel::ZeroMeanIsotropic).unwrap_err();
        assert!(matches!(
            err,
            Error::CaseMismatch { requested: CaseLabel::ZeroMeanIsotropic, detected: CaseLabel::MeanIsotropic }
        ));
        assert!(r_density(&p(0.0, 0.0, 3.0, 2.0, 0.2), 1.0, CaseLabel::ZeroMeanAnisoDiagonal, &CTL).is_err());
        // the unchecked constructor evaluates the requested form anyway
        let forced = PolarMarginals::with_case_unchecked(&offset, CaseLabel::ZeroMeanIsotropic).unwrap();
        assert_eq!(forced.theta_density(1.0).unwrap(), 1.0 / TAU);
    }

    #[test]
    fn invalid_arguments() {
        let m = PolarMarginals::new(&BivariateNormalParams::standard()).unwrap();
        assert!(m.theta_density(f64::NAN).is_err());
        assert!(m.r_density(-1.0, &CTL).is_err());
        assert!(m.r_density(f64::INFINITY, &CTL).is_err());
        assert!(m.r_curve(&[-1.0, 0.0], &CTL).is_err());
        assert!(m.theta_curve(&[0.0, -1.0]).is_err());
    }

    #[test]
    fn weil_factor_examples() {
        for (b, psi, r) in [(0.3, 0.2, 2.0), (-0.1, 1.0, 5.0), (0.0, 0.0, 1.0)] {
            let v = weil_series_factor(b, 0.0, psi, r, &CTL).unwrap();
            let i0 = crate::specfun::bessel_i(BesselOrder::ZERO, b * r * r).unwrap();
            assert!((v - i0).abs() <= 1e-15 * i0);
        }
        let v = weil_series_factor(0.0, 1.0, 0.0, 1.0, &CTL).unwrap();
        assert!((v - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!(weil_series_factor(0.1, -1.0, 0.0, 1.0, &CTL).is_err());
        assert!(weil_series_factor(0.1, 1.0, 0.0, -1.0, &CTL).is_err());
    }

    #[test]
    fn weil_factor_matches_direct_sum() {
        // Direct sum with independently evaluated scalar Bessel functions.
        let (b, c, psi, r) = (0.0347, 0.41, -1.15, 3.0);
        let i = |n: u32, x: f64| crate::specfun::bessel_i(BesselOrder::new(n), x).unwrap();
        let mut direct = i(0, b * r * r) * i(0, c * r);
        for k in 1..60u32 {
            direct += 2.0 * i(k, b * r * r) * i(2 * k, c * r) * (2.0 * f64::from(k) * psi).cos();
        }
        let v = weil_series_factor(b, c, psi, r, &CTL).unwrap();
        assert!((v - direct).abs() < 1e-13 * direct.abs(), "{v} vs {direct}");
    }

    #[test]
    fn weil_cosine_zero_does_not_stop_early() {
        // psi = pi/4 zeroes every odd-k cosine.
        let ctl = SeriesControl::new(1e-12, 200).unwrap();
        let sum = weil_series_scaled(0.5, 1.0, PI / 4.0, 3.0, &ctl);
        assert!(sum.converged);
        assert!(sum.terms > 2);
    }

    #[test]
    fn weil_cap_reports_truncation() {
        let ctl = SeriesControl::new(1e-12, 2).unwrap();
        let err = weil_series_factor(1.0, 3.0, 0.3, 4.0, &ctl).unwrap_err();
        match err {
            Error::SeriesTruncated { k_max, last_term, partial } => {
                assert_eq!(k_max, 2);
                assert!(last_term > 0.0 && partial.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
        let f = p(1.5, -1.5, 3.0, 2.0, 0.75);
        let err = r_curve(&f, &[0.0, 5.0, 10.0], None, &ctl).unwrap_err();
        assert!(matches!(err, Error::AtIndex { index: 1, .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn integral_form_matches_series() {
        let mut nodes = Vec::new();
        for (b, c, psi, r) in [(0.0347, 0.41, -1.15, 3.0), (-0.2, 1.3, 0.4, 5.0), (0.5, 0.0, 0.0, 2.0)] {
            let series = weil_series_scaled(b, c, psi, r, &CTL);
            let (scaled, log_scale) = weil_integral(b, c, psi, r, &mut nodes);
            let from_integral = scaled * (log_scale - series.log_scale).exp();
            assert!((from_integral - series.scaled).abs() <= 1e-13 * series.scaled, "{from_integral} vs {series:?}");
        }
    }

    #[test]
    fn cancelling_series_falls_back_to_integral() {
        // Mean along the minor axis of a narrow distribution: the series
        // terms alternate and cancel almost completely.
        let params = p(-2.958_868_643_090_982_5, 0.748_297_110_367_072_9, 0.335_075_829_121_300_1, 3.418_822_288_849_35, 0.170_373_328_200_470_4);
        let m = PolarMarginals::new(&params).unwrap();
        let s = PolarMarginals::new(&params.swap_axes()).unwrap();
        let r = 4.278_181_087_421_852;
        let (a, b) = (m.r_density(r, &CTL).unwrap(), s.r_density(r, &CTL).unwrap());
        assert!(a < 1.0 && (a - b).abs() < 1e-12, "{a} vs {b}");
        let oracle = crate::numeric::numeric_r_at(&params, r, 3600).unwrap();
        assert!((a - oracle).abs() < 1e-12, "{a} vs {oracle}");
    }

    #[test]
    fn large_radius_stays_finite() {
        let f = p(1.5, -1.5, 3.0, 2.0, 0.75);
        let m = PolarMarginals::new(&f).unwrap();
        for r in [43.0, 80.0, 120.0] {
            let v = m.r_density(r, &CTL).unwrap();
            assert!(v.is_finite() && v >= 0.0, "r={r}: {v}");
        }
        let b = PolarMarginals::new(&p(0.0, 0.0, 30.0, 1.0, 0.0)).unwrap();
        assert!(b.r_density(500.0, &CTL).unwrap().is_finite());
    }

    #[test]
    fn curves() {
        let m = PolarMarginals::new(&p(0.0, 0.0, 2.0, 2.0, 0.0)).unwrap();
        let curve = m.theta_curve(&uniform_thetas(3600)).unwrap();
        assert_eq!(curve.len(), 3600);
        assert!(curve.density().iter().all(|&d| d == 1.0 / TAU));
        assert!(m.theta_curve(&[]).unwrap().is_empty());
        assert!(m.r_curve(&[], &CTL).unwrap().is_empty());

        let f = PolarMarginals::new(&p(1.5, -1.5, 3.0, 2.0, 0.75)).unwrap();
        let rs = uniform_radii(200, 30.0);
        assert_eq!(f.r_curve(&rs, &CTL).unwrap(), f.r_curve_par(&rs, &CTL).unwrap());
        let ts = uniform_thetas(200);
        assert_eq!(f.theta_curve(&ts).unwrap(), f.theta_curve_par(&ts).unwrap());
    }

    #[test]
    fn auto_classification() {
        assert_eq!(PolarMarginals::new(&p(1.5, -1.5, 3.0, 2.0, 0.0)).unwrap().case(), CaseLabel::MeanAnisoDiagonal);
    }
}
