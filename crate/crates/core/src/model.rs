//! Bivariate normal parameters, covariance, case classification and the
//! principal-axis frame.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Default relative tolerance for [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-12;

/// Means, standard deviations and correlation of a bivariate normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateNormalParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

impl BivariateNormalParams {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64, rho: f64) -> Result<Self> {
        let params = BivariateNormalParams { mu_x, mu_y, sigma_x, sigma_y, rho };
        params.validate()?;
        Ok(params)
    }

    /// Zero-mean, unit-variance, uncorrelated.
    pub fn standard() -> Self {
        BivariateNormalParams { mu_x: 0.0, mu_y: 0.0, sigma_x: 1.0, sigma_y: 1.0, rho: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("mu_x", self.mu_x),
            ("mu_y", self.mu_y),
            ("sigma_x", self.sigma_x),
            ("sigma_y", self.sigma_y),
            ("rho", self.rho),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name, value });
            }
        }
        if self.sigma_x <= 0.0 {
            return Err(Error::NonPositiveSigma { name: "sigma_x", value: self.sigma_x });
        }
        if self.sigma_y <= 0.0 {
            return Err(Error::NonPositiveSigma { name: "sigma_y", value: self.sigma_y });
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::CorrelationOutOfRange { rho: self.rho });
        }
        Ok(())
    }

    /// Reflection across the line y = x.
    pub fn swap_axes(&self) -> Self {
        BivariateNormalParams {
            mu_x: self.mu_y,
            mu_y: self.mu_x,
            sigma_x: self.sigma_y,
            sigma_y: self.sigma_x,
            rho: self.rho,
        }
    }

    pub fn with_zero_mean(&self) -> Self {
        BivariateNormalParams { mu_x: 0.0, mu_y: 0.0, ..*self }
    }

    /// Distance of the mean from the origin.
    pub fn mean_norm(&self) -> f64 {
        self.mu_x.hypot(self.mu_y)
    }
}

/// The six specialisations, from most to least specialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    /// (a) zero mean, isotropic: Rayleigh in r, uniform in theta.
    ZeroMeanIsotropic,
    /// (b) zero mean, anisotropic, diagonal covariance.
    ZeroMeanAnisoDiagonal,
    /// (c) zero mean, anisotropic, correlated.
    ZeroMeanAnisoFull,
    /// (d) offset mean, isotropic: Rician in r.
    MeanIsotropic,
    /// (e) offset mean, anisotropic, diagonal covariance.
    MeanAnisoDiagonal,
    /// (f) offset mean, anisotropic, correlated.
    MeanAnisoFull,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 6] = [
        CaseLabel::ZeroMeanIsotropic,
        CaseLabel::ZeroMeanAnisoDiagonal,
        CaseLabel::ZeroMeanAnisoFull,
        CaseLabel::MeanIsotropic,
        CaseLabel::MeanAnisoDiagonal,
        CaseLabel::MeanAnisoFull,
    ];

    pub fn letter(self) -> char {
        match self {
            CaseLabel::ZeroMeanIsotropic => 'a',
            CaseLabel::ZeroMeanAnisoDiagonal => 'b',
            CaseLabel::ZeroMeanAnisoFull => 'c',
            CaseLabel::MeanIsotropic => 'd',
            CaseLabel::MeanAnisoDiagonal => 'e',
            CaseLabel::MeanAnisoFull => 'f',
        }
    }

    pub fn from_letter(c: char) -> Option<CaseLabel> {
        CaseLabel::ALL.into_iter().find(|case| case.letter() == c.to_ascii_lowercase())
    }

    pub fn description(self) -> &'static str {
        match self {
            CaseLabel::ZeroMeanIsotropic => "zero-mean, isotropic",
            CaseLabel::ZeroMeanAnisoDiagonal => "zero-mean, anisotropic, diagonal",
            CaseLabel::ZeroMeanAnisoFull => "zero-mean, anisotropic, non-diagonal",
            CaseLabel::MeanIsotropic => "non-zero-mean, isotropic",
            CaseLabel::MeanAnisoDiagonal => "non-zero-mean, anisotropic, diagonal",
            CaseLabel::MeanAnisoFull => "non-zero-mean, anisotropic, non-diagonal",
        }
    }

    pub fn is_zero_mean(self) -> bool {
        matches!(
            self,
            CaseLabel::ZeroMeanIsotropic | CaseLabel::ZeroMeanAnisoDiagonal | CaseLabel::ZeroMeanAnisoFull
        )
    }

    /// Whether this case's closed forms are valid for parameters that
    /// classify as `detected`. A case applies to any parameters satisfying
    /// its own assumptions, so e.g. (f) applies everywhere and (b) applies
    /// to isotropic zero-mean inputs.
    pub fn admits(self, detected: CaseLabel) -> bool {
        let zero_mean = detected.is_zero_mean();
        let isotropic = matches!(detected, CaseLabel::ZeroMeanIsotropic | CaseLabel::MeanIsotropic);
        let diagonal = isotropic
            || matches!(detected, CaseLabel::ZeroMeanAnisoDiagonal | CaseLabel::MeanAnisoDiagonal);
        match self {
            CaseLabel::ZeroMeanIsotropic => zero_mean && isotropic,
            CaseLabel::ZeroMeanAnisoDiagonal => zero_mean && diagonal,
            CaseLabel::ZeroMeanAnisoFull => zero_mean,
            CaseLabel::MeanIsotropic => isotropic,
            CaseLabel::MeanAnisoDiagonal => diagonal,
            CaseLabel::MeanAnisoFull => true,
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.letter(), self.description())
    }
}

/// Covariance entries and determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub sxx: f64,
    pub sxy: f64,
    pub syy: f64,
    pub det: f64,
}

pub fn covariance(params: &BivariateNormalParams) -> Result<CovarianceMatrix> {
    params.validate()?;
    let (sx, sy, rho) = (params.sigma_x, params.sigma_y, params.rho);
    let sxx = sx * sx;
    let syy = sy * sy;
    Ok(CovarianceMatrix {
        sxx,
        sxy: rho * sx * sy,
        syy,
        det: sxx * syy * (1.0 - rho * rho),
    })
}

/// Density of the bivariate normal at `(x, y)`.
pub fn eval_pdf(params: &BivariateNormalParams, x: f64, y: f64) -> Result<f64> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::NonFiniteArgument { function: "eval_pdf", value: x });
    }
    if !y.is_finite() {
        return Err(Error::NonFiniteArgument { function: "eval_pdf", value: y });
    }
    Ok(Density::new(params).eval(x, y))
}

/// Pre-computed constants of the expanded density, for hot loops over
/// already validated parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Density {
    mu_x: f64,
    mu_y: f64,
    norm: f64,
    inv_sx2: f64,
    inv_sy2: f64,
    cross: f64,
    scale: f64,
}

impl Density {
    pub(crate) fn new(params: &BivariateNormalParams) -> Self {
        let (sx, sy, rho) = (params.sigma_x, params.sigma_y, params.rho);
        let one_minus = 1.0 - rho * rho;
        Density {
            mu_x: params.mu_x,
            mu_y: params.mu_y,
            norm: 1.0 / (2.0 * PI * sx * sy * one_minus.sqrt()),
            inv_sx2: 1.0 / (sx * sx),
            inv_sy2: 1.0 / (sy * sy),
            cross: 2.0 * rho / (sx * sy),
            scale: 1.0 / (2.0 * one_minus),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.mu_x;
        let dy = y - self.mu_y;
        let q = dx * dx * self.inv_sx2 + dy * dy * self.inv_sy2 - self.cross * dx * dy;
        self.norm * (-self.scale * q).exp()
    }
}

/// Picks the most specialised case whose assumptions hold within `tol`
/// (relative to the larger sigma).
pub fn classify(params: &BivariateNormalParams, tol: f64) -> Result<CaseLabel> {
    params.validate()?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::NegativeTolerance { tol });
    }
    let scale = params.sigma_x.max(params.sigma_y);
    let zero_mean = params.mu_x.abs().max(params.mu_y.abs()) <= tol * scale;
    let diagonal = params.rho.abs() <= tol;
    let isotropic = diagonal && (params.sigma_x - params.sigma_y).abs() <= tol * scale;
    Ok(match (zero_mean, isotropic, diagonal) {
        (true, true, _) => CaseLabel::ZeroMeanIsotropic,
        (true, false, true) => CaseLabel::ZeroMeanAnisoDiagonal,
        (true, false, false) => CaseLabel::ZeroMeanAnisoFull,
        (false, true, _) => CaseLabel::MeanIsotropic,
        (false, false, true) => CaseLabel::MeanAnisoDiagonal,
        (false, false, false) => CaseLabel::MeanAnisoFull,
    })
}

/// Mean and standard deviations in the frame rotated by `omega`, where the
/// covariance is diagonal and `sigma_x_t` is the major axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalFrame {
    pub mu_x_t: f64,
    pub mu_y_t: f64,
    pub sigma_x_t: f64,
    pub sigma_y_t: f64,
    pub omega: f64,
}

impl PrincipalFrame {
    /// Parameters of the same distribution expressed in the rotated frame.
    pub fn as_params(&self) -> BivariateNormalParams {
        BivariateNormalParams {
            mu_x: self.mu_x_t,
            mu_y: self.mu_y_t,
            sigma_x: self.sigma_x_t,
            sigma_y: self.sigma_y_t,
            rho: 0.0,
        }
    }

    /// Rotates the diagonal covariance back by `-omega`.
    pub fn recompose_covariance(&self) -> CovarianceMatrix {
        let (s, c) = self.omega.sin_cos();
        let l1 = self.sigma_x_t * self.sigma_x_t;
        let l2 = self.sigma_y_t * self.sigma_y_t;
        CovarianceMatrix {
            sxx: l1 * c * c + l2 * s * s,
            sxy: (l1 - l2) * s * c,
            syy: l1 * s * s + l2 * c * c,
            det: l1 * l2,
        }
    }
}

/// Rotation angle `omega = atan2(2 rho sx sy, sx^2 - sy^2) / 2` with the
/// covariance eigenvalues as principal variances. `omega = 0` for the
/// isotropic case where the angle is undefined.
pub fn principal_frame(params: &BivariateNormalParams) -> Result<PrincipalFrame> {
    let cov = covariance(params)?;
    let omega = 0.5 * (2.0 * cov.sxy).atan2(cov.sxx - cov.syy);
    let half_trace = 0.5 * (cov.sxx + cov.syy);
    // sqrt((sxx+syy)^2/4 - det), rewritten without the cancellation.
    let radius = (0.5 * (cov.sxx - cov.syy)).hypot(cov.sxy);
    let major = half_trace + radius;
    let minor = cov.det / major;
    let (s, c) = omega.sin_cos();
    Ok(PrincipalFrame {
        mu_x_t: params.mu_x * c + params.mu_y * s,
        mu_y_t: -params.mu_x * s + params.mu_y * c,
        sigma_x_t: major.sqrt(),
        sigma_y_t: minor.sqrt(),
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mx: f64, my: f64, sx: f64, sy: f64, rho: f64) -> BivariateNormalParams {
        BivariateNormalParams::new(mx, my, sx, sy, rho).unwrap()
    }

    #[test]
    fn validation() {
        assert!(BivariateNormalParams::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(BivariateNormalParams::new(0.0, 0.0, 1.0, -1.0, 0.0).is_err());
        assert!(matches!(
            BivariateNormalParams::new(0.0, 0.0, 1.0, 1.0, 1.0),
            Err(Error::CorrelationOutOfRange { .. })
        ));
        assert!(BivariateNormalParams::new(0.0, 0.0, 1.0, 1.0, -1.0).is_err());
        assert!(BivariateNormalParams::new(f64::NAN, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(BivariateNormalParams::new(0.0, 0.0, 1.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn pdf_examples() {
        let peak = eval_pdf(&BivariateNormalParams::standard(), 0.0, 0.0).unwrap();
        assert!((peak - 0.159_154_943_091_895_34).abs() < 1e-16);
        let f = p(1.5, -1.5, 3.0, 2.0, 0.75);
        // 1 / (2 pi * 3 * 2 * sqrt(1 - 0.75^2))
        let expected = 1.0 / (2.0 * PI * 6.0 * (1.0f64 - 0.5625).sqrt());
        assert!((eval_pdf(&f, 1.5, -1.5).unwrap() - expected).abs() < 1e-16);
        assert!((expected - 0.040_103).abs() < 1e-6);
        let swapped = f.swap_axes();
        for (x, y) in [(0.3, -2.0), (4.0, 1.0), (-1.0, -1.0)] {
            let a = eval_pdf(&f, x, y).unwrap();
            let b = eval_pdf(&swapped, y, x).unwrap();
            assert!((a - b).abs() <= 1e-16 * a.max(1.0));
        }
        assert!(eval_pdf(&f, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn covariance_examples() {
        let c = covariance(&p(0.0, 0.0, 3.0, 2.0, 0.75)).unwrap();
        assert_eq!((c.sxx, c.syy, c.sxy), (9.0, 4.0, 4.5));
        assert!((c.det - 15.75).abs() < 1e-13);
        assert!((c.det - (c.sxx * c.syy - c.sxy * c.sxy)).abs() <= 1e-14 * c.det);
        let id = covariance(&BivariateNormalParams::standard()).unwrap();
        assert_eq!((id.sxx, id.sxy, id.syy, id.det), (1.0, 0.0, 1.0, 1.0));
        let iso = covariance(&p(0.0, 0.0, 2.0, 2.0, 0.0)).unwrap();
        assert_eq!((iso.sxx, iso.sxy, iso.syy, iso.det), (4.0, 0.0, 4.0, 16.0));
    }

    #[test]
    fn classify_examples() {
        let t = DEFAULT_CLASSIFY_TOL;
        assert_eq!(classify(&p(0.0, 0.0, 2.0, 2.0, 0.0), t).unwrap(), CaseLabel::ZeroMeanIsotropic);
        assert_eq!(classify(&p(0.0, 0.0, 3.0, 2.0, 0.0), t).unwrap(), CaseLabel::ZeroMeanAnisoDiagonal);
        assert_eq!(classify(&p(0.0, 0.0, 3.0, 2.0, 0.75), t).unwrap(), CaseLabel::ZeroMeanAnisoFull);
        assert_eq!(classify(&p(1.5, -1.5, 2.0, 2.0, 0.0), t).unwrap(), CaseLabel::MeanIsotropic);
        assert_eq!(classify(&p(1.5, -1.5, 3.0, 2.0, 0.0), t).unwrap(), CaseLabel::MeanAnisoDiagonal);
        assert_eq!(classify(&p(1.5, -1.5, 3.0, 2.0, 0.75), t).unwrap(), CaseLabel::MeanAnisoFull);
        // equal sigmas but correlated is not isotropic
        assert_eq!(classify(&p(0.0, 0.0, 2.0, 2.0, 0.3), t).unwrap(), CaseLabel::ZeroMeanAnisoFull);
        assert!(classify(&p(0.0, 0.0, 2.0, 2.0, 0.0), -1.0).is_err());
        assert!(classify(&p(0.0, 0.0, 2.0, 2.0, 0.0), f64::NAN).is_err());
    }

    #[test]
    fn classify_tolerance_is_relative() {
        let near = p(1e-9, 0.0, 1000.0, 1000.0 + 1e-10, 1e-13);
        assert_eq!(classify(&near, 1e-12).unwrap(), CaseLabel::ZeroMeanIsotropic);
        assert_eq!(classify(&near, 0.0).unwrap(), CaseLabel::MeanAnisoFull);
    }

    #[test]
    fn admits_follows_assumptions() {
        use CaseLabel::*;
        assert!(MeanAnisoFull.admits(ZeroMeanIsotropic));
        assert!(ZeroMeanAnisoDiagonal.admits(ZeroMeanIsotropic));
        assert!(ZeroMeanAnisoFull.admits(ZeroMeanAnisoDiagonal));
        assert!(MeanIsotropic.admits(ZeroMeanIsotropic));
        assert!(MeanAnisoDiagonal.admits(MeanIsotropic));
        assert!(!ZeroMeanIsotropic.admits(MeanIsotropic));
        assert!(!MeanIsotropic.admits(ZeroMeanAnisoDiagonal));
        assert!(!MeanAnisoDiagonal.admits(ZeroMeanAnisoFull));
        for case in CaseLabel::ALL {
            assert!(case.admits(case));
            assert_eq!(CaseLabel::from_letter(case.letter()), Some(case));
        }
    }

    #[test]
    fn principal_frame_example() {
        let frame = principal_frame(&p(1.5, -1.5, 3.0, 2.0, 0.75)).unwrap();
        // Frozen from a numpy.linalg.eigh oracle of [[9, 4.5], [4.5, 4]].
        assert!((frame.omega - 0.531_848_911_201_279_9).abs() < 1e-12);
        assert!((frame.sigma_x_t.powi(2) - 11.647_815_070_493_5).abs() < 1e-10);
        assert!((frame.sigma_y_t.powi(2) - 1.352_184_929_506_5).abs() < 1e-10);
        assert!((frame.mu_x_t - 0.532_114_770_257_827).abs() < 1e-10);
        assert!((frame.mu_y_t - (-2.053_497_959_890_26)).abs() < 1e-10);
    }

    #[test]
    fn principal_frame_degenerate_cases() {
        let aligned = p(0.4, -0.2, 3.0, 2.0, 0.0);
        let frame = principal_frame(&aligned).unwrap();
        assert_eq!(frame.omega, 0.0);
        assert_eq!(frame.as_params(), aligned);

        let iso = p(1.0, 2.0, 1.5, 1.5, 0.0);
        let frame = principal_frame(&iso).unwrap();
        assert_eq!(frame.omega, 0.0);
        assert_eq!((frame.sigma_x_t, frame.sigma_y_t), (1.5, 1.5));
    }

    #[test]
    fn principal_frame_picks_major_axis_when_sigma_y_larger() {
        let frame = principal_frame(&p(0.0, 1.0, 1.0, 3.0, 0.0)).unwrap();
        assert!((frame.omega - PI / 2.0).abs() < 1e-15);
        assert!((frame.sigma_x_t - 3.0).abs() < 1e-15);
        assert!((frame.sigma_y_t - 1.0).abs() < 1e-15);
        assert!((frame.mu_x_t - 1.0).abs() < 1e-15);
    }
}
