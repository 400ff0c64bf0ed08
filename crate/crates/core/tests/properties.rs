use std::f64::consts::{FRAC_PI_2, TAU};

use polar_marginals::quadrature::{simpson, simpson_periodic};
use polar_marginals::{
    bessel_i, classify, covariance, default_r_max, principal_frame, std_normal_cdf, uniform_radii, uniform_thetas,
    BesselOrder, BivariateNormalParams, CaseLabel, PolarMarginals, SeriesControl,
};
use proptest::prelude::*;

/// Covariance condition number up to 9: beyond that the default cap of
/// 200 series terms no longer reaches the far tail of the default radius.
fn params() -> impl Strategy<Value = BivariateNormalParams> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.3..4.0f64, 0.3..4.0f64, -0.9..0.9f64)
        .prop_map(|(mx, my, sx, sy, rho)| BivariateNormalParams::new(mx, my, sx, sy, rho).unwrap())
        .prop_filter("condition number <= 9", |p| {
            let f = principal_frame(p).unwrap();
            let ratio = f.sigma_x_t / f.sigma_y_t;
            ratio.max(1.0 / ratio) <= 3.0
        })
}

fn series_oracle(n: u32, x: f64) -> f64 {
    let half = x.abs() / 2.0;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / f64::from(j);
    }
    let mut sum = term;
    let mut k = 1.0;
    while term > sum * 1e-18 {
        term *= half * half / (k * (k + f64::from(n)));
        sum += term;
        k += 1.0;
    }
    if x < 0.0 && n % 2 == 1 {
        -sum
    } else {
        sum
    }
}

proptest! {
    #[test]
    fn cdf_symmetry(x in -30.0..30.0f64) {
        let sum = std_normal_cdf(x).unwrap() + std_normal_cdf(-x).unwrap();
        prop_assert!((sum - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn cdf_monotone(x in -10.0..10.0f64, dx in 1e-3..1.0f64) {
        prop_assert!(std_normal_cdf(x + dx).unwrap() >= std_normal_cdf(x).unwrap());
    }

    #[test]
    fn bessel_matches_series(n in 0u32..=60, x in -30.0..30.0f64) {
        let got = bessel_i(BesselOrder::new(n), x).unwrap();
        let want = series_oracle(n, x);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs(), "I_{}({}) = {} vs {}", n, x, got, want);
    }

    #[test]
    fn bessel_recurrence(n in 1u32..100, x in prop_oneof![-200.0..-0.01f64, 0.01..200.0f64]) {
        let i = |m: u32| bessel_i(BesselOrder::new(m), x).unwrap();
        let (below, at, above) = (i(n - 1), i(n), i(n + 1));
        let rhs = 2.0 * f64::from(n) / x * at;
        prop_assert!(((below - above) - rhs).abs() <= 1e-10 * below.abs().max(rhs.abs()));
    }

    #[test]
    fn theta_density_is_periodic_and_positive(p in params(), theta in -10.0..10.0f64) {
        let m = PolarMarginals::new(&p).unwrap();
        let v = m.theta_density(theta).unwrap();
        prop_assert!(v > 0.0);
        let w = m.theta_density(theta + TAU).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn r_density_is_non_negative(p in params(), r in 0.0..40.0f64) {
        let m = PolarMarginals::new(&p).unwrap();
        let ctl = SeriesControl::default();
        prop_assert!(m.r_density(r, &ctl).unwrap() >= 0.0);
        prop_assert_eq!(m.r_density(0.0, &ctl).unwrap(), 0.0);
    }

    #[test]
    fn axis_swap_symmetry(p in params(), r in 0.0..15.0f64, theta in -3.2..3.2f64) {
        let ctl = SeriesControl::default();
        let m = PolarMarginals::new(&p).unwrap();
        let s = PolarMarginals::new(&p.swap_axes()).unwrap();
        let (a, b) = (m.r_density(r, &ctl).unwrap(), s.r_density(r, &ctl).unwrap());
        prop_assert!((a - b).abs() <= 1e-10, "p(r): {} vs {}", a, b);
        let (a, b) = (m.theta_density(theta).unwrap(), s.theta_density(FRAC_PI_2 - theta).unwrap());
        prop_assert!((a - b).abs() <= 1e-10, "p(theta): {} vs {}", a, b);
    }

    #[test]
    fn general_case_agrees_with_specialized(p in params(), r in 0.0..15.0f64, theta in -3.2..3.2f64) {
        let ctl = SeriesControl::default();
        let auto = PolarMarginals::new(&p).unwrap();
        let general = PolarMarginals::with_case(&p, CaseLabel::MeanAnisoFull).unwrap();
        let (a, b) = (auto.r_density(r, &ctl).unwrap(), general.r_density(r, &ctl).unwrap());
        prop_assert!((a - b).abs() <= 1e-9);
        let (a, b) = (auto.theta_density(theta).unwrap(), general.theta_density(theta).unwrap());
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn classify_is_scale_and_swap_invariant(p in params(), scale in 0.01..100.0f64) {
        let scaled = BivariateNormalParams {
            mu_x: p.mu_x * scale,
            mu_y: p.mu_y * scale,
            sigma_x: p.sigma_x * scale,
            sigma_y: p.sigma_y * scale,
            rho: p.rho,
        };
        let label = classify(&p, 1e-12).unwrap();
        prop_assert_eq!(classify(&scaled, 1e-12).unwrap(), label);
        prop_assert_eq!(classify(&p.swap_axes(), 1e-12).unwrap(), label);
    }

    #[test]
    fn curves_match_pointwise_and_parallel(p in params()) {
        let ctl = SeriesControl::default();
        let m = PolarMarginals::new(&p).unwrap();
        let rs = uniform_radii(64, 12.0);
        let ts = uniform_thetas(64);
        let curve = m.r_curve(&rs, &ctl).unwrap();
        prop_assert_eq!(&curve, &m.r_curve_par(&rs, &ctl).unwrap());
        prop_assert_eq!(m.theta_curve(&ts).unwrap(), m.theta_curve_par(&ts).unwrap());
        for (r, d) in curve.iter() {
            prop_assert_eq!(d, m.r_density(r, &ctl).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn principal_frame_preserves_trace_and_determinant(
        sx in 0.01..100.0f64,
        sy in 0.01..100.0f64,
        rho in -0.999..0.999f64,
        mx in -50.0..50.0f64,
        my in -50.0..50.0f64,
    ) {
        let p = BivariateNormalParams::new(mx, my, sx, sy, rho).unwrap();
        let cov = covariance(&p).unwrap();
        let frame = principal_frame(&p).unwrap();
        let (vx, vy) = (frame.sigma_x_t.powi(2), frame.sigma_y_t.powi(2));
        let trace = cov.sxx + cov.syy;
        prop_assert!((vx + vy - trace).abs() <= 1e-12 * trace);
        prop_assert!((vx * vy - cov.det).abs() <= 1e-10 * cov.det);
        // rotation keeps the mean's length
        let norm = frame.mu_x_t.hypot(frame.mu_y_t);
        prop_assert!((norm - p.mean_norm()).abs() <= 1e-12 * p.mean_norm().max(1.0));
        let back = frame.recompose_covariance();
        let scale = cov.sxx.max(cov.syy);
        prop_assert!((back.sxx - cov.sxx).abs() <= 1e-10 * scale);
        prop_assert!((back.syy - cov.syy).abs() <= 1e-10 * scale);
        prop_assert!((back.sxy - cov.sxy).abs() <= 1e-10 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn marginals_are_normalized(p in params()) {
        let ctl = SeriesControl::default();
        let m = PolarMarginals::new(&p).unwrap();
        let n = 1440;
        let theta_mass = simpson_periodic(m.theta_curve(&uniform_thetas(n)).unwrap().density(), TAU / n as f64).unwrap();
        prop_assert!((theta_mass - 1.0).abs() <= 1e-6, "theta mass {}", theta_mass);
        let r_max = default_r_max(&p).unwrap();
        let rs = uniform_radii(1000, r_max);
        let r_mass = simpson(m.r_curve(&rs, &ctl).unwrap().density(), r_max / 1000.0).unwrap();
        prop_assert!((r_mass - 1.0).abs() <= 1e-4, "r mass {}", r_mass);
    }
}
