//! Timing of the closed forms against the quadrature oracle.
//!
//! Every case is timed on its own canonical parameter set, and the numeric
//! method on the general one. Times are medians over repeats after warmup
//! runs, and speeds are reported relative to the general analytic case.
//! Everything runs on the calling thread.

use std::collections::hash_map::DefaultHasher;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::hint::black_box;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::marginals::{uniform_radii, uniform_thetas, DensityCurve, PolarMarginals, SeriesControl};
use crate::model::{BivariateNormalParams, CaseLabel};
use crate::numeric::{default_r_max, numeric_r_curve, numeric_theta_curve};

pub const DEFAULT_N_SAMPLES: usize = 1000;
pub const DEFAULT_REPEATS: usize = 11;
pub const DEFAULT_WARMUP: usize = 2;
/// Radii are sampled on [0, BENCH_R_MAX].
pub const BENCH_R_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic(CaseLabel),
    Numeric,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Analytic(case) => write!(f, "{}", case.letter()),
            Method::Numeric => f.write_str("numeric"),
        }
    }
}

/// Which variable is integrated out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marginal {
    /// `p(theta)`.
    OverRadius,
    /// `p(r)`.
    OverAngle,
}

impl Marginal {
    pub fn label(self) -> &'static str {
        match self {
            Marginal::OverRadius => "p(theta)",
            Marginal::OverAngle => "p(r)",
        }
    }
}

/// The parameter set each case is timed (and tested) on.
pub fn canonical_params(case: CaseLabel) -> BivariateNormalParams {
    let (mx, my, sx, sy, rho) = match case {
        CaseLabel::ZeroMeanIsotropic => (0.0, 0.0, 2.0, 2.0, 0.0),
        CaseLabel::ZeroMeanAnisoDiagonal => (0.0, 0.0, 3.0, 2.0, 0.0),
        CaseLabel::ZeroMeanAnisoFull => (0.0, 0.0, 3.0, 2.0, 0.75),
        CaseLabel::MeanIsotropic => (1.5, -1.5, 2.0, 2.0, 0.0),
        CaseLabel::MeanAnisoDiagonal => (1.5, -1.5, 3.0, 2.0, 0.0),
        CaseLabel::MeanAnisoFull => (1.5, -1.5, 3.0, 2.0, 0.75),
    };
    BivariateNormalParams { mu_x: mx, mu_y: my, sigma_x: sx, sigma_y: sy, rho }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchResult {
    pub method: Method,
    pub marginal: Marginal,
    /// Seconds per curve of `n_samples` points.
    pub median_time: f64,
    /// Median time of analytic case (f) for the same marginal divided by
    /// this median time.
    pub relative_speed: f64,
    /// Hash of the density values produced while timing.
    pub fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub n_samples: usize,
    pub repeats: usize,
    pub warmup: usize,
    pub results: Vec<BenchResult>,
    /// Smallest observed clock tick, in seconds.
    pub timer_resolution: f64,
    /// Set when the clock tick exceeds 1% of the fastest median.
    pub resolution_warning: Option<String>,
}

impl BenchReport {
    pub fn get(&self, method: Method, marginal: Marginal) -> Option<&BenchResult> {
        self.results.iter().find(|r| r.method == method && r.marginal == marginal)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,marginal,median_seconds,relative_speed\n");
        for r in &self.results {
            let _ = writeln!(out, "{},{},{},{}", r.method, r.marginal.label(), r.median_time, r.relative_speed);
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8} {:<9} {:>16} {:>15}\n", "case", "marginal", "median_seconds", "relative_speed");
        for r in &self.results {
            let _ = writeln!(
                out,
                "{:<8} {:<9} {:>16.6e} {:>15.3}",
                r.method.to_string(),
                r.marginal.label(),
                r.median_time,
                r.relative_speed
            );
        }
        if let Some(warning) = &self.resolution_warning {
            let _ = writeln!(out, "warning: {warning}");
        }
        out
    }
}

/// All methods in report order: the six cases, then numeric.
pub fn methods() -> Vec<Method> {
    CaseLabel::ALL.iter().map(|&c| Method::Analytic(c)).chain([Method::Numeric]).collect()
}

/// Computes the curve that [`run_benchmark`] times for `method` and
/// `marginal`, outside any timing loop.
pub fn bench_curve(method: Method, marginal: Marginal, n_samples: usize) -> Result<DensityCurve> {
    let ctl = SeriesControl::default();
    let thetas = uniform_thetas(n_samples);
    let rs = uniform_radii(n_samples - 1, BENCH_R_MAX);
    match method {
        Method::Analytic(case) => {
            let m = PolarMarginals::with_case(&canonical_params(case), case)?;
            match marginal {
                Marginal::OverRadius => m.theta_curve(&thetas),
                Marginal::OverAngle => m.r_curve(&rs, &ctl),
            }
        }
        Method::Numeric => {
            let params = canonical_params(CaseLabel::MeanAnisoFull);
            // quadrature resolution matches the number of output samples
            let n = n_samples + n_samples % 2;
            match marginal {
                Marginal::OverRadius => numeric_theta_curve(&params, &thetas, default_r_max(&params)?, n, false),
                Marginal::OverAngle => numeric_r_curve(&params, &rs, n, false),
            }
        }
    }
}

pub fn fingerprint(curve: &DensityCurve) -> u64 {
    let mut h = DefaultHasher::new();
    for (x, y) in curve.iter() {
        x.to_bits().hash(&mut h);
        y.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Times every method for both marginals.
///
/// Requires `n_samples >= 100`, `repeats >= 5` and `warmup >= 1`.
pub fn run_benchmark(n_samples: usize, repeats: usize, warmup: usize) -> Result<BenchReport> {
    if n_samples < 100 || repeats < 5 || warmup < 1 {
        return Err(Error::InvalidBenchConfig {
            reason: format!(
                "need n_samples >= 100, repeats >= 5, warmup >= 1; got {n_samples}, {repeats}, {warmup}"
            ),
        });
    }
    let mut results = Vec::new();
    for marginal in [Marginal::OverRadius, Marginal::OverAngle] {
        for method in methods() {
            let (median_time, fingerprint) = time_curve(method, marginal, n_samples, repeats, warmup)?;
            results.push(BenchResult { method, marginal, median_time, relative_speed: 0.0, fingerprint });
        }
    }
    for marginal in [Marginal::OverRadius, Marginal::OverAngle] {
        let reference = results
            .iter()
            .find(|r| r.marginal == marginal && r.method == Method::Analytic(CaseLabel::MeanAnisoFull))
            .map(|r| r.median_time)
            .expect("general case is always timed");
        for r in results.iter_mut().filter(|r| r.marginal == marginal) {
            r.relative_speed = reference / r.median_time;
        }
    }

    let timer_resolution = timer_resolution();
    let fastest = results.iter().map(|r| r.median_time).fold(f64::INFINITY, f64::min);
    let resolution_warning = (timer_resolution > 0.01 * fastest).then(|| {
        format!(
            "timer resolution {timer_resolution:.3e} s exceeds 1% of the fastest median {fastest:.3e} s; \
             increase n_samples for meaningful ratios"
        )
    });
    Ok(BenchReport { n_samples, repeats, warmup, results, timer_resolution, resolution_warning })
}

fn time_curve(method: Method, marginal: Marginal, n: usize, repeats: usize, warmup: usize) -> Result<(f64, u64)> {
    for _ in 0..warmup {
        black_box(bench_curve(method, marginal, n)?);
    }
    let mut times = Vec::with_capacity(repeats);
    let mut print = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let curve = black_box(bench_curve(method, marginal, n)?);
        times.push(start.elapsed());
        let fp = fingerprint(&curve);
        if *print.get_or_insert(fp) != fp {
            return Err(Error::InvalidBenchConfig { reason: format!("{method} {} is not deterministic", marginal.label()) });
        }
    }
    times.sort();
    // a zero reading would make the ratios meaningless; one tick is the floor
    let median = median(&times).max(Duration::from_nanos(1));
    Ok((median.as_secs_f64(), print.unwrap_or_default()))
}

fn median(sorted: &[Duration]) -> Duration {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

/// Smallest nonzero difference between consecutive clock readings.
fn timer_resolution() -> f64 {
    let mut best = Duration::MAX;
    for _ in 0..200 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best.as_secs_f64()
}
