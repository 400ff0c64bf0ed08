//! Scalar special functions used by the closed-form marginals: the standard
//! normal pdf/cdf and modified Bessel functions of the first kind.
//!
//! `I_n` is evaluated by its power series for `|x| <= SERIES_CUTOFF`, by
//! Miller's backward recurrence normalised with `e^x = I_0 + 2 sum I_k`
//! above that, and by the Hankel expansion once `x` dwarfs the order.
//! Negative arguments use `I_n(-x) = (-1)^n I_n(x)`, applied as a final
//! sign flip so the parity holds bit for bit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// 1/sqrt(2*pi)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Largest |x| for which the power series is used.
pub const SERIES_CUTOFF: f64 = 15.0;

/// Unscaled `I_n(x)` is guaranteed representable below this magnitude.
/// Larger arguments may still succeed for high orders; otherwise
/// [`bessel_i`] reports [`Error::BesselOverflow`].
pub const BESSEL_I_MAX_ARG: f64 = 700.0;

const HANKEL_MIN_ARG: f64 = 1000.0;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Non-negative integer order of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BesselOrder(u32);

impl BesselOrder {
    pub const ZERO: BesselOrder = BesselOrder(0);

    pub const fn new(n: u32) -> Self {
        BesselOrder(n)
    }

    pub const fn get(self) -> u32 {
        self.0
    }

    fn is_odd(self) -> bool {
        self.0 % 2 == 1
    }
}

impl From<u32> for BesselOrder {
    fn from(n: u32) -> Self {
        BesselOrder(n)
    }
}

fn check_finite(function: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteArgument { function, value: x })
    }
}

/// Standard normal density `exp(-x^2/2)/sqrt(2 pi)`.
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    check_finite("std_normal_pdf", x)?;
    Ok(normal_pdf(x))
}

/// Standard normal distribution function, via `erfc` so both tails keep
/// full relative accuracy.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    check_finite("std_normal_cdf", x)?;
    Ok(normal_cdf(x))
}

#[inline]
pub(crate) fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Modified Bessel function of the first kind, `I_n(x)`.
///
/// Accurate to ~1e-15 relative over `|x| <= 30`. Fails with
/// [`Error::BesselOverflow`] when the result exceeds `f64::MAX`; callers
/// that only need products like `exp(-a) I_n(x)` should use
/// [`bessel_i_scaled`].
pub fn bessel_i(n: BesselOrder, x: f64) -> Result<f64> {
    check_finite("bessel_i", x)?;
    let ax = x.abs();
    let magnitude = if ax <= SERIES_CUTOFF {
        series(n.get(), ax)
    } else {
        let scaled = scaled_positive(n.get(), ax);
        if ax < BESSEL_I_MAX_ARG {
            scaled * ax.exp()
        } else if scaled > 0.0 {
            (scaled.ln() + ax).exp()
        } else {
            0.0
        }
    };
    if magnitude.is_infinite() {
        return Err(Error::BesselOverflow { order: n.get(), x });
    }
    Ok(apply_parity(n, x, magnitude))
}

/// Exponentially scaled modified Bessel function, `exp(-|x|) I_n(x)`.
/// Finite for every finite `x`.
pub fn bessel_i_scaled(n: BesselOrder, x: f64) -> Result<f64> {
    check_finite("bessel_i_scaled", x)?;
    let ax = x.abs();
    let magnitude = if ax <= SERIES_CUTOFF {
        series(n.get(), ax) * (-ax).exp()
    } else {
        scaled_positive(n.get(), ax)
    };
    Ok(apply_parity(n, x, magnitude))
}

/// Fills `out[k] = exp(-|x|) I_k(x)` for `k = 0..out.len()` with a single
/// backward recurrence. Much cheaper than calling [`bessel_i_scaled`] per
/// order when a whole run of orders is needed.
pub fn bessel_i_scaled_orders(x: f64, out: &mut [f64]) -> Result<()> {
    check_finite("bessel_i_scaled_orders", x)?;
    scaled_orders(x, out);
    Ok(())
}

/// Unchecked core of [`bessel_i_scaled_orders`]; `x` must be finite.
pub(crate) fn scaled_orders(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let ax = x.abs();
    if ax == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let n_max = out.len() - 1;
    let start = miller_start(n_max, ax);
    let two_over_x = 2.0 / ax;
    out.fill(0.0);

    let mut upper = 0.0; // I_{k+1}
    let mut current = 1.0; // I_k, arbitrary normalisation
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = current;
        }
        sum += 2.0 * current;
        let lower = k as f64 * two_over_x * current + upper;
        upper = current;
        current = lower;
        if current > RESCALE_ABOVE {
            current *= RESCALE_BY;
            upper *= RESCALE_BY;
            sum *= RESCALE_BY;
            for v in out.iter_mut().skip(k) {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = current;
    sum += current;
    let negative = x < 0.0;
    for (k, v) in out.iter_mut().enumerate() {
        *v /= sum;
        if negative && k % 2 == 1 {
            *v = -*v;
        }
    }
}

fn apply_parity(n: BesselOrder, x: f64, magnitude: f64) -> f64 {
    if x < 0.0 && n.is_odd() {
        -magnitude
    } else {
        magnitude
    }
}

/// Power series `sum_k (x/2)^(n+2k) / (k! (n+k)!)` for `x >= 0`.
fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for j in 1..=n {
        lead *= half / f64::from(j);
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let nf = f64::from(n);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nf + k));
        sum += term;
        if term <= f64::EPSILON * 0.25 * sum {
            break;
        }
        k += 1.0;
    }
    lead * sum
}

/// Scaled `I_n(x)` for `x > SERIES_CUTOFF`.
fn scaled_positive(n: u32, x: f64) -> f64 {
    if x > HANKEL_MIN_ARG && f64::from(n) * f64::from(n) <= x {
        hankel_scaled(n, x)
    } else {
        miller_single(n as usize, x)
    }
}

/// Starting order for the backward recurrence. Far enough above both the
/// requested order and the bulk of `sum I_k` that the start error is
/// below double precision by the time it reaches `n_max` or `k = 0`.
fn miller_start(n_max: usize, x: f64) -> usize {
    n_max + 20 + (10.0 * x.sqrt()).ceil() as usize
}

fn miller_single(n: usize, x: f64) -> f64 {
    let start = miller_start(n, x);
    let two_over_x = 2.0 / x;
    let mut upper = 0.0;
    let mut current = 1.0;
    let mut sum = 0.0;
    let mut at_n = 0.0;
    for k in (1..=start).rev() {
        if k == n {
            at_n = current;
        }
        sum += 2.0 * current;
        let lower = k as f64 * two_over_x * current + upper;
        upper = current;
        current = lower;
        if current > RESCALE_ABOVE {
            current *= RESCALE_BY;
            upper *= RESCALE_BY;
            sum *= RESCALE_BY;
            at_n *= RESCALE_BY;
        }
    }
    if n == 0 {
        at_n = current;
    }
    sum += current;
    at_n / sum
}

/// Large-argument expansion
/// `e^-x I_n(x) ~ (2 pi x)^-1/2 sum_k (-1)^k prod_{j<=k} (4n^2 - (2j-1)^2) / (k! (8x)^k)`.
fn hankel_scaled(n: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(n) * f64::from(n);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}
