//! Composite Simpson rules on uniform samples.

use crate::error::{Error, Result};

/// Composite Simpson over `values` sampled at spacing `h` on a closed
/// interval. Needs an odd number of samples (an even number of panels).
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidGrid { reason: format!("simpson needs an odd sample count >= 3, got {n}") });
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &v) in values[1..n - 1].iter().enumerate() {
        if i % 2 == 0 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even))
}

/// Simpson over one full period of a periodic function sampled at `n`
/// points `x_0 + j h` (the endpoint repeats `x_0` and is omitted). Odd
/// samples weigh `4h/3` and even ones `2h/3`, so `n` must be even.
pub fn simpson_periodic(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid {
            reason: format!("periodic simpson needs an even sample count >= 2, got {n}"),
        });
    }
    let (mut even, mut odd) = (0.0, 0.0);
    for pair in values.chunks_exact(2) {
        even += pair[0];
        odd += pair[1];
    }
    Ok(h / 3.0 * (2.0 * even + 4.0 * odd))
}

/// Simpson of `f` on `[a, b]` with `panels` (even) panels.
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> Result<f64> {
    let non_empty = b > a;
    if panels < 2 || !panels.is_multiple_of(2) || !non_empty {
        return Err(Error::InvalidGrid {
            reason: format!("need an even panel count >= 2 on a non-empty interval, got {panels} on [{a}, {b}]"),
        });
    }
    let h = (b - a) / panels as f64;
    let values: Vec<f64> = (0..=panels).map(|i| f(a + i as f64 * h)).collect();
    simpson(&values, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn exact_for_cubics() {
        let v = simpson_fn(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_trig() {
        let n = 64;
        let h = TAU / n as f64;
        let values: Vec<f64> = (0..n).map(|j| (-PI + j as f64 * h).cos().powi(2)).collect();
        assert!((simpson_periodic(&values, h).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn bad_counts() {
        assert!(simpson(&[1.0, 2.0], 1.0).is_err());
        assert!(simpson_periodic(&[1.0, 2.0, 3.0], 1.0).is_err());
        assert!(simpson_fn(|x| x, 0.0, 1.0, 3).is_err());
        assert!(simpson_fn(|x| x, 1.0, 1.0, 2).is_err());
    }
}
