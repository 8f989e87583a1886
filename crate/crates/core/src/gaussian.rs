//! Standard normal density, distribution function and truncated-normal means.
//!
//! The distribution function is evaluated through `erfc` so both tails keep
//! full relative accuracy. Conditional means far in the upper tail switch to a
//! continued fraction for the Mills ratio instead of dividing two underflowing
//! quantities.

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// 1/√(2π)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standardized deficit below which the Mills-ratio continued fraction is used.
const TAIL_SWITCH: f64 = -6.0;

const CF_MAX_TERMS: usize = 10_000;

/// Density, distribution function and argument bundled together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdNormalEval {
    pub z: f64,
    pub pdf: f64,
    pub cdf: f64,
}

impl StdNormalEval {
    pub fn at(z: f64) -> Result<Self> {
        Ok(Self {
            z,
            pdf: std_pdf(z)?,
            cdf: std_cdf(z)?,
        })
    }
}

/// φ(z) = e^(−z²/2)/√(2π)
pub fn std_pdf(z: f64) -> Result<f64> {
    let z = ensure_finite("z", z)?;
    Ok(FRAC_1_SQRT_2PI * (-0.5 * z * z).exp())
}

/// Φ(z), the standard normal distribution function.
pub fn std_cdf(z: f64) -> Result<f64> {
    let z = ensure_finite("z", z)?;
    Ok(0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2))
}

/// 1 − Φ(z), computed without cancellation.
pub fn std_sf(z: f64) -> Result<f64> {
    let z = ensure_finite("z", z)?;
    Ok(0.5 * libm::erfc(z * std::f64::consts::FRAC_1_SQRT_2))
}

/// `1/(x + 2/(x + 3/(x + ...)))` by modified Lentz. Equals the reciprocal Mills
/// ratio minus `x`, i.e. `φ(x)/(1−Φ(x)) − x`. Valid for `x > 0`.
fn mills_excess(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..=CF_MAX_TERMS {
        let a = j as f64;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    f
}

/// φ(a)/Φ(a), the inverse Mills ratio for truncation from below.
///
/// Returns 0 for `a = +∞`. Finite for every finite `a`.
pub fn inverse_mills(a: f64) -> Result<f64> {
    if a.is_nan() {
        return Err(Error::NotANumber { name: "a" });
    }
    if a == f64::INFINITY {
        return Ok(0.0);
    }
    let a = ensure_finite("a", a)?;
    if a >= TAIL_SWITCH {
        Ok(std_pdf(a)? / std_cdf(a)?)
    } else {
        let x = -a;
        Ok(x + mills_excess(x))
    }
}

fn check_truncation(mean: f64, sd: f64, threshold: f64) -> Result<f64> {
    ensure_finite("mean", mean)?;
    ensure_positive("sd", sd)?;
    if threshold.is_nan() {
        return Err(Error::NotANumber { name: "threshold" });
    }
    if threshold == f64::INFINITY {
        return Err(Error::NonFinite {
            name: "threshold",
            value: threshold,
        });
    }
    Ok((mean - threshold) / sd)
}

/// E[X | X > threshold] for X ~ N(mean, sd²).
///
/// `threshold = −∞` gives the untruncated mean. In the far tail the result is
/// formed as `threshold + sd·excess` so it stays strictly above the threshold.
pub fn truncated_mean_above(mean: f64, sd: f64, threshold: f64) -> Result<f64> {
    let a = check_truncation(mean, sd, threshold)?;
    if a >= TAIL_SWITCH {
        Ok(mean + sd * inverse_mills(a)?)
    } else {
        Ok(threshold + sd * mills_excess(-a))
    }
}

/// E[X | X < threshold] for X ~ N(mean, sd²).
pub fn truncated_mean_below(mean: f64, sd: f64, threshold: f64) -> Result<f64> {
    if threshold == f64::NEG_INFINITY {
        return Err(Error::NonFinite {
            name: "threshold",
            value: threshold,
        });
    }
    Ok(-truncated_mean_above(-mean, sd, -threshold)?)
}
