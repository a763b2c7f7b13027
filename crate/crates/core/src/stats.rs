//! Values with standard uncertainties, binomial proportion uncertainty and the
//! parenthesized `0.0461(10)` notation.

use std::fmt;

use crate::scalar::Real;

/// Counts below this (or within this of the total) switch the binomial
/// uncertainty from the Wald to the Wilson form.
pub const WILSON_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimateWithUncertainty<T> {
    pub value: T,
    pub std_uncertainty: T,
}

impl<T: Real> EstimateWithUncertainty<T> {
    pub fn new(value: T, std_uncertainty: T) -> Self {
        debug_assert!(!(std_uncertainty < T::zero()));
        Self {
            value,
            std_uncertainty,
        }
    }

    pub fn exact(value: T) -> Self {
        Self::new(value, T::zero())
    }

    /// `(value - truth) / std_uncertainty`.
    pub fn pull(&self, truth: T) -> T {
        (self.value - truth) / self.std_uncertainty
    }

    /// Whether `truth` lies within `k` standard uncertainties.
    pub fn within(&self, truth: T, k: T) -> bool {
        (self.value - truth).abs() <= k * self.std_uncertainty
    }

    pub fn scaled(&self, k: T) -> Self {
        Self::new(self.value * k, self.std_uncertainty * k.abs())
    }
}

impl fmt::Display for EstimateWithUncertainty<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_with_uncertainty(self.value, self.std_uncertainty))
    }
}

/// Standard uncertainty of the proportion `successes / trials`.
///
/// Wald `sqrt(p(1-p)/N)` in the bulk; the half-width of the one-sigma Wilson
/// score interval when `successes < 10` or `successes > N - 10`. Counts may be
/// fractional after background subtraction.
pub fn binomial_uncertainty(successes: f64, trials: f64) -> f64 {
    if !(trials > 0.0) {
        return f64::NAN;
    }
    let p = (successes / trials).clamp(0.0, 1.0);
    if successes < WILSON_THRESHOLD || successes > trials - WILSON_THRESHOLD {
        wilson_half_width(p, trials, 1.0)
    } else {
        (p * (1.0 - p) / trials).sqrt()
    }
}

/// Half-width of the Wilson score interval at `z` standard deviations.
pub fn wilson_half_width(p: f64, n: f64, z: f64) -> f64 {
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Formats `value(uncertainty)` with two significant digits of uncertainty,
/// e.g. `(-0.0461, 0.0010)` becomes `-0.0461(10)`.
pub fn format_with_uncertainty(value: f64, u: f64) -> String {
    if !u.is_finite() || u <= 0.0 {
        return format!("{value}");
    }
    let mut decimals = 1 - u.log10().floor() as i32;
    let mut digits = (u * 10f64.powi(decimals)).round();
    if digits >= 100.0 {
        decimals -= 1;
        digits = (u * 10f64.powi(decimals)).round();
    }
    if decimals < 0 {
        return format!("{value:.0} +/- {u:.0}");
    }
    format!("{:.*}({})", decimals as usize, value, digits as u64)
}
