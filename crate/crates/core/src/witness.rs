//! Evaluation of the nonclassicality test: the admissible `a/b` window, the
//! witness `d_minus`, predicted differences and their classification.

use crate::error::{check_range, Error, Result};
use crate::qubit::{build_a, build_b, ObservableParams, QubitState};
use crate::scalar::Real;
use crate::stats::EstimateWithUncertainty;

/// Denominators below this are treated as vanishing.
const DEGENERATE_DENOM: f64 = 1e-14;

/// Quantum-mechanical values of the test quantities for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPrediction<T> {
    /// `<B> - <A>`
    pub mean_diff: T,
    /// `<B^2> - <A^2>`
    pub square_diff: T,
    /// Smallest eigenvalue of `B - A`.
    pub d_minus: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// `d_minus > 0` and `<B^2> < <A^2>`.
    Nonclassical,
    /// `d_minus > 0` but `<B^2> >= <A^2>`.
    ConsistentWithClassical,
    /// `d_minus <= 0`: `<B> > <A>` does not hold for every state.
    InvalidWitness,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Nonclassical => "NONCLASSICAL",
            Verdict::ConsistentWithClassical => "CONSISTENT_WITH_CLASSICAL",
            Verdict::InvalidWitness => "INVALID_WITNESS",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Open interval of `a/b` for which `B - A > 0` and `B^2 - A^2` has a
/// negative eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityWindow<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Real> FeasibilityWindow<T> {
    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    /// Strict containment; an empty window contains nothing.
    pub fn contains(&self, ratio: T) -> bool {
        ratio > self.lower && ratio < self.upper
    }
}

/// Window on `a/b`:
/// `(1-r^2) / (2 sqrt(1+r^2-2r cos(beta))) < a/b < (1-r^2) / (2 (1-r cos(beta)))`.
pub fn feasibility_window<T: Real>(r: T, beta: T) -> Result<FeasibilityWindow<T>> {
    check_range("r", r.to_f64().unwrap_or(f64::NAN), 0.0, 1.0, "[0, 1]")?;
    let c = beta.cos();
    let numerator = T::one() - r * r;
    let lin = T::one() - r * c;
    let quad = T::one() + r * r - (r + r) * c;
    let tiny = T::lit(DEGENERATE_DENOM);
    if lin.abs() <= tiny || quad <= tiny {
        return Err(Error::DegenerateWindow);
    }
    Ok(FeasibilityWindow {
        lower: numerator / (T::two() * quad.sqrt()),
        upper: numerator / (T::two() * lin),
    })
}

/// `d_minus = (b - a - sqrt(a^2 + b^2 r^2 - 2 a b r cos(beta))) / 2`.
pub fn d_minus_closed_form<T: Real>(params: &ObservableParams<T>) -> T {
    let ObservableParams { a, b, r, beta } = *params;
    let radicand = a * a + b * b * r * r - T::two() * a * b * r * beta.cos();
    (b - a - radicand.max(T::zero()).sqrt()) * T::half()
}

/// Exact predictions through the operator route.
pub fn predict<T: Real>(params: &ObservableParams<T>, state: &QubitState<T>) -> TestPrediction<T> {
    let a = build_a(params);
    let b = build_b(params);
    TestPrediction {
        mean_diff: (b - a).expectation(state),
        square_diff: (b.square() - a.square()).expectation(state),
        d_minus: (b - a).min_eigenvalue(),
    }
}

pub fn classify<T: Real>(prediction: &TestPrediction<T>) -> Verdict {
    if prediction.d_minus <= T::zero() {
        Verdict::InvalidWitness
    } else if prediction.square_diff < T::zero() {
        Verdict::Nonclassical
    } else {
        Verdict::ConsistentWithClassical
    }
}

impl<T: Real> TestPrediction<T> {
    pub fn verdict(&self) -> Verdict {
        classify(self)
    }
}

/// Number of standard uncertainties by which a measured `<B^2> - <A^2>`
/// lies below zero. Negative means no violation.
pub fn significance<T: Real>(measured_square_diff: &EstimateWithUncertainty<T>) -> Result<T> {
    let u = measured_square_diff.std_uncertainty;
    if !(u > T::zero()) {
        return Err(Error::NonPositiveUncertainty(u.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(-measured_square_diff.value / u)
}
