//! Photon-number statistics of a heralded source and the purity parameters
//! `gamma1 = theta(1)/theta(0)`, `gamma2 = theta(2)/theta(1)` measured by
//! splitting the heralded arm onto two click detectors.
//!
//! Dark counts are not part of `theta(k|n)`; they enter only in the Monte
//! Carlo gate model of [`crate::sim`].

use crate::error::{check_range, Error, Result};
use crate::scalar::Real;

/// Minimum Poisson truncation point.
const POISSON_MIN_TERMS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum PhotonNumberDist<T> {
    /// Exactly one photon per heralded pulse.
    IdealSingle,
    /// Poisson with mean `mu` photons per pulse.
    Poisson { mu: T },
    /// `probabilities[n]` is the probability of `n` photons; normalized.
    Empirical { probabilities: Vec<T> },
}

impl<T: Real> PhotonNumberDist<T> {
    pub fn poisson(mu: T) -> Result<Self> {
        check_range("source.mu", mu.to_f64().unwrap_or(f64::NAN), 0.0, 1e6, "[0, 1e6]")?;
        Ok(Self::Poisson { mu })
    }

    /// Validates non-negative finite entries and renormalizes to unit mass.
    pub fn empirical(probabilities: Vec<T>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("no probabilities given".into()));
        }
        if let Some((n, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= T::zero()))
        {
            return Err(Error::InvalidDistribution(format!(
                "P({n}) = {p} is not a finite non-negative number"
            )));
        }
        let total = probabilities.iter().fold(T::zero(), |s, &p| s + p);
        if !(total > T::zero()) {
            return Err(Error::InvalidDistribution("total probability is zero".into()));
        }
        Ok(Self::Empirical {
            probabilities: probabilities.into_iter().map(|p| p / total).collect(),
        })
    }

    /// Parses `n, probability` rows (comma or whitespace separated). Lines
    /// starting with `#` and a non-numeric header line are skipped; missing
    /// `n` values are zero.
    pub fn from_columns(text: &str) -> Result<Self> {
        let mut probs: Vec<T> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            if fields.len() != 2 {
                return Err(parse_err(format!("expected 2 columns, found {}", fields.len())));
            }
            let n = match fields[0].parse::<usize>() {
                Ok(n) => n,
                Err(_) if probs.is_empty() && fields[1].parse::<f64>().is_err() => continue,
                Err(e) => return Err(parse_err(format!("photon number {:?}: {e}", fields[0]))),
            };
            let p: f64 = fields[1]
                .parse()
                .map_err(|e| parse_err(format!("probability {:?}: {e}", fields[1])))?;
            if probs.len() <= n {
                probs.resize(n + 1, T::zero());
            }
            probs[n] = T::lit(p);
        }
        Self::empirical(probs)
    }

    /// Truncation point for the photon-number sum.
    pub fn n_max(&self) -> usize {
        match self {
            Self::IdealSingle => 1,
            Self::Poisson { mu } => {
                let mu = mu.to_f64().unwrap_or(0.0);
                let tail = (mu + 10.0 * mu.sqrt() + 10.0).ceil() as usize;
                POISSON_MIN_TERMS.max(tail)
            }
            Self::Empirical { probabilities } => probabilities.len() - 1,
        }
    }

    /// `P(n)` for `n = 0..=n_max`. The Poisson table is computed in log space
    /// and is not renormalized; its truncated tail is below 1e-12.
    pub fn pmf(&self) -> Vec<T> {
        match self {
            Self::IdealSingle => vec![T::zero(), T::one()],
            Self::Poisson { mu } => {
                let n_max = self.n_max();
                if *mu == T::zero() {
                    let mut v = vec![T::zero(); n_max + 1];
                    v[0] = T::one();
                    return v;
                }
                let ln_mu = mu.ln();
                let mut ln_fact = T::zero();
                (0..=n_max)
                    .map(|n| {
                        if n > 0 {
                            ln_fact = ln_fact + T::lit(n as f64).ln();
                        }
                        (T::lit(n as f64) * ln_mu - *mu - ln_fact).exp()
                    })
                    .collect()
            }
            Self::Empirical { probabilities } => probabilities.clone(),
        }
    }

    pub fn mean(&self) -> T {
        self.pmf()
            .iter()
            .enumerate()
            .fold(T::zero(), |s, (n, &p)| s + T::lit(n as f64) * p)
    }
}

/// Two click detectors behind a beam splitter. `tau_a`, `tau_b` include all
/// collection losses; `split_p` is the probability a photon goes to detector A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel<T> {
    pub tau_a: T,
    pub tau_b: T,
    pub split_p: T,
    /// Per-gate dark-count probability of each detector.
    pub dark_prob: T,
}

impl<T: Real> DetectionModel<T> {
    pub fn new(tau_a: T, tau_b: T, split_p: T, dark_prob: T) -> Result<Self> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        check_range("detection.tau_a", f(tau_a), 0.0, 1.0, "[0, 1]")?;
        check_range("detection.tau_b", f(tau_b), 0.0, 1.0, "[0, 1]")?;
        check_range("detection.split_p", f(split_p), 0.0, 1.0, "[0, 1]")?;
        check_range("detection.dark_prob", f(dark_prob), 0.0, 1.0 - f64::EPSILON, "[0, 1)")?;
        Ok(Self {
            tau_a,
            tau_b,
            split_p,
            dark_prob,
        })
    }

    /// Equal efficiencies, balanced splitter, no dark counts.
    pub fn symmetric(tau: T) -> Result<Self> {
        Self::new(tau, tau, T::half(), T::zero())
    }

    pub fn perfect() -> Self {
        Self {
            tau_a: T::one(),
            tau_b: T::one(),
            split_p: T::half(),
            dark_prob: T::zero(),
        }
    }
}

/// Probabilities of 0, 1 or 2 fired detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickProbabilities<T> {
    pub zero: T,
    pub one: T,
    pub two: T,
}

impl<T: Real> ClickProbabilities<T> {
    pub fn sum(&self) -> T {
        self.zero + self.one + self.two
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.zero, self.one, self.two]
    }
}

/// `theta(k|n)`: click probabilities for a pulse of `n` photons.
///
/// A balanced splitter uses the power closed forms; any other ratio uses
/// [`theta_given_n_binomial`].
pub fn theta_given_n<T: Real>(n: usize, model: &DetectionModel<T>) -> ClickProbabilities<T> {
    match n {
        0 => return ClickProbabilities {
            zero: T::one(),
            one: T::zero(),
            two: T::zero(),
        },
        1 => {
            let one = model.split_p * model.tau_a + (T::one() - model.split_p) * model.tau_b;
            return ClickProbabilities {
                zero: T::one() - one,
                one,
                two: T::zero(),
            };
        }
        _ => {}
    }
    if model.split_p != T::half() {
        return theta_given_n_binomial(n, model);
    }
    let k = n as i32;
    let h = T::half();
    let none = (T::one() - (model.tau_a + model.tau_b) * h).powi(k);
    let miss_a = (T::one() - model.tau_a * h).powi(k);
    let miss_b = (T::one() - model.tau_b * h).powi(k);
    ClickProbabilities {
        zero: none,
        one: miss_a + miss_b - none - none,
        two: T::one() - miss_a - miss_b + none,
    }
}

/// `theta(k|n)` from the sum over binomial splittings `B(m|n; p)` of the `n`
/// photons, `m` of them toward detector A.
pub fn theta_given_n_binomial<T: Real>(n: usize, model: &DetectionModel<T>) -> ClickProbabilities<T> {
    let one = T::one();
    let (qa, qb) = (one - model.tau_a, one - model.tau_b);
    let mut acc = ClickProbabilities {
        zero: T::zero(),
        one: T::zero(),
        two: T::zero(),
    };
    for m in 0..=n {
        let w = binomial_pmf(m, n, model.split_p);
        if w == T::zero() {
            continue;
        }
        let miss_a = qa.powi(m as i32);
        let miss_b = qb.powi((n - m) as i32);
        acc.zero = acc.zero + miss_a * miss_b * w;
        acc.one = acc.one + ((one - miss_a) * miss_b + miss_a * (one - miss_b)) * w;
        acc.two = acc.two + (one - miss_a) * (one - miss_b) * w;
    }
    acc
}

/// `C(n, m) p^m (1-p)^(n-m)`, evaluated in log space.
fn binomial_pmf<T: Real>(m: usize, n: usize, p: T) -> T {
    let q = T::one() - p;
    if p == T::zero() {
        return if m == 0 { T::one() } else { T::zero() };
    }
    if q == T::zero() {
        return if m == n { T::one() } else { T::zero() };
    }
    let ln_choose = (1..=m).fold(T::zero(), |s, i| {
        s + T::lit((n - m + i) as f64).ln() - T::lit(i as f64).ln()
    });
    (ln_choose + T::lit(m as f64) * p.ln() + T::lit((n - m) as f64) * q.ln()).exp()
}

/// Marginal click probabilities of a source and its purity ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityStats<T> {
    pub theta0: T,
    pub theta1: T,
    pub theta2: T,
    pub gamma1: T,
    pub gamma2: T,
    /// `gamma2 / gamma1`
    pub ratio: T,
}

/// `theta(k) = sum_n theta(k|n) P(n)` and the derived `gamma` ratios.
pub fn purity_stats<T: Real>(
    dist: &PhotonNumberDist<T>,
    model: &DetectionModel<T>,
) -> Result<PurityStats<T>> {
    let mut theta = [T::zero(); 3];
    for (n, p) in dist.pmf().into_iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        let c = theta_given_n(n, model).as_array();
        for k in 0..3 {
            theta[k] = theta[k] + c[k] * p;
        }
    }
    let [theta0, theta1, theta2] = theta;
    if theta0 == T::zero() {
        return Err(Error::UndefinedRatio {
            ratio: "gamma1",
            denominator: "theta(0)",
        });
    }
    if theta1 == T::zero() {
        return Err(Error::UndefinedRatio {
            ratio: "gamma2",
            denominator: "theta(1)",
        });
    }
    let gamma1 = theta1 / theta0;
    let gamma2 = theta2 / theta1;
    Ok(PurityStats {
        theta0,
        theta1,
        theta2,
        gamma1,
        gamma2,
        ratio: gamma2 / gamma1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceVerdict {
    /// `gamma2/gamma1` at most a quarter of the Poisson value.
    SinglePhotonDominated,
    /// Between single-photon dominated and Poisson-consistent.
    Intermediate,
    /// `gamma2/gamma1` within 25% of 1/4.
    PoissonConsistent,
    /// More two-click events than a Poisson source of the same `gamma1`.
    SuperPoissonian,
}

impl SourceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SinglePhotonDominated => "single-photon dominated",
            Self::Intermediate => "intermediate",
            Self::PoissonConsistent => "Poisson-consistent",
            Self::SuperPoissonian => "super-Poissonian",
        }
    }
}

/// Measured purity compared with the Poisson model of the same `gamma1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceDiagnosis<T> {
    /// Product `mu * tau` of the Poisson source reproducing `gamma1`; the two
    /// factors cannot be separated from these data.
    pub mu_tau: T,
    /// `gamma2` the Poisson model predicts at `mu_tau`.
    pub poisson_gamma2: T,
    pub measured_ratio: T,
    /// `measured_ratio / (1/4)`: 0 for an ideal single-photon source, 1 for
    /// a Poisson source.
    pub poisson_score: T,
    pub verdict: SourceVerdict,
}

/// Poisson with equal efficiencies has `gamma1 = 2(e^{x/2} - 1)` for
/// `x = mu tau`, and `gamma2 = gamma1 / 4`.
pub fn fit_source<T: Real>(gamma1: T, gamma2: T) -> Result<SourceDiagnosis<T>> {
    if !(gamma1 > T::zero() && gamma1.is_finite()) {
        return Err(Error::OutOfRange {
            name: "gamma1",
            value: gamma1.to_f64().unwrap_or(f64::NAN),
            allowed: "(0, inf)",
        });
    }
    let quarter = T::lit(0.25);
    let mu_tau = T::two() * (gamma1 * T::half()).ln_1p();
    let half_x = (mu_tau * T::half()).exp_m1();
    let measured_ratio = gamma2 / gamma1;
    let poisson_score = measured_ratio / quarter;
    let verdict = if poisson_score <= quarter {
        SourceVerdict::SinglePhotonDominated
    } else if (poisson_score - T::one()).abs() <= quarter {
        SourceVerdict::PoissonConsistent
    } else if poisson_score > T::one() {
        SourceVerdict::SuperPoissonian
    } else {
        SourceVerdict::Intermediate
    };
    Ok(SourceDiagnosis {
        mu_tau,
        poisson_gamma2: half_x * T::half(),
        measured_ratio,
        poisson_score,
        verdict,
    })
}

impl<T: Real> PurityStats<T> {
    pub fn diagnose(&self) -> Result<SourceDiagnosis<T>> {
        fit_source(self.gamma1, self.gamma2)
    }
}
