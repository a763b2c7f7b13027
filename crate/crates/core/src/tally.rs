//! Turning per-setting click tallies into estimates of `<A>`, `<A^2>`, `<B>`,
//! `<B^2>` and the test differences.
//!
//! Two waveplate settings are used: `theta = 0` measures `A = a P(0)` and
//! `theta = beta/2` measures both projectors of `B` at once through the two
//! ports of one polarizing splitter. For each setting the estimated
//! probability is the fraction of clicks registered at the transmitted port.
//!
//! Plain-text format, one header line then rows
//! `setting_rad,total,transmitted,accidentals`, where `total` counts clicks at
//! both ports and `accidentals` counts background clicks at both ports in an
//! equally long off-coincidence window.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::qubit::ObservableParams;
use crate::stats::{binomial_uncertainty, EstimateWithUncertainty};
use crate::witness::significance;

pub const TALLY_HEADER: &str = "setting_rad,total,transmitted,accidentals";

/// Settings are matched to `0` and `beta/2` within this tolerance.
const SETTING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingTally {
    pub setting_rad: f64,
    pub total: u64,
    pub transmitted: u64,
    pub accidentals: u64,
}

impl SettingTally {
    /// Background-subtracted transmit fraction and its standard uncertainty.
    ///
    /// Accidentals are taken as polarization independent: half of them are
    /// removed from the transmitted port.
    pub fn transmit_fraction(&self) -> Result<EstimateWithUncertainty<f64>> {
        if self.accidentals > self.total {
            return Err(Error::AccidentalsExceedCounts {
                setting_rad: self.setting_rad,
                accidentals: self.accidentals,
                total: self.total,
            });
        }
        let net_total = (self.total - self.accidentals) as f64;
        if net_total <= 0.0 {
            return Err(Error::DegenerateStatistics {
                setting_rad: self.setting_rad,
            });
        }
        let net_transmitted =
            (self.transmitted as f64 - 0.5 * self.accidentals as f64).clamp(0.0, net_total);
        Ok(EstimateWithUncertainty::new(
            net_transmitted / net_total,
            binomial_uncertainty(net_transmitted, net_total),
        ))
    }
}

/// Estimates for one measured parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub mean_a: EstimateWithUncertainty<f64>,
    pub sq_a: EstimateWithUncertainty<f64>,
    pub mean_b: EstimateWithUncertainty<f64>,
    pub sq_b: EstimateWithUncertainty<f64>,
    pub mean_diff: EstimateWithUncertainty<f64>,
    pub square_diff: EstimateWithUncertainty<f64>,
    /// Standard deviations below the classical bound `<B^2> - <A^2> >= 0`.
    pub significance: f64,
    /// `[A setting, B setting]`
    pub tallies: [SettingTally; 2],
}

/// Applies the estimator to externally supplied tallies. Requires one row at
/// `theta = 0` and one at `theta = beta/2`; other rows are ignored.
pub fn estimate_from_tallies(
    tallies: &[SettingTally],
    params: &ObservableParams<f64>,
) -> Result<RunResult> {
    let find = |which: &'static str, setting: f64| {
        tallies
            .iter()
            .find(|t| (t.setting_rad - setting).abs() <= SETTING_TOLERANCE)
            .copied()
            .ok_or(Error::MissingSetting {
                which,
                setting_rad: setting,
            })
    };
    let tally_a = find("A", 0.0)?;
    let tally_b = find("B", 0.5 * params.beta)?;
    let p0 = tally_a.transmit_fraction()?;
    let p1 = tally_b.transmit_fraction()?;
    let ObservableParams { a, b, r, .. } = *params;

    let mean_a = p0.scaled(a);
    let sq_a = p0.scaled(a * a);
    // b[(1+r)/2 p1 + (1-r)/2 (1-p1)] = b[(1-r)/2 + r p1]
    let mean_b = EstimateWithUncertainty::new(
        b * (0.5 * (1.0 - r) + r * p1.value),
        b * r * p1.std_uncertainty,
    );
    // b^2[((1+r)/2)^2 p1 + ((1-r)/2)^2 (1-p1)] = b^2[r p1 + (1-r)^2/4]
    let sq_b = EstimateWithUncertainty::new(
        b * b * (r * p1.value + 0.25 * (1.0 - r) * (1.0 - r)),
        b * b * r * p1.std_uncertainty,
    );
    let diff = |hi: EstimateWithUncertainty<f64>, lo: EstimateWithUncertainty<f64>| {
        EstimateWithUncertainty::new(
            hi.value - lo.value,
            hi.std_uncertainty.hypot(lo.std_uncertainty),
        )
    };
    let mean_diff = diff(mean_b, mean_a);
    let square_diff = diff(sq_b, sq_a);
    let significance = significance(&square_diff).unwrap_or(f64::NAN);
    Ok(RunResult {
        mean_a,
        sq_a,
        mean_b,
        sq_b,
        mean_diff,
        square_diff,
        significance,
        tallies: [tally_a, tally_b],
    })
}

/// Serializes tallies with the standard header. Angles use the shortest
/// representation that parses back to the same `f64`.
pub fn write_tallies(tallies: &[SettingTally]) -> String {
    let mut out = String::from(TALLY_HEADER);
    out.push('\n');
    for t in tallies {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t.setting_rad, t.total, t.transmitted, t.accidentals
        );
    }
    out
}

pub fn parse_tallies(text: &str) -> Result<Vec<SettingTally>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        if !seen_header {
            seen_header = true;
            if line.replace(' ', "") == TALLY_HEADER {
                continue;
            }
            return Err(err(format!("expected header {TALLY_HEADER:?}")));
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let count = |i: usize, name: &str| {
            fields[i]
                .parse::<u64>()
                .map_err(|e| err(format!("{name} {:?}: {e}", fields[i])))
        };
        let setting_rad = fields[0]
            .parse::<f64>()
            .map_err(|e| err(format!("setting_rad {:?}: {e}", fields[0])))?;
        let row = SettingTally {
            setting_rad,
            total: count(1, "total")?,
            transmitted: count(2, "transmitted")?,
            accidentals: count(3, "accidentals")?,
        };
        if row.transmitted > row.total {
            return Err(err("transmitted exceeds total".into()));
        }
        rows.push(row);
    }
    Ok(rows)
}
