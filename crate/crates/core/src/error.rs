use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range; allowed {allowed}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("feasibility window is degenerate at r = 1, beta = 0 (both denominators vanish)")]
    DegenerateWindow,

    #[error("{ratio} is undefined: {denominator} is zero")]
    UndefinedRatio {
        ratio: &'static str,
        denominator: &'static str,
    },

    #[error("standard uncertainty must be positive, got {0}")]
    NonPositiveUncertainty(f64),

    #[error("no point within the bounds has d_minus > 0 together with <B^2> - <A^2> < 0")]
    Infeasible,

    #[error("invalid bounds for {axis}: {reason}")]
    InvalidBounds { axis: &'static str, reason: String },

    #[error("no detected events at setting {setting_rad} rad")]
    DegenerateStatistics { setting_rad: f64 },

    #[error("accidentals ({accidentals}) exceed raw counts ({total}) at setting {setting_rad} rad")]
    AccidentalsExceedCounts {
        setting_rad: f64,
        accidentals: u64,
        total: u64,
    },

    #[error("tally set has no row for the {which} setting ({setting_rad} rad)")]
    MissingSetting { which: &'static str, setting_rad: f64 },

    #[error("invalid photon-number distribution: {0}")]
    InvalidDistribution(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks `lo <= value <= hi` (NaN fails).
pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    allowed: &'static str,
) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            allowed,
        })
    }
}
