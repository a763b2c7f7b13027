//! Monte Carlo of the heralded-photon measurement runs.
//!
//! Gates are simulated in fixed-size chunks. Chunk `c` of stream group `g`
//! draws from a ChaCha8 generator seeded with the run seed and placed on
//! stream `(g << 48) | c`, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::qubit::{ObservableParams, QubitState};
use crate::source::{DetectionModel, PhotonNumberDist, PurityStats};
use crate::stats::{binomial_uncertainty, wilson_half_width, EstimateWithUncertainty, WILSON_THRESHOLD};
use crate::tally::{estimate_from_tallies, RunResult, SettingTally};

const CHUNK_GATES: u64 = 1 << 16;
const STREAM_A: u64 = 0;
const STREAM_B: u64 = 1;
const STREAM_PURITY: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Heralded gates at the `A` setting.
    pub n_heralds_a: u64,
    /// Heralded gates at the `B` setting.
    pub n_heralds_b: u64,
    pub source: PhotonNumberDist<f64>,
    /// `tau_a` is the transmitted-port detector, `tau_b` the reflected one.
    pub detection: DetectionModel<f64>,
    pub state: QubitState<f64>,
    pub params: ObservableParams<f64>,
    pub seed: u64,
    /// Standard deviation of per-gate polarizer misalignment; 0 disables it.
    pub jitter_rad: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("run.n_heralds_a", self.n_heralds_a as f64, 1.0, f64::MAX, "[1, inf)")?;
        check_range("run.n_heralds_b", self.n_heralds_b as f64, 1.0, f64::MAX, "[1, inf)")?;
        check_range("run.jitter_rad", self.jitter_rad, 0.0, f64::MAX, "[0, inf)")?;
        self.params.validate()
    }
}

/// Click tallies at one waveplate setting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawTally {
    pub setting_rad: f64,
    pub gates: u64,
    /// Gates where the transmitted-port detector fired.
    pub transmitted: u64,
    /// Gates where the reflected-port detector fired.
    pub reflected: u64,
    /// Background clicks at each port in the empty window.
    pub accidental_transmitted: u64,
    pub accidental_reflected: u64,
}

impl RawTally {
    fn merge(mut self, o: Self) -> Self {
        self.gates += o.gates;
        self.transmitted += o.transmitted;
        self.reflected += o.reflected;
        self.accidental_transmitted += o.accidental_transmitted;
        self.accidental_reflected += o.accidental_reflected;
        self
    }

    pub fn to_setting_tally(&self) -> SettingTally {
        SettingTally {
            setting_rad: self.setting_rad,
            total: self.transmitted + self.reflected,
            transmitted: self.transmitted,
            accidentals: self.accidental_transmitted + self.accidental_reflected,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRun {
    pub result: RunResult,
    /// `[A setting, B setting]`
    pub raw: [RawTally; 2],
}

fn chunk_rng(seed: u64, group: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((group << 48) | chunk);
    rng
}

/// Inverse-CDF photon-number sampler over a truncated table.
struct PhotonSampler {
    cdf: Vec<f64>,
    fixed: Option<usize>,
}

impl PhotonSampler {
    fn new(dist: &PhotonNumberDist<f64>) -> Self {
        let pmf = dist.pmf();
        let fixed = pmf.iter().position(|&p| p == 1.0);
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cdf, fixed }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        if let Some(n) = self.fixed {
            return n;
        }
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

#[inline]
fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> bool {
    // skip the draw for the certain outcomes so ideal runs stay cheap
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

fn simulate_setting(
    config: &RunConfig,
    sampler: &PhotonSampler,
    group: u64,
    setting_rad: f64,
    gates: u64,
) -> RawTally {
    let det = &config.detection;
    let psi = config.state.psi;
    let jitter = (config.jitter_rad > 0.0)
        .then(|| Normal::new(0.0, config.jitter_rad).expect("jitter validated"));
    let nominal_transmit = (setting_rad - psi).cos().powi(2);
    let chunks = gates.div_ceil(CHUNK_GATES);

    let mut tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(config.seed, group, c);
            let n = CHUNK_GATES.min(gates - c * CHUNK_GATES);
            let mut t = RawTally {
                gates: n,
                ..RawTally::default()
            };
            for _ in 0..n {
                let transmit = match &jitter {
                    Some(dist) => (setting_rad + dist.sample(&mut rng) - psi).cos().powi(2),
                    None => nominal_transmit,
                };
                let (mut click_t, mut click_r) = (false, false);
                for _ in 0..sampler.sample(&mut rng) {
                    if bernoulli(&mut rng, transmit) {
                        click_t |= bernoulli(&mut rng, det.tau_a);
                    } else {
                        click_r |= bernoulli(&mut rng, det.tau_b);
                    }
                }
                click_t |= bernoulli(&mut rng, det.dark_prob);
                click_r |= bernoulli(&mut rng, det.dark_prob);
                t.transmitted += click_t as u64;
                t.reflected += click_r as u64;
            }
            // empty coincidence window of the same length
            for _ in 0..n {
                t.accidental_transmitted += bernoulli(&mut rng, det.dark_prob) as u64;
                t.accidental_reflected += bernoulli(&mut rng, det.dark_prob) as u64;
            }
            t
        })
        .reduce(RawTally::default, RawTally::merge);
    tally.setting_rad = setting_rad;
    tally
}

/// Simulates both settings and applies [`estimate_from_tallies`].
///
/// Each photon of a gate is routed by the Born rule to the transmitted port
/// with probability `cos^2(theta - psi)` and detected with that port's
/// efficiency; a port registers one click per gate however many photons hit
/// it. Dark counts are OR-ed in per gate and port.
pub fn simulate_run(config: &RunConfig) -> Result<SimulatedRun> {
    config.validate()?;
    let sampler = PhotonSampler::new(&config.source);
    let raw_a = simulate_setting(config, &sampler, STREAM_A, 0.0, config.n_heralds_a);
    let raw_b = simulate_setting(
        config,
        &sampler,
        STREAM_B,
        0.5 * config.params.beta,
        config.n_heralds_b,
    );
    let tallies = [raw_a.to_setting_tally(), raw_b.to_setting_tally()];
    let result = estimate_from_tallies(&tallies, &config.params)?;
    Ok(SimulatedRun {
        result,
        raw: [raw_a, raw_b],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityRunConfig {
    pub n_gates: u64,
    pub source: PhotonNumberDist<f64>,
    pub detection: DetectionModel<f64>,
    pub seed: u64,
}

/// Estimated click statistics of the two-detector purity measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredPurity {
    pub gates: u64,
    /// Gates with 0, 1 and 2 fired detectors.
    pub counts: [u64; 3],
    pub theta: [EstimateWithUncertainty<f64>; 3],
    /// `None` when no gate had zero clicks.
    pub gamma1: Option<EstimateWithUncertainty<f64>>,
    /// `None` when no gate had exactly one click.
    pub gamma2: Option<EstimateWithUncertainty<f64>>,
    /// `gamma2 / gamma1`; `None` when either is undefined or `gamma1 = 0`.
    pub ratio: Option<EstimateWithUncertainty<f64>>,
}

impl MeasuredPurity {
    /// Builds the estimates from counts of 0, 1 and 2 fired detectors.
    ///
    /// Ratios of multinomial counts use the delta method,
    /// `var(ln(n_x/n_y)) = 1/n_x + 1/n_y`; a numerator count below the Wilson
    /// threshold takes its spread from the Wilson interval instead.
    pub fn from_counts(counts: [u64; 3]) -> Result<Self> {
        let gates: u64 = counts.iter().sum();
        if gates == 0 {
            return Err(Error::DegenerateStatistics { setting_rad: 0.0 });
        }
        let n = gates as f64;
        let c = counts.map(|k| k as f64);
        let theta = c.map(|k| EstimateWithUncertainty::new(k / n, binomial_uncertainty(k, n)));
        // spread of a count, falling back to Wilson for sparse counts
        let count_sd = |k: f64| {
            if k < WILSON_THRESHOLD {
                n * wilson_half_width(k / n, n, 1.0)
            } else {
                k.sqrt()
            }
        };
        let ratio_of = |x: f64, y: f64| {
            (y > 0.0).then(|| {
                let value = x / y;
                let u = ((count_sd(x) / y).powi(2) + value * value / y).sqrt();
                EstimateWithUncertainty::new(value, u)
            })
        };
        let gamma1 = ratio_of(c[1], c[0]);
        let gamma2 = ratio_of(c[2], c[1]);
        let ratio = (c[0] > 0.0 && c[1] > 0.0).then(|| {
            let value = c[2] * c[0] / (c[1] * c[1]);
            let sparse = count_sd(c[2]) * c[0] / (c[1] * c[1]);
            let u = (sparse * sparse + value * value * (1.0 / c[0] + 4.0 / c[1])).sqrt();
            EstimateWithUncertainty::new(value, u)
        });
        Ok(Self {
            gates,
            counts,
            theta,
            gamma1,
            gamma2,
            ratio,
        })
    }

    /// Point values as [`PurityStats`], when all ratios are defined.
    pub fn to_purity_stats(&self) -> Option<PurityStats<f64>> {
        Some(PurityStats {
            theta0: self.theta[0].value,
            theta1: self.theta[1].value,
            theta2: self.theta[2].value,
            gamma1: self.gamma1?.value,
            gamma2: self.gamma2?.value,
            ratio: self.ratio?.value,
        })
    }
}

/// Monte Carlo of the heralded arm split onto two click detectors.
pub fn purity_run(config: &PurityRunConfig) -> Result<MeasuredPurity> {
    check_range("run.n_gates", config.n_gates as f64, 1.0, f64::MAX, "[1, inf)")?;
    let sampler = PhotonSampler::new(&config.source);
    let det = config.detection;
    let chunks = config.n_gates.div_ceil(CHUNK_GATES);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(config.seed, STREAM_PURITY, c);
            let n = CHUNK_GATES.min(config.n_gates - c * CHUNK_GATES);
            let mut counts = [0u64; 3];
            for _ in 0..n {
                let (mut fa, mut fb) = (false, false);
                for _ in 0..sampler.sample(&mut rng) {
                    if bernoulli(&mut rng, det.split_p) {
                        fa |= bernoulli(&mut rng, det.tau_a);
                    } else {
                        fb |= bernoulli(&mut rng, det.tau_b);
                    }
                }
                fa |= bernoulli(&mut rng, det.dark_prob);
                fb |= bernoulli(&mut rng, det.dark_prob);
                counts[fa as usize + fb as usize] += 1;
            }
            counts
        })
        .reduce(|| [0u64; 3], |x, y| [x[0] + y[0], x[1] + y[1], x[2] + y[2]]);
    MeasuredPurity::from_counts(counts)
}
