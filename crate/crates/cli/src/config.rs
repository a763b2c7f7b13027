//! Flat key-value experiment configuration.
//!
//! The document is TOML; nested tables and dotted keys are flattened to
//! dotted names (`detection.tau_a`). Angles are given as `<name>_rad` or
//! `<name>_deg`. Unknown keys are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use alicki_core::{
    DetectionModel, Interval, ObservableParams, OptimizerSettings, PhotonNumberDist, QubitState,
    SearchBounds, StateSearch,
};
use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ObservableParams<f64>,
    pub state: QubitState<f64>,
    pub source: PhotonNumberDist<f64>,
    pub detection: DetectionModel<f64>,
    pub n_heralds_a: u64,
    pub n_heralds_b: u64,
    /// Gates for the purity measurement.
    pub n_gates: u64,
    pub seed: u64,
    pub jitter_rad: f64,
    pub format: Option<Format>,
    pub bounds: SearchBounds,
    pub optimizer: OptimizerSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: ObservableParams {
                a: 0.74,
                b: 1.2987,
                r: 0.6,
                beta: 2.0 * PI / 9.0,
            },
            state: QubitState::new(-11.0 * PI / 36.0),
            source: PhotonNumberDist::IdealSingle,
            detection: DetectionModel::perfect(),
            n_heralds_a: 1_000_000,
            n_heralds_b: 1_000_000,
            n_gates: 1_000_000,
            seed: 42,
            jitter_rad: 0.0,
            format: None,
            bounds: SearchBounds::default(),
            optimizer: OptimizerSettings::default(),
        }
    }
}

/// Flattened document with bookkeeping of consumed keys.
struct Doc {
    values: BTreeMap<String, toml::Value>,
    used: BTreeSet<String>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl Doc {
    fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().context("malformed configuration document")?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        Ok(Self {
            values,
            used: BTreeSet::new(),
        })
    }

    fn take(&mut self, key: &str) -> Option<&toml::Value> {
        let v = self.values.get(key)?;
        self.used.insert(key.to_string());
        Some(v)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => bail!("{key} must be a number, found {other}"),
        }
    }

    fn real(&mut self, key: &str, default: f64, lo: f64, hi: f64, allowed: &str) -> Result<f64> {
        let x = self.number(key)?.unwrap_or(default);
        if !(x >= lo && x <= hi) {
            bail!("{key} = {x} is out of range; allowed {allowed}");
        }
        Ok(x)
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let x = self.number(key)?.unwrap_or(default);
        if !(x > 0.0 && x.is_finite()) {
            bail!("{key} = {x} is out of range; allowed (0, inf)");
        }
        Ok(x)
    }

    fn count(&mut self, key: &str, default: u64, min: u64) -> Result<u64> {
        let v = match self.take(key) {
            None => return Ok(default),
            Some(toml::Value::Integer(i)) => *i,
            Some(other) => bail!("{key} must be an integer, found {other}"),
        };
        if v < min as i64 {
            bail!("{key} = {v} is out of range; allowed [{min}, inf)");
        }
        Ok(v as u64)
    }

    /// Reads `<base>_rad` or `<base>_deg` (not both), in radians.
    fn angle(&mut self, base: &str) -> Result<Option<f64>> {
        let rad = self.number(&format!("{base}_rad"))?;
        let deg = self.number(&format!("{base}_deg"))?;
        let value = match (rad, deg) {
            (Some(_), Some(_)) => bail!("give only one of {base}_rad and {base}_deg"),
            (Some(r), None) => Some(r),
            (None, Some(d)) => Some(d.to_radians()),
            (None, None) => None,
        };
        if let Some(v) = value {
            if !v.is_finite() {
                bail!("{base} = {v} is out of range; allowed finite angles");
            }
        }
        Ok(value)
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => bail!("{key} must be a string, found {other}"),
        }
    }

    fn finish(self) -> Result<()> {
        let unknown: Vec<&String> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if let Some(first) = unknown.first() {
            bail!("unknown configuration key {first}");
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Parses a document; relative file references resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let d = Self::default();
        let mut doc = Doc::parse(text)?;

        let params = ObservableParams {
            a: doc.positive("params.a", d.params.a)?,
            b: doc.positive("params.b", d.params.b)?,
            r: doc.real("params.r", d.params.r, 0.0, 1.0, "[0, 1]")?,
            beta: doc.angle("params.beta")?.unwrap_or(d.params.beta),
        };
        let state = QubitState::new(doc.angle("state.psi")?.unwrap_or(d.state.psi));

        let kind = doc.string("source.kind")?.unwrap_or_else(|| "ideal".into());
        let source = match kind.as_str() {
            "ideal" => PhotonNumberDist::IdealSingle,
            "poisson" => {
                let mu = doc
                    .number("source.mu")?
                    .ok_or_else(|| anyhow!("source.mu is required for source.kind = \"poisson\""))?;
                if !(0.0..=1e6).contains(&mu) {
                    bail!("source.mu = {mu} is out of range; allowed [0, 1e6]");
                }
                PhotonNumberDist::Poisson { mu }
            }
            "empirical" => {
                let file = doc.string("source.file")?.ok_or_else(|| {
                    anyhow!("source.file is required for source.kind = \"empirical\"")
                })?;
                let path: PathBuf = base.join(file);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                PhotonNumberDist::from_columns(&text)
                    .with_context(|| format!("in {}", path.display()))?
            }
            other => bail!(
                "source.kind = {other:?} is out of range; allowed \"ideal\", \"poisson\", \"empirical\""
            ),
        };

        let unit = |doc: &mut Doc, key: &str, default: f64| doc.real(key, default, 0.0, 1.0, "[0, 1]");
        let tau_a = unit(&mut doc, "detection.tau_a", 1.0)?;
        let tau_b = unit(&mut doc, "detection.tau_b", tau_a)?;
        let split_p = unit(&mut doc, "detection.split_p", 0.5)?;
        let dark_prob = doc.number("detection.dark_prob")?.unwrap_or(0.0);
        if !(0.0..1.0).contains(&dark_prob) {
            bail!("detection.dark_prob = {dark_prob} is out of range; allowed [0, 1)");
        }
        let detection = DetectionModel {
            tau_a,
            tau_b,
            split_p,
            dark_prob,
        };

        let n_heralds = doc.count("run.n_heralds", d.n_heralds_a, 1)?;
        let n_heralds_a = doc.count("run.n_heralds_a", n_heralds, 1)?;
        let n_heralds_b = doc.count("run.n_heralds_b", n_heralds, 1)?;
        let n_gates = doc.count("run.n_gates", d.n_gates, 1)?;
        let seed = doc.count("run.seed", d.seed, 0)?;
        let jitter_rad = doc.angle("run.jitter")?.unwrap_or(0.0);
        if jitter_rad < 0.0 {
            bail!("run.jitter = {jitter_rad} is out of range; allowed [0, inf)");
        }

        let format = match doc.string("output.format")?.as_deref() {
            None => None,
            Some("table") => Some(Format::Table),
            Some("csv") => Some(Format::Csv),
            Some(other) => bail!("output.format = {other:?} is out of range; allowed \"table\", \"csv\""),
        };

        let bounds = parse_bounds(&mut doc, &d.bounds)?;
        let optimizer = OptimizerSettings {
            grid_points: doc.count("optimize.grid_points", d.optimizer.grid_points as u64, 2)? as usize,
            refine_starts: doc.count("optimize.refine_starts", d.optimizer.refine_starts as u64, 1)?
                as usize,
            min_d_minus: doc.real("optimize.min_d_minus", 0.0, 0.0, f64::MAX, "[0, inf)")?,
            ..d.optimizer
        };

        doc.finish()?;
        Ok(Self {
            params,
            state,
            source,
            detection,
            n_heralds_a,
            n_heralds_b,
            n_gates,
            seed,
            jitter_rad,
            format,
            bounds,
            optimizer,
        })
    }
}

fn parse_bounds(doc: &mut Doc, d: &SearchBounds) -> Result<SearchBounds> {
    let interval = |doc: &mut Doc, name: &str, default: Interval, angle: bool| -> Result<Interval> {
        let (lo, hi) = if angle {
            (
                doc.angle(&format!("bounds.{name}_min"))?,
                doc.angle(&format!("bounds.{name}_max"))?,
            )
        } else {
            (
                doc.number(&format!("bounds.{name}_min"))?,
                doc.number(&format!("bounds.{name}_max"))?,
            )
        };
        let iv = Interval::new(lo.unwrap_or(default.lo), hi.unwrap_or(default.hi));
        if !(iv.lo <= iv.hi) {
            bail!("bounds.{name}: lower {} exceeds upper {}", iv.lo, iv.hi);
        }
        Ok(iv)
    };
    let a = interval(doc, "a", d.a, false)?;
    let b = interval(doc, "b", d.b, false)?;
    let r = interval(doc, "r", d.r, false)?;
    let beta = interval(doc, "beta", d.beta, true)?;
    let free_default = match d.state {
        StateSearch::Free(iv) => iv,
        StateSearch::Fixed(psi) => Interval::pinned(psi),
    };
    let psi_range = interval(doc, "psi", free_default, true)?;
    let state = match doc.angle("bounds.psi_fixed")? {
        Some(psi) => StateSearch::Fixed(psi),
        None => StateSearch::Free(psi_range),
    };
    Ok(SearchBounds {
        a,
        b,
        r,
        beta,
        state,
    })
}
