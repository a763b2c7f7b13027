//! `alicki`: predictions, simulated runs, source purity, parameter search and
//! tally analysis for the single-qubit nonclassicality test.
//!
//! Exit status: 0 when a violation is shown, 1 when it is not, 2 on usage,
//! configuration or input errors.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alicki_core::tally::{parse_tallies, write_tallies};
use alicki_core::{
    estimate_from_tallies, feasibility_window, format_with_uncertainty, optimize, predict,
    purity_run, purity_stats, simulate_run, DetectionModel, Error as CoreError, MeasuredPurity,
    ObservableParams, PhotonNumberDist, PurityRunConfig, QubitState, RunConfig, RunResult,
    StateSearch, Verdict,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Format};
use report::{csv, num, table};

/// Significance (in standard uncertainties) a measured run needs before it
/// is reported as a violation.
const VIOLATION_SIGMA: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(name = "alicki", version, about = "Single-qubit nonclassicality test toolkit")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format; overrides output.format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (tally CSV for `simulate`, the report otherwise).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact predictions, admissible a/b window and verdict.
    Predict(PointArgs),
    /// Monte Carlo run of both settings; writes the tally CSV.
    Simulate(PointArgs),
    /// Click statistics of the source: closed forms against a measurement.
    Purity {
        /// Counts file `zero,one,two` (gates with 0, 1, 2 fired detectors)
        /// used instead of a simulated measurement.
        #[arg(long, value_name = "PATH")]
        counts: Option<PathBuf>,
    },
    /// Searches the configured bounds for the largest violation.
    Optimize,
    /// Estimates the test quantities from a tally CSV.
    Analyze {
        #[command(flatten)]
        point: PointArgs,
        /// Tally CSV (`setting_rad,total,transmitted,accidentals`).
        #[arg(long, value_name = "PATH")]
        tallies: PathBuf,
    },
}

/// Overrides of the operator parameters and the state.
#[derive(Args, Debug, Default)]
struct PointArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "beta_deg")]
    beta_rad: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "psi_deg")]
    psi_rad: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    psi_deg: Option<f64>,
}

impl PointArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let p = &mut cfg.params;
        p.a = self.a.unwrap_or(p.a);
        p.b = self.b.unwrap_or(p.b);
        p.r = self.r.unwrap_or(p.r);
        if let Some(x) = self.beta_rad.or(self.beta_deg.map(f64::to_radians)) {
            p.beta = x;
        }
        if let Some(x) = self.psi_rad.or(self.psi_deg.map(f64::to_radians)) {
            cfg.state = QubitState::new(x);
        }
        *p = ObservableParams::new(p.a, p.b, p.r, p.beta).map_err(rename_params)?;
        if !cfg.state.psi.is_finite() {
            bail!("state.psi = {} is out of range; allowed finite angles", cfg.state.psi);
        }
        Ok(())
    }
}

/// Core errors name the bare field; report it under its configuration key.
fn rename_params(e: CoreError) -> anyhow::Error {
    match e {
        CoreError::OutOfRange { name, value, allowed } => {
            anyhow::anyhow!("params.{name} = {value} is out of range; allowed {allowed}")
        }
        other => other.into(),
    }
}

/// Outcome of a command: the verdict decides the exit status.
enum Outcome {
    Violation,
    NoViolation,
}

struct Ctx {
    cfg: ExperimentConfig,
    format: Format,
    out: Option<PathBuf>,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Violation) => ExitCode::SUCCESS,
        Ok(Outcome::NoViolation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let format = cli.format.or(cfg.format).unwrap_or(Format::Table);
    let mut ctx = Ctx { cfg, format, out: cli.out };
    match &cli.command {
        Command::Predict(point) => {
            point.apply(&mut ctx.cfg)?;
            cmd_predict(&ctx)
        }
        Command::Simulate(point) => {
            point.apply(&mut ctx.cfg)?;
            cmd_simulate(&ctx)
        }
        Command::Purity { counts } => cmd_purity(&ctx, counts.as_deref()),
        Command::Optimize => cmd_optimize(&ctx),
        Command::Analyze { point, tallies } => {
            point.apply(&mut ctx.cfg)?;
            cmd_analyze(&mut ctx, tallies)
        }
    }
}

fn window_text(r: f64, beta: f64, ratio: f64) -> (String, String) {
    match feasibility_window(r, beta) {
        Ok(w) if w.is_empty() => ("empty".into(), "outside".into()),
        Ok(w) => (
            format!("({}, {})", num(w.lower, 6), num(w.upper, 6)),
            if w.contains(ratio) { "inside" } else { "outside" }.into(),
        ),
        Err(_) => ("degenerate".into(), "outside".into()),
    }
}

fn cmd_predict(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.params;
    let pred = predict(&p, &ctx.cfg.state);
    let verdict = pred.verdict();
    let ratio = p.scale_ratio();
    let (window, placement) = window_text(p.r, p.beta, ratio);
    let rows = vec![
        vec!["<B> - <A>".into(), num(pred.mean_diff, 6)],
        vec!["<B^2> - <A^2>".into(), num(pred.square_diff, 6)],
        vec!["d_minus".into(), num(pred.d_minus, 6)],
        vec!["a/b".into(), num(ratio, 6)],
        vec!["a/b window".into(), window],
        vec!["a/b placement".into(), placement],
        vec!["verdict".into(), verdict.to_string()],
    ];
    let text = match ctx.format {
        Format::Table => table(&["quantity", "value"], &rows),
        Format::Csv => csv(&["quantity", "value"], &rows),
    };
    ctx.emit(&text)?;
    Ok(if verdict == Verdict::Nonclassical {
        Outcome::Violation
    } else {
        Outcome::NoViolation
    })
}

fn run_report(ctx: &Ctx, res: &RunResult) -> String {
    let truth = predict(&ctx.cfg.params, &ctx.cfg.state);
    let fmt_est = |e: &alicki_core::Estimate| format_with_uncertainty(e.value, e.std_uncertainty);
    match ctx.format {
        Format::Table => {
            let rows = vec![
                vec!["<A>".into(), fmt_est(&res.mean_a), String::new()],
                vec!["<A^2>".into(), fmt_est(&res.sq_a), String::new()],
                vec!["<B>".into(), fmt_est(&res.mean_b), String::new()],
                vec!["<B^2>".into(), fmt_est(&res.sq_b), String::new()],
                vec!["<B> - <A>".into(), fmt_est(&res.mean_diff), num(truth.mean_diff, 4)],
                vec!["<B^2> - <A^2>".into(), fmt_est(&res.square_diff), num(truth.square_diff, 4)],
            ];
            let mut text = table(&["quantity", "measured", "QM theory"], &rows);
            text.push_str(&format!(
                "deviation from classicality: {:.2} sigma\n",
                res.significance
            ));
            text.push_str(&format!("d_minus: {}\n", num(truth.d_minus, 6)));
            text
        }
        Format::Csv => {
            let row = |name: &str, e: &alicki_core::Estimate, theory: String| {
                vec![name.into(), e.value.to_string(), e.std_uncertainty.to_string(), theory]
            };
            let rows = vec![
                row("mean_a", &res.mean_a, String::new()),
                row("sq_a", &res.sq_a, String::new()),
                row("mean_b", &res.mean_b, String::new()),
                row("sq_b", &res.sq_b, String::new()),
                row("mean_diff", &res.mean_diff, truth.mean_diff.to_string()),
                row("square_diff", &res.square_diff, truth.square_diff.to_string()),
                vec!["significance".into(), res.significance.to_string(), String::new(), String::new()],
            ];
            csv(&["quantity", "value", "std_uncertainty", "theory"], &rows)
        }
    }
}

fn measured_outcome(ctx: &Ctx, res: &RunResult) -> Outcome {
    let d_minus = predict(&ctx.cfg.params, &ctx.cfg.state).d_minus;
    if d_minus > 0.0 && res.significance >= VIOLATION_SIGMA {
        Outcome::Violation
    } else {
        Outcome::NoViolation
    }
}

fn cmd_simulate(ctx: &Ctx) -> Result<Outcome> {
    let c = &ctx.cfg;
    let run = simulate_run(&RunConfig {
        n_heralds_a: c.n_heralds_a,
        n_heralds_b: c.n_heralds_b,
        source: c.source.clone(),
        detection: c.detection,
        state: c.state,
        params: c.params,
        seed: c.seed,
        jitter_rad: c.jitter_rad,
    })?;
    let tallies = write_tallies(&run.result.tallies);
    match (&ctx.out, ctx.format) {
        (Some(path), _) => {
            write_file(path, &tallies)?;
            print!("{}", run_report(ctx, &run.result));
        }
        (None, Format::Csv) => print!("{tallies}"),
        (None, Format::Table) => print!("{}", run_report(ctx, &run.result)),
    }
    Ok(measured_outcome(ctx, &run.result))
}

fn cmd_analyze(ctx: &mut Ctx, path: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read tallies {}", path.display()))?;
    let tallies = parse_tallies(&text).with_context(|| format!("in {}", path.display()))?;
    let res = estimate_from_tallies(&tallies, &ctx.cfg.params)?;
    let text = run_report(ctx, &res);
    // `--out` names the report file here; there is no tally to write.
    ctx.emit(&text)?;
    Ok(measured_outcome(ctx, &res))
}

fn read_counts(path: &Path) -> Result<[u64; 3]> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read counts {}", path.display()))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some(h) if h.replace(' ', "") == "zero,one,two" => {}
        _ => bail!("{}: expected header \"zero,one,two\"", path.display()),
    }
    let row = lines
        .next()
        .with_context(|| format!("{}: missing counts row", path.display()))?;
    let fields: Vec<u64> = row
        .split(',')
        .map(|f| f.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("{}: counts must be non-negative integers", path.display()))?;
    let counts: [u64; 3] = fields
        .try_into()
        .map_err(|_| anyhow::anyhow!("{}: expected 3 counts", path.display()))?;
    Ok(counts)
}

fn cmd_purity(ctx: &Ctx, counts: Option<&Path>) -> Result<Outcome> {
    let c = &ctx.cfg;
    let measured = match counts {
        Some(path) => MeasuredPurity::from_counts(read_counts(path)?)?,
        None => purity_run(&PurityRunConfig {
            n_gates: c.n_gates,
            source: c.source.clone(),
            detection: c.detection,
            seed: c.seed,
        })?,
    };
    let label = if counts.is_some() { "measured" } else { "simulated" };

    // Closed-form columns at the configured efficiencies; the Poisson column
    // uses the configured mean photon number.
    // Imported counts carry no source model: the Poisson column is then the
    // Poisson source reproducing the measured gamma1.
    let tau = (c.detection.tau_a + c.detection.tau_b) / 2.0;
    let sym = DetectionModel { tau_a: tau, tau_b: tau, ..c.detection };
    let fitted_mu_tau = counts
        .and(measured.gamma1)
        .filter(|g| g.value > 0.0)
        .map(|g| 2.0 * (g.value / 2.0).ln_1p());
    let (mu, poisson_model) = match fitted_mu_tau {
        Some(x) => (x, DetectionModel { tau_a: 1.0, tau_b: 1.0, ..c.detection }),
        None => (c.source.mean() * tau, sym),
    };
    let poisson = PhotonNumberDist::poisson(fitted_mu_tau.unwrap_or(c.source.mean()))
        .ok()
        .and_then(|d| purity_stats(&d, &poisson_model).ok());
    let ideal = purity_stats(&PhotonNumberDist::IdealSingle, &sym).ok();

    let theory = |s: Option<alicki_core::Purity>, f: fn(&alicki_core::Purity) -> f64| {
        s.map(|s| num(f(&s), 6)).unwrap_or_else(|| "undefined".into())
    };
    let est = |e: Option<alicki_core::Estimate>| {
        e.map(|e| match ctx.format {
            Format::Table => format_with_uncertainty(e.value, e.std_uncertainty),
            Format::Csv => format!("{},{}", e.value, e.std_uncertainty),
        })
        .unwrap_or_else(|| "undefined".into())
    };
    type Getter = fn(&alicki_core::Purity) -> f64;
    let items: [(&str, Getter, Option<alicki_core::Estimate>); 6] = [
        ("theta(0)", |s| s.theta0, Some(measured.theta[0])),
        ("theta(1)", |s| s.theta1, Some(measured.theta[1])),
        ("theta(2)", |s| s.theta2, Some(measured.theta[2])),
        ("gamma1", |s| s.gamma1, measured.gamma1),
        ("gamma2", |s| s.gamma2, measured.gamma2),
        ("gamma2/gamma1", |s| s.ratio, measured.ratio),
    ];
    let rows: Vec<Vec<String>> = items
        .iter()
        .map(|(name, f, m)| vec![name.to_string(), theory(poisson, *f), theory(ideal, *f), est(*m)])
        .collect();

    let diagnosis = measured
        .gamma1
        .zip(measured.gamma2)
        .map(|(g1, g2)| alicki_core::fit_source(g1.value, g2.value));
    let mut text = match ctx.format {
        Format::Table => {
            let poisson_head = format!("Poisson (mu tau = {})", num(mu, 4));
            let ideal_head = format!("ideal (tau = {})", num(tau, 4));
            let mut t = table(&["quantity", &poisson_head, &ideal_head, label], &rows);
            t.push_str(&format!("gates: {} (counts {:?})\n", measured.gates, measured.counts));
            t
        }
        Format::Csv => {
            let mut rows = rows;
            for row in &mut rows {
                if !row[3].contains(',') {
                    row[3].push(',');
                }
            }
            csv(&["quantity", "poisson", "ideal", "value", "std_uncertainty"], &rows)
        }
    };
    if ctx.format == Format::Table {
        match diagnosis {
            Some(Ok(d)) => text.push_str(&format!(
                "source: {} (Poisson score {}, matching mu tau {}, Poisson gamma2 {})\n",
                d.verdict.as_str(),
                num(d.poisson_score, 4),
                num(d.mu_tau, 5),
                num(d.poisson_gamma2, 6),
            )),
            _ => text.push_str("source: undetermined (gamma ratios undefined)\n"),
        }
    }
    ctx.emit(&text)?;
    Ok(Outcome::Violation)
}

fn cmd_optimize(ctx: &Ctx) -> Result<Outcome> {
    let found = match optimize(&ctx.cfg.bounds, &ctx.cfg.optimizer) {
        Ok(o) => o,
        Err(CoreError::Infeasible) => {
            eprintln!("no parameter point in the configured bounds violates the inequality");
            return Ok(Outcome::NoViolation);
        }
        Err(e) => return Err(e.into()),
    };
    let p = found.params;
    let (window, _) = window_text(p.r, p.beta, p.scale_ratio());
    let psi_note = match ctx.cfg.bounds.state {
        StateSearch::Fixed(_) => " (fixed)",
        StateSearch::Free(_) => "",
    };
    let rows = vec![
        vec!["a".into(), num(p.a, 6)],
        vec!["b".into(), num(p.b, 6)],
        vec!["r".into(), num(p.r, 6)],
        vec!["beta_rad".into(), num(p.beta, 6)],
        vec!["beta_deg".into(), num(p.beta.to_degrees(), 4)],
        vec!["psi_rad".into(), format!("{}{psi_note}", num(found.state.psi, 6))],
        vec!["psi_deg".into(), num(found.state.psi.to_degrees(), 4)],
        vec!["<B> - <A>".into(), num(found.prediction.mean_diff, 6)],
        vec!["<B^2> - <A^2>".into(), num(found.prediction.square_diff, 6)],
        vec!["d_minus".into(), format!("{:.3e}", found.prediction.d_minus)],
        vec!["a/b window".into(), window],
        vec!["evaluations".into(), found.evaluations.to_string()],
    ];
    let text = match ctx.format {
        Format::Table => table(&["quantity", "value"], &rows),
        Format::Csv => csv(&["quantity", "value"], &rows),
    };
    ctx.emit(&text)?;
    Ok(Outcome::Violation)
}
