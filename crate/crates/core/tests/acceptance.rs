//! Exit criteria. Each test prints one `PASS`/`FAIL` line and then asserts.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use alicki_core::{
    build_a, build_b, d_minus_closed_form, estimate_from_tallies, feasibility_window, optimize,
    predict, purity_run, purity_stats, simulate_run, DetectionModel, ObservableParams,
    OptimizerSettings, PhotonNumberDist, PurityRunConfig, QubitState, RunConfig, SearchBounds,
    SettingTally, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: &str, pass: bool, detail: String) {
    println!("[{}] {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion}: {detail}");
}

fn reference_params() -> ObservableParams<f64> {
    ObservableParams::new(0.74, 1.2987, 0.6, 2.0 * PI / 9.0).unwrap()
}

fn reference_state() -> QubitState<f64> {
    QubitState::new(-11.0 * PI / 36.0)
}

fn ideal_run(n: u64, seed: u64) -> RunConfig {
    RunConfig {
        n_heralds_a: n,
        n_heralds_b: n,
        source: PhotonNumberDist::IdealSingle,
        detection: DetectionModel::perfect(),
        state: reference_state(),
        params: reference_params(),
        seed,
        jitter_rad: 0.0,
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn golden_predictions() {
    let params = reference_params();
    let state = reference_state();
    let start = Instant::now();
    let pred = predict(&params, &state);
    let elapsed = start.elapsed();
    let pass = (pred.mean_diff - 0.0685).abs() <= 0.0005
        && (pred.square_diff + 0.0449).abs() <= 0.0005
        && (pred.d_minus - 0.0189).abs() <= 0.0001
        && elapsed < Duration::from_millis(1);
    report(
        "golden predictions",
        pass,
        format!(
            "mean_diff={:.5} square_diff={:.5} d_minus={:.5} in {elapsed:?}",
            pred.mean_diff, pred.square_diff, pred.d_minus
        ),
    );
}

#[test]
fn eigen_closed_form_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = ObservableParams::new(
            rng.random_range(0.01..3.0),
            rng.random_range(0.01..3.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(-PI..PI),
        )
        .unwrap();
        let eig = (build_b(&p) - build_a(&p)).min_eigenvalue();
        worst = worst.max((eig - d_minus_closed_form(&p)).abs());
    }
    let elapsed = start.elapsed();
    report(
        "eigen/closed-form agreement",
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("max |diff| = {worst:.2e} over 10^4 draws in {elapsed:?}"),
    );
}

#[test]
fn window_semantics() {
    let start = Instant::now();
    let w = feasibility_window(0.6, 2.0 * PI / 9.0).unwrap();
    let ratio = 0.74 / 1.2987;
    let scan = |ratio: f64| {
        let p = ObservableParams::new(ratio * 1.2987, 1.2987, 0.6, 2.0 * PI / 9.0).unwrap();
        (0..1000).any(|k| {
            let psi = -PI / 2.0 + PI * k as f64 / 1000.0;
            let pred = predict(&p, &QubitState::new(psi));
            pred.square_diff < 0.0 && pred.d_minus > 0.0
        })
    };
    let outside = [0.30, 0.45, w.lower - 1e-3, w.upper + 1e-3, 0.60, 0.75];
    let outside_clear = outside.iter().all(|&x| !scan(x));
    let elapsed = start.elapsed();
    let pass = (w.lower - 0.482).abs() < 5e-4
        && (w.upper - 0.592).abs() < 5e-4
        && w.contains(ratio)
        && (ratio - 0.5698).abs() < 1e-4
        && scan(ratio)
        && outside_clear
        && elapsed < Duration::from_secs(1);
    report(
        "feasibility window semantics",
        pass,
        format!(
            "window=({:.4}, {:.4}) a/b={ratio:.4} inside-scan={} outside-scans-clear={outside_clear} in {elapsed:?}",
            w.lower, w.upper, scan(ratio)
        ),
    );
}

#[test]
fn table_one_closed_forms() {
    let mut worst = 0.0f64;
    for &mu in &[0.01, 0.1, 1.0] {
        for &tau in &[0.1, 0.5, 0.9] {
            let s = purity_stats(
                &PhotonNumberDist::poisson(mu).unwrap(),
                &DetectionModel::symmetric(tau).unwrap(),
            )
            .unwrap();
            let x: f64 = tau * mu;
            let expected = [
                (s.theta0, (-x).exp()),
                (s.theta1, 2.0 * ((-x / 2.0).exp() - (-x).exp())),
                (s.theta2, 1.0 - 2.0 * (-x / 2.0).exp() + (-x).exp()),
                (s.gamma1, 2.0 * ((x / 2.0).exp() - 1.0)),
                (s.gamma2, ((x / 2.0).exp() - 1.0) / 2.0),
                (s.ratio, 0.25),
            ];
            for (got, want) in expected {
                worst = worst.max((got - want).abs());
            }
        }
    }
    let mut ideal_exact = true;
    for &tau in &[0.1, 0.3, 0.5, 0.9] {
        let s = purity_stats(&PhotonNumberDist::IdealSingle, &DetectionModel::symmetric(tau).unwrap())
            .unwrap();
        ideal_exact &= s.gamma1 == tau / (1.0 - tau) && s.gamma2 == 0.0;
    }
    report(
        "Table 1 closed forms",
        worst <= 1e-10 && ideal_exact,
        format!("max Poisson deviation {worst:.2e}; ideal exact = {ideal_exact}"),
    );
}

#[test]
fn monte_carlo_consistency() {
    let start = Instant::now();
    let truth = predict(&reference_params(), &reference_state());
    let single = simulate_run(&ideal_run(1_000_000, 42)).unwrap().result;
    let single_ok = single.mean_diff.within(truth.mean_diff, 3.0)
        && single.square_diff.within(truth.square_diff, 3.0);

    let mut pulls_mean = Vec::with_capacity(100);
    let mut pulls_sq = Vec::with_capacity(100);
    for seed in 0..100 {
        let r = simulate_run(&ideal_run(1_000_000, 1000 + seed)).unwrap().result;
        pulls_mean.push(r.mean_diff.pull(truth.mean_diff));
        pulls_sq.push(r.square_diff.pull(truth.square_diff));
    }
    let (m1, s1) = mean_std(&pulls_mean);
    let (m2, s2) = mean_std(&pulls_sq);
    let elapsed = start.elapsed();
    let pulls_ok = [(m1, s1), (m2, s2)]
        .iter()
        .all(|&(m, s)| m.abs() <= 0.3 && (0.7..=1.3).contains(&s));
    report(
        "Monte Carlo consistency",
        single_ok && pulls_ok && elapsed < Duration::from_secs(60),
        format!(
            "seed 42: mean_diff={} square_diff={}; pulls mean_diff ({m1:.3}, {s1:.3}) square_diff ({m2:.3}, {s2:.3}) in {elapsed:?}",
            single.mean_diff, single.square_diff
        ),
    );
}

/// Integer tallies whose estimates are `square_diff = -0.0461` with
/// `u = 0.0010` at the reference's operator parameters.
fn engineered_tallies(params: &ObservableParams<f64>) -> [SettingTally; 2] {
    let (a, b, r) = (params.a, params.b, params.r);
    let p0: f64 = 0.33;
    // b^2 [r p1 + (1-r)^2/4] - a^2 p0 = -0.0461
    let p1 = (-0.0461 + a * a * p0 - b * b * (1.0 - r).powi(2) / 4.0) / (b * b * r);
    // u^2 = [(b^2 r)^2 p1(1-p1) + a^4 p0(1-p0)] / N
    let n = ((b * b * r).powi(2) * p1 * (1.0 - p1) + a.powi(4) * p0 * (1.0 - p0)) / 0.0010f64.powi(2);
    let n = n.round() as u64;
    let row = |setting_rad: f64, p: f64| SettingTally {
        setting_rad,
        total: n,
        transmitted: (p * n as f64).round() as u64,
        accidentals: 0,
    };
    [row(0.0, p0), row(params.beta / 2.0, p1)]
}

#[test]
fn significance_algebra() {
    let params = reference_params();
    let res = estimate_from_tallies(&engineered_tallies(&params), &params).unwrap();
    let algebra_ok = (res.significance - 46.1).abs() <= 0.1;

    let mean_sig = |n: u64| {
        (0..10)
            .map(|seed| simulate_run(&ideal_run(n, 500 + seed)).unwrap().result.significance)
            .sum::<f64>()
            / 10.0
    };
    let (base, quad) = (mean_sig(250_000), mean_sig(1_000_000));
    let ratio = quad / base;
    report(
        "significance algebra",
        algebra_ok && (ratio - 2.0).abs() <= 0.4,
        format!(
            "engineered {} -> {:.2} sigma; mean significance {base:.1} -> {quad:.1} (x{ratio:.3}) when N x4",
            res.square_diff, res.significance
        ),
    );
}

#[test]
fn purity_simulation_convergence() {
    let poisson = purity_run(&PurityRunConfig {
        n_gates: 1_000_000,
        source: PhotonNumberDist::poisson(0.1).unwrap(),
        detection: DetectionModel::symmetric(0.5).unwrap(),
        seed: 11,
    })
    .unwrap();
    let ideal = purity_run(&PurityRunConfig {
        n_gates: 1_000_000,
        source: PhotonNumberDist::IdealSingle,
        detection: DetectionModel::symmetric(0.5).unwrap(),
        seed: 12,
    })
    .unwrap();
    let ratio = poisson.ratio.unwrap();
    let g1 = ideal.gamma1.unwrap();
    let g2 = ideal.gamma2.unwrap();
    report(
        "purity simulation convergence",
        ratio.within(0.25, 3.0) && g2.within(0.0, 3.0) && g1.within(1.0, 3.0),
        format!("Poisson gamma2/gamma1 = {ratio}; ideal gamma1 = {g1}, gamma2 = {g2}"),
    );
}

#[test]
fn optimizer_dominance() {
    let start = Instant::now();
    let settings = OptimizerSettings::default();
    let first = optimize(&SearchBounds::default(), &settings).unwrap();
    let second = optimize(&SearchBounds::default(), &settings).unwrap();
    let elapsed = start.elapsed();
    let pred = first.prediction;
    let pass = -pred.square_diff >= 0.0449
        && pred.d_minus > 0.0
        && pred.verdict() == Verdict::Nonclassical
        && first == second
        && elapsed < Duration::from_secs(30);
    report(
        "optimizer dominance",
        pass,
        format!(
            "a={:.4} b={:.4} r={:.4} beta={:.4} psi={:.4}: square_diff={:.5} d_minus={:.2e}; deterministic={}; {elapsed:?} for two runs",
            first.params.a,
            first.params.b,
            first.params.r,
            first.params.beta,
            first.state.psi,
            pred.square_diff,
            pred.d_minus,
            first == second
        ),
    );
}
