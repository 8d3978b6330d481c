//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs without the libtest harness so every line is printed even when a
//! criterion fails. `cargo test -p qfluct-core --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use qfluct_core::simulator::{
    moments, null_density_check, sample_null, sample_scaled_chi2, simulate_stream,
    LabeledShotMatrix, Preset, Regime,
};
use qfluct_core::{
    chi2_survival, classify, fluctuation_indicator, mitigation_report, pvalue_of_threshold, scan,
    scan_matrix, PValueMethod, ShotMatrix, WindowConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{chi2_oracle, pvalue_oracle, qv3_ideal, rel_err};

const THRESHOLD: f64 = 1.5;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// AC1: sample mean and variance of S under the null for P1 in {0.1, 0.5, 0.9}.
fn null_calibration() -> Verdict {
    let start = Instant::now();
    let expected_var = 2.0 / 127.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, p1) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let samples = sample_null(p1, 128, 128, 100_000, 1000 + i as u64).unwrap();
        let (mean, var) = moments(&samples);
        let ok = (mean - 1.0).abs() <= 0.005 && ((var - expected_var) / expected_var).abs() <= 0.10;
        pass &= ok;
        parts.push(format!("P1={p1}: mean={mean:.5} var={var:.6}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(120);
    Verdict::new(
        pass,
        format!("{} (target var {expected_var:.6})", parts.join(", ")),
    )
}

/// AC2: KS test against χ²₁₂₇/127, with a χ²₆₃/63 negative control.
fn null_density() -> Verdict {
    let samples = sample_null(0.5, 128, 128, 100_000, 2000).unwrap();
    let check = null_density_check(&samples, 128, 60).unwrap();
    let control = sample_scaled_chi2(63, 100_000, 2001).unwrap();
    let neg = null_density_check(&control, 128, 60).unwrap();
    Verdict::new(
        check.passes && !neg.passes,
        format!(
            "KS={:.5} < crit={:.5}; control KS={:.5} rejected={}",
            check.ks_statistic, check.ks_critical_1pct, neg.ks_statistic, !neg.passes
        ),
    )
}

/// AC3: S = 1.5, m = 128 under both conversions.
fn pvalue_anchor() -> Verdict {
    let gauss = pvalue_of_threshold(1.5, 128, PValueMethod::PAPER_COMPAT).unwrap();
    let chi2 = pvalue_of_threshold(1.5, 128, PValueMethod::Chi2Upper).unwrap();
    let oracle = pvalue_oracle()
        .into_iter()
        .find(|(method, s, m, _)| method == "chi2" && *s == 1.5 && *m == 128)
        .map(|row| row.3)
        .unwrap();
    let pass = (gauss - 6.334e-5).abs() <= 1e-8 && rel_err(chi2, oracle) <= 1e-6;
    Verdict::new(
        pass,
        format!(
            "paper-compat p={gauss:.6e} (|Δ|={:.1e}); chi2 p={chi2:.10e} vs oracle {oracle:.10e} (rel {:.1e})",
            (gauss - 6.334e-5).abs(),
            rel_err(chi2, oracle)
        ),
    )
}

/// AC4: chi-squared survival against the committed high-precision table.
fn special_functions() -> Verdict {
    let rows = chi2_oracle();
    let worst = rows
        .iter()
        .map(|&(k, x, want)| rel_err(chi2_survival(x, k).unwrap(), want))
        .fold(0.0f64, f64::max);
    let e = chi2_survival(2.0, 2).unwrap();
    let e_err = (e - (-1.0f64).exp()).abs();
    let dofs: std::collections::BTreeSet<u32> = rows.iter().map(|r| r.0).collect();
    Verdict::new(
        worst <= 1e-9 && e_err <= 1e-12 && rows.len() == 60 && dofs.len() == 5,
        format!(
            "{} points, worst rel err {worst:.2e}; |Q(2,2) - 1/e| = {e_err:.1e}",
            rows.len()
        ),
    )
}

fn fully_inside_windows(sim: &LabeledShotMatrix, n: usize, m: usize, windows: usize) -> Vec<bool> {
    (0..windows)
        .map(|i| {
            sim.regime[i * n..(i + m) * n]
                .iter()
                .all(|&r| r == Regime::Anomalous)
        })
        .collect()
}

/// AC5: episode recall on a telegraph stream, false flags on a clean one.
fn episode_detection() -> Verdict {
    let start = Instant::now();
    let shots = 500_000;
    let cfg = WindowConfig::new(128, 128);
    let scenario = Preset::Excited1q.scenario(shots, None).unwrap();
    let expected =
        qfluct_core::simulator::expected_indicator(&scenario.model, 128, scenario.sample_interval)
            .unwrap();
    let sim = simulate_stream(
        &scenario.circuit,
        &scenario.model,
        shots,
        scenario.sample_interval,
        5,
    )
    .unwrap();
    let series = scan_matrix(&sim.shots, &cfg).unwrap();
    let mask = classify(&series, THRESHOLD).unwrap();
    let inside = fully_inside_windows(&sim, 128, 128, series[0].len());
    let n_inside = inside.iter().filter(|&&x| x).count();
    let hits = inside
        .iter()
        .zip(mask.window_flags())
        .filter(|(&a, &f)| a && f)
        .count();
    let recall = hits as f64 / n_inside as f64;

    let clean_model = scenario.model.without_anomalies();
    let clean = simulate_stream(
        &scenario.circuit,
        &clean_model,
        shots,
        scenario.sample_interval,
        6,
    )
    .unwrap();
    let clean_mask = classify(&scan_matrix(&clean.shots, &cfg).unwrap(), THRESHOLD).unwrap();
    let false_rate = clean_mask.anomalous_blocks().len() as f64 / clean_mask.n_blocks() as f64;
    let elapsed = start.elapsed();
    Verdict::new(
        sim.episode_count() == 2
            && (expected - 4.0).abs() < 0.25
            && recall >= 0.90
            && false_rate <= 0.01
            && elapsed <= Duration::from_secs(30),
        format!(
            "E[S]≈{expected:.2}, {} episodes, recall {hits}/{n_inside} = {recall:.3}, clean false-flag rate {false_rate:.4}",
            sim.episode_count()
        ),
    )
}

/// AC6: Bell-pair parity after post-selection.
fn bell_mitigation() -> Verdict {
    let shots = 1_000_000;
    let scenario = Preset::Bell.scenario(shots, None).unwrap();
    let eps = scenario.model.baseline_error;
    let normal_target = (1.0 - 2.0 * eps).powi(2);
    let sim = simulate_stream(
        &scenario.circuit,
        &scenario.model,
        shots,
        scenario.sample_interval,
        11,
    )
    .unwrap();
    let cfg = WindowConfig::new(128, 128);
    let mask = classify(&scan_matrix(&sim.shots, &cfg).unwrap(), THRESHOLD).unwrap();
    let report = mitigation_report(&sim.shots, &mask, None, Some(&[0, 1])).unwrap();
    let normal = report.normal.parity_expectation.unwrap();
    let raw = report.raw.parity_expectation.unwrap();
    let (Some(norm_err), Some(anom_err)) = (
        report.normal.one_minus_parity,
        report.anomalous.one_minus_parity,
    ) else {
        return Verdict::new(false, "a subset came out empty");
    };
    Verdict::new(
        (normal - normal_target).abs() <= 0.01 && norm_err < anom_err,
        format!(
            "<Z0Z1> normal={normal:.4} (target {normal_target:.4}), raw={raw:.4}, anomalous={:.4}; 1-<ZZ>: {norm_err:.4} < {anom_err:.4}",
            report.anomalous.parity_expectation.unwrap()
        ),
    )
}

/// AC7: Hellinger fidelity of the normal subset beats raw over 20 seeds.
fn sampler_fidelity() -> Verdict {
    let ideal = qv3_ideal();
    let shots = 400_000;
    let scenario = Preset::Sampler
        .scenario(shots, Some(ideal.clone()))
        .unwrap();
    let cfg = WindowConfig::new(128, 128);
    let mut wins = 0;
    let mut gains = Vec::new();
    for seed in 0..20u64 {
        let sim = simulate_stream(
            &scenario.circuit,
            &scenario.model,
            shots,
            scenario.sample_interval,
            500 + seed,
        )
        .unwrap();
        let mask = classify(&scan_matrix(&sim.shots, &cfg).unwrap(), THRESHOLD).unwrap();
        let report = mitigation_report(&sim.shots, &mask, Some(&ideal), None).unwrap();
        let raw = report.raw.hellinger_fidelity.unwrap();
        let normal = report.normal.hellinger_fidelity.unwrap_or(f64::NAN);
        if normal > raw {
            wins += 1;
        }
        gains.push(normal - raw);
    }
    let mean_gain = gains.iter().sum::<f64>() / gains.len() as f64;
    Verdict::new(
        wins >= 19,
        format!("normal > raw in {wins}/20 runs, mean fidelity gain {mean_gain:.4}"),
    )
}

/// AC8: scan length, bit-flip invariance, degenerate convention.
fn combinatorial_checks() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    for l in [16usize, 17, 100, 257, 1000, 4099] {
        for n in [2usize, 3, 4, 8] {
            for m in [2usize, 3, 5, 8] {
                if l < n * m {
                    continue;
                }
                let bits: Vec<u8> = (0..l).map(|_| rng.random_bool(0.3) as u8).collect();
                let s = scan(&bits, &WindowConfig::new(n, m)).unwrap();
                if s.len() != l / n - m + 1 {
                    failures.push(format!("length L={l} n={n} m={m}"));
                }
                let flipped: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
                let f = scan(&flipped, &WindowConfig::new(n, m)).unwrap();
                if s.values() != f.values() || s.degenerate() != f.degenerate() {
                    failures.push(format!("bit flip L={l} n={n} m={m}"));
                }
            }
        }
    }
    let zeros = fluctuation_indicator(&[0.0; 8], 16).unwrap();
    let zero_stream = scan(&[0u8; 256], &WindowConfig::new(16, 8)).unwrap();
    if !(zeros.value == 1.0 && zeros.degenerate)
        || !zero_stream.values().iter().all(|&v| v == 1.0)
        || !zero_stream.degenerate().iter().all(|&d| d)
    {
        failures.push("degenerate convention".into());
    }
    let shots = ShotMatrix::single_qubit(&[0u8; 256], 1e-3).unwrap();
    let mask = classify(
        &scan_matrix(&shots, &WindowConfig::new(16, 8)).unwrap(),
        0.5,
    )
    .unwrap();
    if !mask.anomalous_blocks().is_empty() {
        failures.push("degenerate window flagged".into());
    }
    Verdict::new(
        failures.is_empty(),
        if failures.is_empty() {
            "length grid, bit-flip invariance and degenerate convention hold".to_string()
        } else {
            failures.join("; ")
        },
    )
}

type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1", "null calibration", null_calibration),
        ("AC2", "null density", null_density),
        ("AC3", "p-value anchor", pvalue_anchor),
        ("AC4", "special functions", special_functions),
        ("AC5", "episode detection", episode_detection),
        ("AC6", "Bell mitigation", bell_mitigation),
        ("AC7", "sampler fidelity", sampler_fidelity),
        ("AC8", "combinatorial checks", combinatorial_checks),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        println!(
            "[{}] {id} {name}: {} ({:.1}s)",
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        if !verdict.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
