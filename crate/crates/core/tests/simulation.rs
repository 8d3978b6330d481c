use qfluct_core::simulator::{
    bell_baseline_error, draw_episodes, expected_window_indicator, moments, point_ideal,
    simulate_stream, CircuitSpec, FlipChannel, LabeledShotMatrix, Preset, Regime,
    TelegraphErrorModel,
};
use qfluct_core::{
    classify, empirical_distribution, expectation_series, null_model, post_select, scan,
    scan_matrix, ShotMatrix, WindowConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn excited(shots: usize, seed: u64) -> LabeledShotMatrix {
    let sc = Preset::Excited1q.scenario(shots, None).unwrap();
    simulate_stream(&sc.circuit, &sc.model, shots, sc.sample_interval, seed).unwrap()
}

fn bell(shots: usize, seed: u64) -> LabeledShotMatrix {
    let sc = Preset::Bell.scenario(shots, None).unwrap();
    simulate_stream(&sc.circuit, &sc.model, shots, sc.sample_interval, seed).unwrap()
}

#[test]
fn streams_are_reproducible_per_seed() {
    let a = bell(50_000, 3);
    let b = bell(50_000, 3);
    assert_eq!(a, b);
    assert_ne!(a.shots, bell(50_000, 4).shots);
}

#[test]
fn episode_dwell_times_are_exponential() {
    let model = TelegraphErrorModel {
        baseline_error: 0.01,
        anomalous_dwell_mean: 0.5,
        normal_dwell_mean: 1.5,
        fast_low: 0.05,
        fast_high: 0.15,
        fast_dwell_mean: 0.1,
        per_qubit_scope: vec![0],
        channel: FlipChannel::Symmetric,
        episodes: None,
    };
    let duration = 20_000.0;
    let eps = draw_episodes(&model, duration, 17).unwrap();
    // Drop the last episode, which may be truncated at the end of the run.
    let lengths: Vec<f64> = eps[..eps.len() - 1].iter().map(|e| e.duration()).collect();
    let gaps: Vec<f64> = eps.windows(2).map(|w| w[1].start - w[0].end).collect();
    for (sample, mean) in [(&lengths, 0.5), (&gaps, 1.5)] {
        // Ten equiprobable bins of Exp(mean): edges at -mean·ln(1 - j/10).
        let mut counts = [0usize; 10];
        for &x in sample.iter() {
            let u = 1.0 - (-x / mean).exp();
            counts[((u * 10.0) as usize).min(9)] += 1;
        }
        let expected = sample.len() as f64 / 10.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // χ²₉ upper 0.1% point.
        assert!(chi2 < 27.88, "chi2 = {chi2}, counts = {counts:?}");
        assert!(sample.len() > 4000);
    }
}

#[test]
fn flip_frequency_follows_the_true_probabilities() {
    let sim = excited(400_000, 21);
    for regime in [Regime::Normal, Regime::Anomalous] {
        let idx: Vec<usize> = (0..sim.regime.len())
            .filter(|&i| sim.regime[i] == regime)
            .collect();
        let flips = idx.iter().filter(|&&i| sim.shots.record(i)[0] == 0).count() as f64;
        let p: Vec<f64> = idx.iter().map(|&i| sim.flip_prob(i, 0)).collect();
        let mean_p: f64 = p.iter().sum::<f64>();
        let sd = p.iter().map(|x| x * (1.0 - x)).sum::<f64>().sqrt();
        assert!(
            (flips - mean_p).abs() < 3.0 * sd,
            "{regime:?}: {flips} vs {mean_p} ± {sd}"
        );
    }
}

#[test]
fn scripted_episodes_match_regime_labels() {
    let sim = excited(100_000, 2);
    let runs = sim.anomalous_runs();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0], 25_000..50_000);
    assert_eq!(runs[1], 70_000..85_000);
}

#[test]
fn disabled_anomalies_scan_near_one() {
    let sc = Preset::Excited1q.scenario(1_000_000, None).unwrap();
    let clean = sc.model.without_anomalies();
    let sim = simulate_stream(&sc.circuit, &clean, 1_000_000, sc.sample_interval, 8).unwrap();
    assert!(sim.regime.iter().all(|&r| r == Regime::Normal));
    let s = scan(&sim.shots.column(0), &WindowConfig::new(128, 128)).unwrap();
    let (mean, _) = moments(s.values());
    assert!((mean - 1.0).abs() < 0.05, "mean S = {mean}");
}

#[test]
fn in_episode_indicator_matches_prediction() {
    let (n, m) = (128, 128);
    let sc = Preset::Excited1q.scenario(500_000, None).unwrap();
    let predicted = expected_window_indicator(&sc.model, n, m, sc.sample_interval).unwrap();
    let mut inside = Vec::new();
    for seed in 0..6 {
        let sim = simulate_stream(
            &sc.circuit,
            &sc.model,
            500_000,
            sc.sample_interval,
            40 + seed,
        )
        .unwrap();
        let s = scan(&sim.shots.column(0), &WindowConfig::new(n, m)).unwrap();
        for i in 0..s.len() {
            if sim.regime[i * n..(i + m) * n]
                .iter()
                .all(|&r| r == Regime::Anomalous)
            {
                inside.push(s.values()[i]);
            }
        }
    }
    let (mean, _) = moments(&inside);
    assert!(
        (mean - predicted).abs() / predicted < 0.15,
        "mean in-episode S = {mean}, predicted {predicted}"
    );
}

#[test]
fn normal_subset_rescans_clean() {
    let sim = excited(500_000, 5);
    let cfg = WindowConfig::new(128, 128);
    let mask = classify(&scan_matrix(&sim.shots, &cfg).unwrap(), 1.5).unwrap();
    let part = post_select(&sim.shots, &mask).unwrap();
    let again = classify(&scan_matrix(&part.normal, &cfg).unwrap(), 1.5).unwrap();
    let frac = again.anomalous_blocks().len() as f64 / again.n_blocks() as f64;
    assert!(frac <= 0.05, "re-flagged fraction {frac}");
}

#[test]
fn bell_relaxation_peaks_on_10() {
    let sim = bell(1_000_000, 12);
    let cfg = WindowConfig::new(128, 128);
    let mask = classify(&scan_matrix(&sim.shots, &cfg).unwrap(), 1.5).unwrap();
    let part = post_select(&sim.shots, &mask).unwrap();
    let anom = empirical_distribution(&part.anomalous).unwrap();
    let norm = empirical_distribution(&part.normal).unwrap();
    assert!(
        anom.prob("10") > 3.0 * anom.prob("01"),
        "{:?}",
        anom.probs()
    );
    assert!(anom.prob("10") > 2.0 * norm.prob("10"));
    // Off-episode the two error strings are symmetric.
    let eps = bell_baseline_error();
    for key in ["01", "10"] {
        assert!(
            (norm.prob(key) - eps * (1.0 - eps)).abs() < 0.003,
            "{key}: {}",
            norm.prob(key)
        );
    }
}

#[test]
fn parity_series_dips_during_episodes() {
    let sim = bell(1_000_000, 13);
    let (n, m) = (128, 128);
    let series = expectation_series(&sim.shots, &WindowConfig::new(n, m), &[0, 1]).unwrap();
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for (i, &v) in series.values().iter().enumerate() {
        let regimes = &sim.regime[i * n..(i + m) * n];
        if regimes.iter().all(|&r| r == Regime::Anomalous) {
            inside.push(v);
        } else if regimes.iter().all(|&r| r == Regime::Normal) {
            outside.push(v);
        }
    }
    let (dip, _) = moments(&inside);
    let (base, _) = moments(&outside);
    assert!((dip - 0.85).abs() < 0.02, "in-episode <ZZ> = {dip}");
    assert!((base - 0.97).abs() < 0.01, "off-episode <ZZ> = {base}");
}

#[test]
fn seeded_bernoulli_scan_tracks_null_model() {
    let (n, m) = (32, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let bits: Vec<u8> = (0..n * 100_000)
        .map(|_| u8::from(rng.random_bool(0.3)))
        .collect();
    let s = scan(&bits, &WindowConfig::new(n, m)).unwrap();
    assert!(s.len() >= 10_000);
    let (mean, var) = moments(s.values());
    let expected = null_model(m).unwrap().variance;
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    assert!(
        ((var - expected) / expected).abs() < 0.10,
        "var {var} vs {expected}"
    );
}

#[test]
fn excitation_channel_moves_zeros_only() {
    let circuit = CircuitSpec {
        name: "zero".into(),
        ideal: point_ideal("0").unwrap(),
    };
    let model = TelegraphErrorModel {
        baseline_error: 0.0,
        anomalous_dwell_mean: 1.0,
        normal_dwell_mean: 1.0,
        fast_low: 0.2,
        fast_high: 0.2,
        fast_dwell_mean: 1.0,
        per_qubit_scope: vec![0],
        channel: FlipChannel::Excitation,
        episodes: Some(vec![qfluct_core::simulator::Episode {
            start: 0.0,
            end: 1e9,
        }]),
    };
    let sim = simulate_stream(&circuit, &model, 100_000, 1e-3, 1).unwrap();
    let ones = sim.shots.column(0).iter().filter(|&&b| b == 1).count() as f64 / 1e5;
    assert!((ones - 0.2).abs() < 0.005, "{ones}");

    let relax = TelegraphErrorModel {
        channel: FlipChannel::Relaxation,
        ..model
    };
    let sim = simulate_stream(&circuit, &relax, 10_000, 1e-3, 1).unwrap();
    assert_eq!(
        sim.shots,
        ShotMatrix::single_qubit(&[0; 10_000], 1e-3).unwrap()
    );
}
