use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use qfluct_core::simulator::{simulate_stream, validate_null, Preset, Regime};
use qfluct_core::{
    classify, mitigation_report, pvalue_of_threshold, scan_matrix, threshold_of_pvalue,
    AnomalyMask, FluctuationSeries, PValueMethod, ShotMatrix, WindowConfig,
};
use serde::Serialize;

use crate::args::{
    EpisodeSchedule, Format, MitigateArgs, PresetArg, ScanArgs, SimulateArgs, Switch,
    ThresholdArgs, ValidateArgs, WindowArgs, DEFAULT_M, DEFAULT_N,
};
use crate::config::usage;
use crate::io::{output, read_ideal, read_shots, write_labels, write_shots};

fn require_positive(name: &str, v: f64) -> anyhow::Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

fn require_geometry(n: usize, m: usize) -> anyhow::Result<()> {
    if n < 2 {
        return Err(usage(format!("--n must be >= 2, got {n}")));
    }
    if m < 2 {
        return Err(usage(format!("--m must be >= 2, got {m}")));
    }
    Ok(())
}

fn require_probability(name: &str, p: f64) -> anyhow::Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(usage(format!(
            "--{name} must lie strictly between 0 and 1, got {p}"
        )))
    }
}

fn required_path<'a>(name: &str, p: &'a Option<PathBuf>) -> anyhow::Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| usage(format!("--{name} is required")))
}

fn window_config(w: &WindowArgs) -> anyhow::Result<WindowConfig> {
    let n = w.n.unwrap_or(DEFAULT_N);
    let m = w.m.unwrap_or(DEFAULT_M);
    require_geometry(n, m)?;
    if let Some(t) = w.tau {
        require_positive("tau", t)?;
    }
    let mut cfg = WindowConfig::new(n, m);
    match (w.threshold, w.p_value) {
        (Some(_), Some(_)) => {
            return Err(usage("--threshold and --p-value are mutually exclusive"))
        }
        (Some(s), None) => cfg = cfg.with_threshold(require_positive("threshold", s)?),
        (None, Some(p)) => {
            cfg = cfg.with_p_value(
                require_probability("p-value", p)?,
                w.method.unwrap_or_default(),
            )
        }
        (None, None) => {}
    }
    Ok(cfg)
}

pub fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let shots = a.shots.unwrap_or(500_000);
    if shots == 0 {
        return Err(usage("--shots must be >= 1"));
    }
    if let Some(t) = a.tau {
        require_positive("tau", t)?;
    }
    let preset: Preset = a.preset.unwrap_or(PresetArg::Excited1q).into();
    let ideal = a.ideal.as_deref().map(read_ideal).transpose()?;
    if preset == Preset::Sampler && ideal.is_none() {
        return Err(usage("--preset sampler needs --ideal"));
    }
    let mut scenario = preset.scenario(shots, ideal.clone())?;
    if let Some(ideal) = ideal {
        scenario.circuit.ideal = ideal;
    }
    if let Some(model) = a.model.clone() {
        scenario.model = model;
    }
    match a.regime.unwrap_or(EpisodeSchedule::Scripted) {
        EpisodeSchedule::Scripted => {}
        EpisodeSchedule::Random => scenario.model.episodes = None,
    }
    if a.anomaly.unwrap_or(Switch::On) == Switch::Off {
        scenario.model = scenario.model.without_anomalies();
    }
    let tau = a.tau.unwrap_or(scenario.sample_interval);
    // Scripted preset episodes are laid out for the preset interval; keep their run fractions.
    if let (Some(eps), None) = (scenario.model.episodes.as_mut(), &a.model) {
        let scale = tau / scenario.sample_interval;
        for e in eps.iter_mut() {
            e.start *= scale;
            e.end *= scale;
        }
    }
    let sim = simulate_stream(
        &scenario.circuit,
        &scenario.model,
        shots,
        tau,
        a.seed.unwrap_or(0),
    )?;

    let out = a.out.unwrap_or_else(|| PathBuf::from("shots.csv"));
    let labels = a.labels.unwrap_or_else(|| out.with_extension("labels.csv"));
    write_shots(&out, &sim.shots.clone().with_t0(Some(0.0)))?;
    write_labels(&labels, &sim)?;
    let anomalous = sim
        .regime
        .iter()
        .filter(|&&r| r == Regime::Anomalous)
        .count();
    println!(
        "L={} Q={} tau_s={} episodes={} anomalous_shots={}",
        sim.shots.len(),
        sim.shots.n_qubits(),
        tau,
        sim.episode_count(),
        anomalous
    );
    println!("shots: {}", out.display());
    println!("labels: {}", labels.display());
    Ok(())
}

#[derive(Serialize)]
struct WindowRow {
    window: usize,
    t_start_s: f64,
    s: Vec<f64>,
    degenerate: Vec<bool>,
    degenerate_any: bool,
    anomalous: bool,
}

#[derive(Serialize)]
struct ScanOutput {
    n: usize,
    m: usize,
    threshold: f64,
    n_qubits: usize,
    n_blocks: usize,
    windows: Vec<WindowRow>,
}

fn analyse(
    shots: &ShotMatrix,
    cfg: &WindowConfig,
) -> anyhow::Result<(Vec<FluctuationSeries>, AnomalyMask)> {
    let threshold = cfg.effective_threshold()?;
    let series = scan_matrix(shots, cfg)?;
    let mask = classify(&series, threshold)?;
    Ok((series, mask))
}

pub fn scan(a: ScanArgs) -> anyhow::Result<()> {
    let cfg = window_config(&a.window)?;
    let input = required_path("input", &a.input)?;
    let shots = read_shots(input, a.window.tau)?;
    let (series, mask) = analyse(&shots, &cfg)?;
    let q = shots.n_qubits();
    let windows = series[0].len();
    let row = |i: usize| {
        let degenerate: Vec<bool> = series.iter().map(|s| s.degenerate()[i]).collect();
        WindowRow {
            window: i,
            t_start_s: shots.time_of(i * cfg.n),
            s: series.iter().map(|s| s.values()[i]).collect(),
            degenerate_any: degenerate.iter().any(|&d| d),
            degenerate,
            anomalous: mask.window_flags()[i],
        }
    };

    let mut w = output(a.out.as_deref())?;
    match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["window".to_string(), "t_start_s".to_string()];
            header.extend((0..q).map(|k| format!("S_q{k}")));
            header.extend(["degenerate_any".to_string(), "anomalous".to_string()]);
            writeln!(w, "{}", header.join(","))?;
            for i in 0..windows {
                let r = row(i);
                write!(w, "{},{}", r.window, r.t_start_s)?;
                for s in &r.s {
                    write!(w, ",{s}")?;
                }
                writeln!(w, ",{},{}", r.degenerate_any, r.anomalous)?;
            }
        }
        Format::Json => {
            let out = ScanOutput {
                n: cfg.n,
                m: cfg.m,
                threshold: mask.threshold(),
                n_qubits: q,
                n_blocks: mask.n_blocks(),
                windows: (0..windows).map(row).collect(),
            };
            serde_json::to_writer_pretty(&mut w, &out)?;
            writeln!(w)?;
        }
    }
    w.flush().context("cannot write scan output")
}

pub fn mitigate(a: MitigateArgs) -> anyhow::Result<()> {
    let cfg = window_config(&a.window)?;
    let input = required_path("input", &a.input)?;
    let shots = read_shots(input, a.window.tau)?;
    let ideal = a.ideal.as_deref().map(read_ideal).transpose()?;
    let qubits = match a.qubits {
        Some(q) => {
            if q.is_empty() {
                return Err(usage("--qubits needs at least one qubit index"));
            }
            if let Some(bad) = q.iter().find(|&&k| k >= shots.n_qubits()) {
                return Err(usage(format!(
                    "--qubits names qubit {bad} but the shots have {} qubits",
                    shots.n_qubits()
                )));
            }
            q
        }
        None => (0..shots.n_qubits()).collect(),
    };
    let (_, mask) = analyse(&shots, &cfg)?;
    let report = mitigation_report(&shots, &mask, ideal.as_ref(), Some(&qubits))?;
    let mut w = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush().context("cannot write report")
}

pub fn validate(a: ValidateArgs) -> anyhow::Result<()> {
    let p1s = a.p1.unwrap_or_else(|| vec![0.5]);
    if p1s.is_empty() {
        return Err(usage("--p1 needs at least one value"));
    }
    for &p in &p1s {
        require_probability("p1", p)?;
    }
    let n = a.n.unwrap_or(DEFAULT_N);
    let m = a.m.unwrap_or(DEFAULT_M);
    require_geometry(n, m)?;
    let bins = a.bins.unwrap_or(60);
    if bins == 0 {
        return Err(usage("--bins must be >= 1"));
    }
    let samples = a.samples.unwrap_or(100_000);
    let seed = a.seed.unwrap_or(0);
    let results = p1s
        .iter()
        .enumerate()
        .map(|(i, &p1)| validate_null(p1, n, m, samples, seed.wrapping_add(i as u64), bins))
        .collect::<Result<Vec<_>, _>>()?;

    let mut w = output(a.out.as_deref())?;
    match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(
                w,
                "p1,n,m,samples,mean,variance,expected_variance,ks_statistic,ks_critical_1pct,mean_pass,variance_pass,ks_pass"
            )?;
            for r in &results {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.p1,
                    r.n,
                    r.m,
                    r.samples,
                    r.mean,
                    r.variance,
                    r.expected_variance,
                    r.density.ks_statistic,
                    r.density.ks_critical_1pct,
                    r.mean_pass,
                    r.variance_pass,
                    r.density.passes
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &results)?;
            writeln!(w)?;
        }
    }
    w.flush().context("cannot write validation summary")?;

    if let Some(path) = a.histogram.as_deref() {
        let mut h = output(Some(path))?;
        writeln!(h, "p1,lo,hi,count,empirical_density,theoretical_density")?;
        for r in &results {
            for b in &r.density.histogram {
                writeln!(
                    h,
                    "{},{},{},{},{},{}",
                    r.p1, b.lo, b.hi, b.count, b.empirical_density, b.theoretical_density
                )?;
            }
        }
        h.flush()
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ConversionRow {
    method: String,
    note: &'static str,
    m: usize,
    s: f64,
    p: f64,
}

pub fn threshold(a: ThresholdArgs) -> anyhow::Result<()> {
    let m = a.m.unwrap_or(DEFAULT_M);
    if m < 2 {
        return Err(usage(format!("--m must be >= 2, got {m}")));
    }
    let methods: Vec<PValueMethod> = match a.method {
        Some(method) => vec![method],
        None => PValueMethod::all().to_vec(),
    };
    let rows = methods
        .into_iter()
        .map(|method| {
            let (s, p) = match (a.s, a.p) {
                (Some(s), None) => (
                    s,
                    pvalue_of_threshold(require_positive("s", s)?, m, method)?,
                ),
                (None, Some(p)) => (
                    threshold_of_pvalue(require_probability("p", p)?, m, method)?,
                    p,
                ),
                (Some(_), Some(_)) => return Err(usage("give either --s or --p, not both")),
                (None, None) => return Err(usage("one of --s or --p is required")),
            };
            let note = if method.is_paper_compat() {
                "paper-compat"
            } else if method == PValueMethod::default() {
                "default"
            } else {
                ""
            };
            Ok(ConversionRow {
                method: method.to_string(),
                note,
                m,
                s,
                p,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut w = output(None)?;
    match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(w, "method,note,m,s,p")?;
            for r in &rows {
                writeln!(w, "{},{},{},{},{:e}", r.method, r.note, r.m, r.s, r.p)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
