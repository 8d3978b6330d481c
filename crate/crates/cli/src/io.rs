//! Shot, label and ideal-distribution file formats.
//!
//! Shots: CSV with header `t_s,bits`, one record per line, `bits` a Q-character
//! 0/1 string with qubit 0 leftmost. A file without that header holds a single
//! bits column and takes its sampling interval from `--tau`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use qfluct_core::simulator::{LabeledShotMatrix, Regime};
use qfluct_core::{OutcomeDistribution, ShotMatrix};

pub const SHOTS_HEADER: [&str; 2] = ["t_s", "bits"];

/// Relative slack on timestamps when checking uniform sampling.
const TIME_TOLERANCE: f64 = 1e-6;

/// Writer to `path`, or standard output when `path` is `None` or `-`.
pub fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    match path {
        Some(p) if p != Path::new("-") => {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn read_shots(path: &Path, tau: Option<f64>) -> anyhow::Result<ShotMatrix> {
    let file =
        File::open(path).with_context(|| format!("cannot open shots file {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(io::BufReader::new(file));
    let mut rows = reader.records();
    let first = match rows.next() {
        Some(r) => r.with_context(|| format!("{}: line 1", path.display()))?,
        None => bail!("shots file {} is empty", path.display()),
    };
    let timed = first.iter().eq(SHOTS_HEADER.iter().copied());
    if !timed && first.len() != 1 {
        bail!(
            "{}: expected header 't_s,bits' or a single bits column, found '{}'",
            path.display(),
            first.iter().collect::<Vec<_>>().join(",")
        );
    }

    let mut bits: Vec<String> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    if !timed {
        bits.push(first[0].to_string());
    }
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let row = row.with_context(|| format!("{}: line {line}", path.display()))?;
        if timed {
            if row.len() != 2 {
                bail!(
                    "{}: line {line}: expected 2 fields, found {}",
                    path.display(),
                    row.len()
                );
            }
            let t: f64 = row[0].parse().with_context(|| {
                format!("{}: line {line}: bad time '{}'", path.display(), &row[0])
            })?;
            times.push(t);
            bits.push(row[1].to_string());
        } else {
            if row.len() != 1 {
                bail!(
                    "{}: line {line}: expected a single bits field",
                    path.display()
                );
            }
            bits.push(row[0].to_string());
        }
    }
    if bits.is_empty() {
        bail!("shots file {} has a header but no records", path.display());
    }

    let (interval, t0) = if timed {
        (interval_from_times(&times, tau, path)?, Some(times[0]))
    } else {
        match tau {
            Some(t) => (t, None),
            None => bail!(
                "{} has no 't_s,bits' header; pass --tau with the seconds per shot",
                path.display()
            ),
        }
    };
    let shots = ShotMatrix::from_bitstrings(&bits, interval)
        .with_context(|| format!("shots file {}", path.display()))?;
    Ok(shots.with_t0(t0))
}

fn interval_from_times(times: &[f64], tau: Option<f64>, path: &Path) -> anyhow::Result<f64> {
    let interval = if times.len() >= 2 {
        (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
    } else {
        match tau {
            Some(t) => t,
            None => bail!("{}: a single record needs --tau", path.display()),
        }
    };
    if !(interval > 0.0 && interval.is_finite()) {
        bail!("{}: timestamps must increase", path.display());
    }
    for (i, &t) in times.iter().enumerate() {
        let want = times[0] + i as f64 * interval;
        if (t - want).abs() > TIME_TOLERANCE * interval {
            bail!(
                "{}: record {i} at t={t} breaks uniform sampling (expected {want})",
                path.display()
            );
        }
    }
    if let Some(t) = tau {
        if ((t - interval) / interval).abs() > TIME_TOLERANCE {
            bail!(
                "{}: timestamps give {interval} s per shot but --tau is {t}",
                path.display()
            );
        }
    }
    Ok(interval)
}

pub fn write_shots(path: &Path, shots: &ShotMatrix) -> anyhow::Result<()> {
    let mut w = output(Some(path))?;
    writeln!(w, "{}", SHOTS_HEADER.join(","))?;
    let mut line = String::with_capacity(shots.n_qubits());
    for (i, rec) in shots.records().enumerate() {
        line.clear();
        line.extend(rec.iter().map(|&b| if b == 1 { '1' } else { '0' }));
        writeln!(w, "{},{line}", shots.time_of(i))?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Ground-truth sidecar: `shot,t_s,regime,p_flip_q0..`, where `p_flip_q` is the
/// probability that the recorded bit differs from the ideal one.
pub fn write_labels(path: &Path, sim: &LabeledShotMatrix) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(output(Some(path))?);
    let q = sim.shots.n_qubits();
    let mut header = vec!["shot".to_string(), "t_s".to_string(), "regime".to_string()];
    header.extend((0..q).map(|k| format!("p_flip_q{k}")));
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(3 + q);
    for i in 0..sim.shots.len() {
        row.clear();
        row.push(i.to_string());
        row.push(sim.shots.time_of(i).to_string());
        row.push(
            match sim.regime[i] {
                Regime::Normal => "normal",
                Regime::Anomalous => "anomalous",
            }
            .to_string(),
        );
        row.extend((0..q).map(|k| sim.flip_prob(i, k).to_string()));
        w.write_record(&row)?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}

/// JSON map bitstring -> probability; must sum to 1 within 1e-9.
pub fn read_ideal(path: &Path) -> anyhow::Result<OutcomeDistribution> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read ideal distribution {}", path.display()))?;
    let probs: BTreeMap<String, f64> = serde_json::from_str(&text).with_context(|| {
        format!(
            "{}: expected a JSON object of bitstring -> probability",
            path.display()
        )
    })?;
    OutcomeDistribution::from_probs(probs, 1e-9)
        .with_context(|| format!("ideal distribution {}", path.display()))
}
