#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use qfluct_core::OutcomeDistribution;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

/// Rows of `chi2_survival_oracle.csv`: (k, x, survival).
pub fn chi2_oracle() -> Vec<(u32, f64, f64)> {
    let text = std::fs::read_to_string(fixture("chi2_survival_oracle.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect()
}

/// Rows of `pvalue_oracle.csv`: (method, s, m, p).
pub fn pvalue_oracle() -> Vec<(String, f64, usize, f64)> {
    let text = std::fs::read_to_string(fixture("pvalue_oracle.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (
                f[0].to_string(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

pub fn qv3_ideal() -> OutcomeDistribution {
    let text = std::fs::read_to_string(fixture("qv3_ideal.json")).unwrap();
    let probs: BTreeMap<String, f64> = serde_json::from_str(&text).unwrap();
    OutcomeDistribution::from_probs(probs, 1e-9).unwrap()
}

/// Relative error, absolute when `want` is zero.
pub fn rel_err(got: f64, want: f64) -> f64 {
    if want.abs() < 1e-300 {
        (got - want).abs()
    } else {
        ((got - want) / want).abs()
    }
}
