//! Outcome distributions, Z-parity expectations and Hellinger fidelity.
//!
//! Bitstring keys put qubit 0 in the leftmost character.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detection::{post_select, AnomalyMask};
use crate::error::{Error, Result};
use crate::shots::ShotMatrix;
use crate::stats::{block_means, WindowConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    n_qubits: usize,
    /// Number of shots the frequencies came from; 0 for a supplied (ideal) distribution.
    shot_count: u64,
    probs: BTreeMap<String, f64>,
}

impl OutcomeDistribution {
    /// Validates and wraps a supplied distribution. Probabilities must sum to 1 within `tol`.
    pub fn from_probs(probs: BTreeMap<String, f64>, tol: f64) -> Result<Self> {
        let n_qubits = probs
            .keys()
            .next()
            .map(String::len)
            .ok_or_else(|| Error::EmptyData("distribution has no outcomes".into()))?;
        if n_qubits == 0 {
            return Err(Error::InvalidData(
                "bitstring keys must be non-empty".into(),
            ));
        }
        for (key, &p) in &probs {
            if key.len() != n_qubits || !key.bytes().all(|c| c == b'0' || c == b'1') {
                return Err(Error::InvalidData(format!(
                    "key '{key}' is not a {n_qubits}-character 0/1 string"
                )));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidData(format!("probability of '{key}' is {p}")));
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidData(format!(
                "probabilities sum to {total}, expected 1 within {tol}"
            )));
        }
        Ok(Self {
            n_qubits,
            shot_count: 0,
            probs,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shot_count(&self) -> u64 {
        self.shot_count
    }

    pub fn probs(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    /// Probability of `key`; absent outcomes have probability 0.
    pub fn prob(&self, key: &str) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    /// Same distribution with every key permuted by `f`.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Self {
        Self {
            probs: self.probs.iter().map(|(k, &p)| (f(k), p)).collect(),
            ..self.clone()
        }
    }
}

/// Relative frequencies of the bitstrings in `shots`.
pub fn empirical_distribution(shots: &ShotMatrix) -> Result<OutcomeDistribution> {
    if shots.is_empty() {
        return Err(Error::EmptyData(
            "no shots to build a distribution from".into(),
        ));
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for i in 0..shots.len() {
        *counts.entry(shots.bitstring(i)).or_default() += 1;
    }
    let total = shots.len() as u64;
    Ok(OutcomeDistribution {
        n_qubits: shots.n_qubits(),
        shot_count: total,
        probs: counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total as f64))
            .collect(),
    })
}

fn check_qubits(qubits: &[usize], n_qubits: usize) -> Result<()> {
    match qubits.iter().find(|&&q| q >= n_qubits) {
        Some(q) => Err(Error::Domain(format!(
            "qubit index {q} out of range for {n_qubits} qubits"
        ))),
        None => Ok(()),
    }
}

fn parity_sign(bits: impl Iterator<Item = u8>) -> f64 {
    if bits.fold(0u8, |acc, b| acc ^ b) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨Z_{q1} Z_{q2} …⟩` over the selected qubits.
pub fn parity_expectation(dist: &OutcomeDistribution, qubits: &[usize]) -> Result<f64> {
    check_qubits(qubits, dist.n_qubits)?;
    Ok(dist
        .probs
        .iter()
        .map(|(key, &p)| {
            let bytes = key.as_bytes();
            p * parity_sign(qubits.iter().map(|&q| bytes[q] - b'0'))
        })
        .sum())
}

/// Shot average of `(-1)^parity`, computed directly from the records.
pub fn shot_parity_mean(shots: &ShotMatrix, qubits: &[usize]) -> Result<f64> {
    if shots.is_empty() {
        return Err(Error::EmptyData("no shots".into()));
    }
    check_qubits(qubits, shots.n_qubits())?;
    let sum: f64 = shots
        .records()
        .map(|r| parity_sign(qubits.iter().map(|&q| r[q])))
        .sum();
    Ok(sum / shots.len() as f64)
}

/// Window-averaged parity expectation, same window geometry as the S scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationSeries {
    values: Vec<f64>,
    n_blocks: usize,
    config: WindowConfig,
}

impl ExpectationSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn config(&self) -> &WindowConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn expectation_series(
    shots: &ShotMatrix,
    config: &WindowConfig,
    qubits: &[usize],
) -> Result<ExpectationSeries> {
    config.validate()?;
    check_qubits(qubits, shots.n_qubits())?;
    let (n, m) = (config.n, config.m);
    if shots.len() < n * m {
        return Err(Error::InsufficientData {
            required: n * m,
            available: shots.len(),
            unit: "shots",
        });
    }
    // Odd-parity indicator per shot, then odd counts per block.
    let odd: Vec<u8> = shots
        .records()
        .map(|r| qubits.iter().fold(0u8, |acc, &q| acc ^ r[q]))
        .collect();
    let blocks = block_means(&odd, n)?;
    let counts = blocks.counts();
    let window_shots = (n * m) as f64;
    let mut odd_in_window: u64 = counts[..m].iter().map(|&k| u64::from(k)).sum();
    let mut values = Vec::with_capacity(counts.len() - m + 1);
    for i in 0..=counts.len() - m {
        if i > 0 {
            odd_in_window = odd_in_window + u64::from(counts[i + m - 1]) - u64::from(counts[i - 1]);
        }
        values.push((window_shots - 2.0 * odd_in_window as f64) / window_shots);
    }
    Ok(ExpectationSeries {
        values,
        n_blocks: counts.len(),
        config: *config,
    })
}

/// Squared Bhattacharyya coefficient `(Σ_x √(p(x) q(x)))²`.
pub fn hellinger_fidelity(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64> {
    if p.n_qubits != q.n_qubits {
        return Err(Error::Domain(format!(
            "distributions over {} and {} qubits",
            p.n_qubits, q.n_qubits
        )));
    }
    let bc: f64 = p
        .probs
        .iter()
        .map(|(key, &pk)| (pk * q.prob(key)).sqrt())
        .sum();
    Ok((bc * bc).clamp(0.0, 1.0))
}

/// Estimates for one shot subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub shot_count: usize,
    pub blocks: usize,
    /// `None` when the subset is empty.
    pub distribution: Option<OutcomeDistribution>,
    pub parity_expectation: Option<f64>,
    pub one_minus_parity: Option<f64>,
    pub hellinger_fidelity: Option<f64>,
}

impl SubsetReport {
    fn build(
        shots: &ShotMatrix,
        blocks: usize,
        ideal: Option<&OutcomeDistribution>,
        qubits: Option<&[usize]>,
    ) -> Result<Self> {
        if shots.is_empty() {
            return Ok(Self {
                shot_count: 0,
                blocks,
                distribution: None,
                parity_expectation: None,
                one_minus_parity: None,
                hellinger_fidelity: None,
            });
        }
        let dist = empirical_distribution(shots)?;
        let parity = qubits.map(|q| parity_expectation(&dist, q)).transpose()?;
        let fidelity = ideal
            .map(|ideal| hellinger_fidelity(&dist, ideal))
            .transpose()?;
        Ok(Self {
            shot_count: shots.len(),
            blocks,
            distribution: Some(dist),
            parity_expectation: parity,
            one_minus_parity: parity.map(|e| 1.0 - e),
            hellinger_fidelity: fidelity,
        })
    }
}

/// Raw versus post-selected estimates.
///
/// `raw` covers the first `M·n` shots (the ones the mask labels), so an
/// all-normal mask gives identical `raw` and `normal` sections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigationReport {
    pub n: usize,
    pub m: usize,
    pub threshold: f64,
    pub bit_order: &'static str,
    pub qubits: Option<Vec<usize>>,
    pub raw: SubsetReport,
    pub normal: SubsetReport,
    pub anomalous: SubsetReport,
}

pub const BIT_ORDER: &str = "leftmost character = qubit 0";

pub fn mitigation_report(
    shots: &ShotMatrix,
    mask: &AnomalyMask,
    ideal: Option<&OutcomeDistribution>,
    qubits: Option<&[usize]>,
) -> Result<MitigationReport> {
    if let Some(ideal) = ideal {
        if ideal.n_qubits() != shots.n_qubits() {
            return Err(Error::Domain(format!(
                "ideal distribution is over {} qubits, shots have {}",
                ideal.n_qubits(),
                shots.n_qubits()
            )));
        }
    }
    if let Some(q) = qubits {
        check_qubits(q, shots.n_qubits())?;
    }
    let part = post_select(shots, mask)?;
    let n = mask.config().n;
    let mut raw = ShotMatrix::empty_like(shots);
    raw.push_range(shots, 0..mask.n_blocks() * n);
    Ok(MitigationReport {
        n,
        m: mask.config().m,
        threshold: mask.threshold(),
        bit_order: BIT_ORDER,
        qubits: qubits.map(<[usize]>::to_vec),
        raw: SubsetReport::build(&raw, mask.n_blocks(), ideal, qubits)?,
        normal: SubsetReport::build(&part.normal, part.normal_block_indices.len(), ideal, qubits)?,
        anomalous: SubsetReport::build(
            &part.anomalous,
            part.anomalous_block_indices.len(),
            ideal,
            qubits,
        )?,
    })
}
