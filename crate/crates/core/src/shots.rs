//! Raw binary measurement records.

use crate::error::{Error, Result};

/// An `L × Q` record of measured bits with a fixed sampling interval.
///
/// Shots are stored row-major: record `i` occupies `bits[i*Q .. (i+1)*Q]` and
/// position `q` within a record is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotMatrix {
    bits: Vec<u8>,
    n_qubits: usize,
    sample_interval: f64,
    t0: Option<f64>,
}

impl ShotMatrix {
    /// Builds a matrix from per-shot records.
    pub fn new(records: Vec<Vec<u8>>, sample_interval: f64, t0: Option<f64>) -> Result<Self> {
        let n_qubits = records
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::EmptyData("shot matrix needs at least one record".into()))?;
        let mut bits = Vec::with_capacity(records.len() * n_qubits);
        for (i, rec) in records.iter().enumerate() {
            if rec.len() != n_qubits {
                return Err(Error::InvalidData(format!(
                    "record {i} has {} bits, expected {n_qubits}",
                    rec.len()
                )));
            }
            bits.extend_from_slice(rec);
        }
        Self::from_flat(bits, n_qubits, sample_interval).map(|m| m.with_t0(t0))
    }

    /// Builds a matrix from a flat row-major buffer of `L * n_qubits` bits.
    pub fn from_flat(bits: Vec<u8>, n_qubits: usize, sample_interval: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidData(
                "records must hold at least one qubit".into(),
            ));
        }
        if bits.is_empty() {
            return Err(Error::EmptyData(
                "shot matrix needs at least one record".into(),
            ));
        }
        if bits.len() % n_qubits != 0 {
            return Err(Error::InvalidData(format!(
                "buffer of {} bits is not a whole number of {n_qubits}-qubit records",
                bits.len()
            )));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidData(format!(
                "bit value {} at flat index {pos} is not 0 or 1",
                bits[pos]
            )));
        }
        check_interval(sample_interval)?;
        Ok(Self {
            bits,
            n_qubits,
            sample_interval,
            t0: None,
        })
    }

    /// Single-qubit stream.
    pub fn single_qubit(bits: &[u8], sample_interval: f64) -> Result<Self> {
        Self::from_flat(bits.to_vec(), 1, sample_interval)
    }

    /// Parses records written as `0`/`1` strings, leftmost character = qubit 0.
    pub fn from_bitstrings<I, S>(records: I, sample_interval: f64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = Vec::new();
        let mut n_qubits = None;
        for (i, rec) in records.into_iter().enumerate() {
            let rec = rec.as_ref();
            match n_qubits {
                None => n_qubits = Some(rec.len()),
                Some(q) if q != rec.len() => {
                    return Err(Error::InvalidData(format!(
                        "record {i} has {} bits, expected {q}",
                        rec.len()
                    )))
                }
                _ => {}
            }
            for c in rec.chars() {
                bits.push(match c {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::InvalidData(format!(
                            "record {i} contains '{other}', expected 0 or 1"
                        )))
                    }
                });
            }
        }
        Self::from_flat(bits, n_qubits.unwrap_or(0).max(1), sample_interval)
    }

    /// Empty matrix; only used for post-selection subsets, which may legitimately be empty.
    pub(crate) fn empty_like(other: &ShotMatrix) -> Self {
        Self {
            bits: Vec::new(),
            n_qubits: other.n_qubits,
            sample_interval: other.sample_interval,
            t0: other.t0,
        }
    }

    pub(crate) fn push_range(&mut self, src: &ShotMatrix, shots: std::ops::Range<usize>) {
        let q = self.n_qubits;
        self.bits
            .extend_from_slice(&src.bits[shots.start * q..shots.end * q]);
    }

    pub fn with_t0(mut self, t0: Option<f64>) -> Self {
        self.t0 = t0;
        self
    }

    /// Number of shots `L`.
    pub fn len(&self) -> usize {
        self.bits.len() / self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Seconds per shot.
    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn t0(&self) -> Option<f64> {
        self.t0
    }

    /// Timestamp of shot `i` in seconds.
    pub fn time_of(&self, i: usize) -> f64 {
        self.t0.unwrap_or(0.0) + i as f64 * self.sample_interval
    }

    pub fn record(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n_qubits..(i + 1) * self.n_qubits]
    }

    pub fn records(&self) -> std::slice::ChunksExact<'_, u8> {
        self.bits.chunks_exact(self.n_qubits)
    }

    /// Row-major flat buffer.
    pub fn as_flat(&self) -> &[u8] {
        &self.bits
    }

    /// Bits of qubit `q` across all shots.
    pub fn column(&self, q: usize) -> Vec<u8> {
        assert!(q < self.n_qubits, "qubit {q} out of range");
        self.records().map(|r| r[q]).collect()
    }

    /// Record `i` as a `0`/`1` string, leftmost = qubit 0.
    pub fn bitstring(&self, i: usize) -> String {
        self.record(i)
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }

    /// Copy with every bit inverted.
    pub fn flipped(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
            ..self.clone()
        }
    }
}

fn check_interval(sample_interval: f64) -> Result<()> {
    if !(sample_interval.is_finite() && sample_interval > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sample_interval must be positive and finite, got {sample_interval}"
        )));
    }
    Ok(())
}
