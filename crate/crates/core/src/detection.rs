//! Anomaly labels per block and the post-selection split of shots.
//!
//! A window is anomalous for a qubit when its S exceeds the threshold and the
//! window is not degenerate. Windows overlap with stride one block, so a block
//! is labelled anomalous when any window covering it is (union rule). The
//! combined mask is the OR over qubits.

use crate::error::{Error, Result};
use crate::shots::ShotMatrix;
use crate::stats::{FluctuationSeries, WindowConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyMask {
    per_qubit: Vec<Vec<bool>>,
    combined: Vec<bool>,
    window_flags: Vec<bool>,
    config: WindowConfig,
    threshold: f64,
}

impl AnomalyMask {
    /// Per-qubit block labels (`true` = anomalous).
    pub fn per_qubit(&self) -> &[Vec<bool>] {
        &self.per_qubit
    }

    /// Block labels OR-ed across qubits.
    pub fn combined(&self) -> &[bool] {
        &self.combined
    }

    /// Window-level combined flags: any qubit's window exceeds the threshold.
    pub fn window_flags(&self) -> &[bool] {
        &self.window_flags
    }

    pub fn config(&self) -> &WindowConfig {
        &self.config
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Blocks covered by at least one window; with stride one this is every block.
    pub fn coverage(&self) -> usize {
        self.combined.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.combined.len()
    }

    pub fn anomalous_blocks(&self) -> Vec<usize> {
        indices_where(&self.combined, true)
    }

    pub fn normal_blocks(&self) -> Vec<usize> {
        indices_where(&self.combined, false)
    }

    /// Mask with every block normal, for a stream of `n_blocks` blocks.
    pub fn all_normal(n_qubits: usize, n_blocks: usize, config: WindowConfig) -> Self {
        Self {
            per_qubit: vec![vec![false; n_blocks]; n_qubits],
            combined: vec![false; n_blocks],
            window_flags: vec![false; n_blocks.saturating_sub(config.m - 1)],
            threshold: config.s_threshold,
            config,
        }
    }
}

fn indices_where(flags: &[bool], value: bool) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| (f == value).then_some(i))
        .collect()
}

/// Window flags for one series: S above threshold and not degenerate.
fn flag_windows(series: &FluctuationSeries, threshold: f64) -> Vec<bool> {
    series
        .values()
        .iter()
        .zip(series.degenerate())
        .map(|(&s, &deg)| !deg && s > threshold)
        .collect()
}

/// Spreads window flags onto the `m` blocks each window covers.
fn spread_to_blocks(window_flags: &[bool], m: usize, n_blocks: usize) -> Vec<bool> {
    // Running count of flagged windows covering each block.
    let mut delta = vec![0i64; n_blocks + 1];
    for (i, _) in window_flags.iter().enumerate().filter(|(_, &f)| f) {
        delta[i] += 1;
        delta[(i + m).min(n_blocks)] -= 1;
    }
    let mut running = 0;
    delta[..n_blocks]
        .iter()
        .map(|d| {
            running += d;
            running > 0
        })
        .collect()
}

/// Labels blocks anomalous from one indicator series per qubit.
pub fn classify(series: &[FluctuationSeries], threshold: f64) -> Result<AnomalyMask> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidConfig("classify needs at least one series".into()))?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let cfg = *first.config();
    let n_blocks = first.n_blocks();
    for (q, s) in series.iter().enumerate() {
        if s.config().n != cfg.n || s.config().m != cfg.m || s.n_blocks() != n_blocks {
            return Err(Error::InvalidConfig(format!(
                "series {q} has geometry (n={}, m={}, M={}) but series 0 has (n={}, m={}, M={})",
                s.config().n,
                s.config().m,
                s.n_blocks(),
                cfg.n,
                cfg.m,
                n_blocks
            )));
        }
    }

    let per_window: Vec<Vec<bool>> = series.iter().map(|s| flag_windows(s, threshold)).collect();
    let window_flags: Vec<bool> = (0..first.len())
        .map(|i| per_window.iter().any(|f| f[i]))
        .collect();
    let per_qubit: Vec<Vec<bool>> = per_window
        .iter()
        .map(|f| spread_to_blocks(f, cfg.m, n_blocks))
        .collect();
    let combined = (0..n_blocks)
        .map(|b| per_qubit.iter().any(|q| q[b]))
        .collect();
    Ok(AnomalyMask {
        per_qubit,
        combined,
        window_flags,
        config: WindowConfig {
            s_threshold: threshold,
            ..cfg
        },
        threshold,
    })
}

/// Shots split into normal and anomalous subsets by block label.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotPartition {
    pub normal: ShotMatrix,
    pub anomalous: ShotMatrix,
    pub normal_block_indices: Vec<usize>,
    pub anomalous_block_indices: Vec<usize>,
}

impl ShotPartition {
    /// Shots assigned to either subset, `M·n`.
    pub fn covered_shots(&self) -> usize {
        self.normal.len() + self.anomalous.len()
    }
}

/// Routes the shots of block `b` to the anomalous subset iff `mask.combined()[b]`.
///
/// Trailing shots beyond the last full block belong to neither subset.
pub fn post_select(shots: &ShotMatrix, mask: &AnomalyMask) -> Result<ShotPartition> {
    let n = mask.config().n;
    let n_blocks = mask.n_blocks();
    if shots.len() / n != n_blocks {
        return Err(Error::InvalidConfig(format!(
            "mask covers {n_blocks} blocks of {n} shots but the stream has {} shots ({} blocks)",
            shots.len(),
            shots.len() / n
        )));
    }
    if mask.per_qubit().len() != shots.n_qubits() {
        return Err(Error::InvalidConfig(format!(
            "mask has {} qubits, shots have {}",
            mask.per_qubit().len(),
            shots.n_qubits()
        )));
    }
    let mut normal = ShotMatrix::empty_like(shots);
    let mut anomalous = ShotMatrix::empty_like(shots);
    let mut normal_block_indices = Vec::new();
    let mut anomalous_block_indices = Vec::new();
    for (b, &flag) in mask.combined().iter().enumerate() {
        let range = b * n..(b + 1) * n;
        if flag {
            anomalous.push_range(shots, range);
            anomalous_block_indices.push(b);
        } else {
            normal.push_range(shots, range);
            normal_block_indices.push(b);
        }
    }
    Ok(ShotPartition {
        normal,
        anomalous,
        normal_block_indices,
        anomalous_block_indices,
    })
}
