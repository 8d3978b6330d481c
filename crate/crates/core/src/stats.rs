//! Block means, the variance-ratio indicator S and its sliding-window series.
//!
//! For a window of `m` blocks of `n` shots with per-block one-counts `k_j` and
//! total `K = Σ k_j`, the indicator
//!
//! ```text
//! S = [ 1/(m-1) Σ (Y_j - Ȳ)² ] / [ Ȳ (1 - Ȳ) / n ],   Y_j = k_j / n
//! ```
//!
//! reduces to the integer form `n · m (m Σk_j² − K²) / ((m−1) K (nm − K))`.
//! The scan keeps `Σk` and `Σk²` as exact integers while sliding, so every
//! window value is one correctly rounded division and independent of
//! evaluation order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shots::ShotMatrix;
use crate::special::{chi2_cdf, chi2_pdf, chi2_survival};
use crate::threshold::{threshold_of_pvalue, PValueMethod};

/// Default anomaly threshold on S.
pub const DEFAULT_THRESHOLD: f64 = 1.5;

/// Window geometry and threshold policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Shots per block.
    pub n: usize,
    /// Blocks per window.
    pub m: usize,
    pub s_threshold: f64,
    /// When set, overrides `s_threshold` through [`threshold_of_pvalue`].
    #[serde(default)]
    pub p_value: Option<f64>,
    #[serde(default)]
    pub method: PValueMethod,
}

impl WindowConfig {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            s_threshold: DEFAULT_THRESHOLD,
            p_value: None,
            method: PValueMethod::default(),
        }
    }

    pub fn with_threshold(mut self, s: f64) -> Self {
        self.s_threshold = s;
        self
    }

    pub fn with_p_value(mut self, p: f64, method: PValueMethod) -> Self {
        self.p_value = Some(p);
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if self.m < 2 {
            return Err(Error::InvalidConfig(format!(
                "m must be >= 2, got {}",
                self.m
            )));
        }
        if !(self.s_threshold > 0.0 && self.s_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "s_threshold must be positive, got {}",
                self.s_threshold
            )));
        }
        if let Some(p) = self.p_value {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "p_value must lie in (0, 1), got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Shots per window, `N = n·m`.
    pub fn window_shots(&self) -> usize {
        self.n * self.m
    }

    /// Threshold actually applied: `s_threshold`, or the conversion of `p_value`.
    pub fn effective_threshold(&self) -> Result<f64> {
        self.validate()?;
        match self.p_value {
            Some(p) => threshold_of_pvalue(p, self.m, self.method),
            None => Ok(self.s_threshold),
        }
    }
}

/// Per-block one-counts of a single-qubit stream.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMeanSeries {
    counts: Vec<u32>,
    n: usize,
}

impl BlockMeanSeries {
    /// Number of ones in each block.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Block means `k_j / n`.
    pub fn values(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&k| f64::from(k) / self.n as f64)
            .collect()
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    /// `M`.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Index of the first shot of block `j`.
    pub fn block_start_shot(&self, j: usize) -> usize {
        j * self.n
    }

    /// Start time of block `j` for a stream sampled every `sample_interval` seconds from `t0`.
    pub fn block_start_time(&self, j: usize, sample_interval: f64, t0: f64) -> f64 {
        t0 + (j * self.n) as f64 * sample_interval
    }
}

/// Averages every `n` consecutive shots; a trailing partial block is dropped.
pub fn block_means(bits: &[u8], n: usize) -> Result<BlockMeanSeries> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "block size n must be >= 2, got {n}"
        )));
    }
    if bits.is_empty() {
        return Err(Error::InvalidConfig("bit sequence is empty".into()));
    }
    if bits.len() < n {
        return Err(Error::InsufficientData {
            required: n,
            available: bits.len(),
            unit: "shots",
        });
    }
    let counts = bits
        .chunks_exact(n)
        .map(|block| {
            block.iter().try_fold(0u32, |acc, &b| match b {
                0 | 1 => Ok(acc + u32::from(b)),
                other => Err(Error::InvalidData(format!(
                    "bit value {other} is not 0 or 1"
                ))),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockMeanSeries { counts, n })
}

/// Value of S for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicator {
    pub value: f64,
    /// The window mean was exactly 0 or 1; `value` is then 1 by convention.
    pub degenerate: bool,
}

impl Indicator {
    const DEGENERATE: Indicator = Indicator {
        value: 1.0,
        degenerate: true,
    };
}

/// S for a window of block means, evaluated in floating point.
pub fn fluctuation_indicator(window: &[f64], n: usize) -> Result<Indicator> {
    let m = window.len();
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "a window needs m >= 2 block means, got {m}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidConfig("block size must be positive".into()));
    }
    if let Some(bad) = window.iter().find(|y| !(0.0..=1.0).contains(*y)) {
        return Err(Error::InvalidData(format!(
            "block mean {bad} outside [0, 1]"
        )));
    }
    let mean = window.iter().sum::<f64>() / m as f64;
    if mean <= 0.0 || mean >= 1.0 {
        return Ok(Indicator::DEGENERATE);
    }
    let sample_var = window.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let binomial_var = mean * (1.0 - mean) / n as f64;
    Ok(Indicator {
        value: sample_var / binomial_var,
        degenerate: false,
    })
}

/// S for a window given as per-block one-counts, in exact integer arithmetic.
pub fn indicator_from_counts(counts: &[u32], n: usize) -> Result<Indicator> {
    let m = counts.len();
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "a window needs m >= 2 blocks, got {m}"
        )));
    }
    if let Some(bad) = counts.iter().find(|&&k| k as usize > n) {
        return Err(Error::InvalidData(format!(
            "block count {bad} exceeds block size {n}"
        )));
    }
    let (sum, sum_sq) = counts.iter().fold((0u128, 0u128), |(s, s2), &k| {
        let k = u128::from(k);
        (s + k, s2 + k * k)
    });
    Ok(indicator_from_sums(sum, sum_sq, n, m))
}

fn indicator_from_sums(sum: u128, sum_sq: u128, n: usize, m: usize) -> Indicator {
    let (n128, m128) = (n as u128, m as u128);
    let total = n128 * m128;
    if sum == 0 || sum == total {
        return Indicator::DEGENERATE;
    }
    // m Σk² − K² ≥ 0 by Cauchy–Schwarz.
    let spread = m128 * sum_sq - sum * sum;
    let num = n128 * m128 * spread;
    let den = (m128 - 1) * sum * (total - sum);
    Indicator {
        value: num as f64 / den as f64,
        degenerate: false,
    }
}

/// Sliding-window indicator series for one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSeries {
    values: Vec<f64>,
    degenerate: Vec<bool>,
    n_blocks: usize,
    config: WindowConfig,
}

impl FluctuationSeries {
    /// Builds a series from precomputed values, e.g. when reloading a scan.
    pub fn from_parts(
        values: Vec<f64>,
        degenerate: Vec<bool>,
        n_blocks: usize,
        config: WindowConfig,
    ) -> Result<Self> {
        config.validate()?;
        if values.len() != degenerate.len() {
            return Err(Error::InvalidData(format!(
                "{} values but {} degenerate flags",
                values.len(),
                degenerate.len()
            )));
        }
        if n_blocks < config.m || values.len() != n_blocks - config.m + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} windows do not match {n_blocks} blocks with m = {}",
                values.len(),
                config.m
            )));
        }
        Ok(Self {
            values,
            degenerate,
            n_blocks,
            config,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    /// Number of windows `l = M - m + 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of blocks `M` in the scanned stream.
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn config(&self) -> &WindowConfig {
        &self.config
    }

    /// First block of window `i` (the stride is one block).
    pub fn window_start_block(&self, i: usize) -> usize {
        i
    }

    /// Blocks covered by window `i`.
    pub fn window_blocks(&self, i: usize) -> std::ops::Range<usize> {
        i..i + self.config.m
    }
}

/// Indicator series of a single-qubit stream: block means, then a stride-1 window of `m` blocks.
pub fn scan(bits: &[u8], config: &WindowConfig) -> Result<FluctuationSeries> {
    config.validate()?;
    let (n, m) = (config.n, config.m);
    let required = n * m;
    if bits.len() < required {
        return Err(Error::InsufficientData {
            required,
            available: bits.len(),
            unit: "shots",
        });
    }
    let blocks = block_means(bits, n)?;
    let counts = blocks.counts();
    let n_blocks = counts.len();

    let mut sum: u128 = 0;
    let mut sum_sq: u128 = 0;
    for &k in &counts[..m] {
        sum += u128::from(k);
        sum_sq += u128::from(k) * u128::from(k);
    }
    let windows = n_blocks - m + 1;
    let mut values = Vec::with_capacity(windows);
    let mut degenerate = Vec::with_capacity(windows);
    for i in 0..windows {
        if i > 0 {
            let (out, inc) = (u128::from(counts[i - 1]), u128::from(counts[i + m - 1]));
            sum = sum + inc - out;
            sum_sq = sum_sq + inc * inc - out * out;
        }
        let ind = indicator_from_sums(sum, sum_sq, n, m);
        values.push(ind.value);
        degenerate.push(ind.degenerate);
    }
    Ok(FluctuationSeries {
        values,
        degenerate,
        n_blocks,
        config: *config,
    })
}

/// [`scan`] applied to every qubit of a shot matrix.
pub fn scan_matrix(shots: &ShotMatrix, config: &WindowConfig) -> Result<Vec<FluctuationSeries>> {
    (0..shots.n_qubits())
        .into_par_iter()
        .map(|q| scan(&shots.column(q), config))
        .collect()
}

/// Null distribution of S for i.i.d. shots: approximately χ²_{m-1}/(m-1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullModel {
    pub m: usize,
    pub dof: u32,
    pub mean: f64,
    pub variance: f64,
}

pub fn null_model(m: usize) -> Result<NullModel> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("m must be >= 2, got {m}")));
    }
    let dof =
        u32::try_from(m - 1).map_err(|_| Error::InvalidConfig(format!("m = {m} is too large")))?;
    Ok(NullModel {
        m,
        dof,
        mean: 1.0,
        variance: 2.0 / f64::from(dof),
    })
}

impl NullModel {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Density of χ²_{dof}/dof at `s`.
    pub fn pdf(&self, s: f64) -> Result<f64> {
        let k = f64::from(self.dof);
        Ok(k * chi2_pdf(k * s, self.dof)?)
    }

    pub fn cdf(&self, s: f64) -> Result<f64> {
        chi2_cdf(f64::from(self.dof) * s, self.dof)
    }

    pub fn survival(&self, s: f64) -> Result<f64> {
        chi2_survival(f64::from(self.dof) * s, self.dof)
    }
}
