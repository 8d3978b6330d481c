//! Monte Carlo samples of S under the i.i.d. null and a goodness-of-fit check
//! against χ²_{m-1}/(m-1).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, ChiSquared, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{indicator_from_counts, null_model};

/// Fewest samples accepted by [`null_density_check`].
pub const MIN_DENSITY_SAMPLES: usize = 10_000;

/// Kolmogorov asymptotic coefficient `sqrt(-ln(α/2)/2)` at α = 0.01.
pub const KS_COEFF_1PCT: f64 = 1.627_617_987_795_464_6;

/// Per-sample generator: stream `index` of the master seed, so results do not
/// depend on how samples are spread over threads.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `count` values of S for windows of `m` blocks of `n` i.i.d. Bernoulli(`p1`) shots.
///
/// The one-count of each block is drawn as Binomial(`n`, `p1`), the exact law of
/// a sum of `n` Bernoulli shots.
pub fn sample_null(p1: f64, n: usize, m: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::Domain(format!("P1 must lie in (0, 1), got {p1}")));
    }
    if n < 2 || m < 2 {
        return Err(Error::InvalidConfig(format!(
            "need n >= 2 and m >= 2, got n={n}, m={m}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidConfig("sample count must be >= 1".into()));
    }
    let binom = Binomial::new(n as u64, p1)
        .map_err(|e| Error::InvalidConfig(format!("binomial({n}, {p1}): {e}")))?;
    (0..count as u64)
        .into_par_iter()
        .map_init(
            || vec![0u32; m],
            |counts, i| {
                let mut rng = sample_rng(seed, i);
                for c in counts.iter_mut() {
                    *c = binom.sample(&mut rng) as u32;
                }
                indicator_from_counts(counts, n).map(|ind| ind.value)
            },
        )
        .collect()
}

/// Exact draws from χ²_{dof}/dof.
pub fn sample_scaled_chi2(dof: u32, count: usize, seed: u64) -> Result<Vec<f64>> {
    let dist = ChiSquared::new(f64::from(dof))
        .map_err(|e| Error::InvalidConfig(format!("chi-squared({dof}): {e}")))?;
    let k = f64::from(dof);
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| dist.sample(&mut sample_rng(seed, i)) / k)
        .collect())
}

/// Sample mean and unbiased sample variance.
pub fn moments(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub empirical_density: f64,
    /// Bin average of the χ²_{m-1}/(m-1) density.
    pub theoretical_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCheck {
    pub samples: usize,
    pub m: usize,
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
    pub passes: bool,
    pub histogram: Vec<HistogramBin>,
}

/// Kolmogorov–Smirnov distance between `samples` and χ²_{m-1}/(m-1), plus a
/// histogram over mean ± 6σ for plotting.
pub fn null_density_check(samples: &[f64], m: usize, bins: usize) -> Result<DensityCheck> {
    if samples.len() < MIN_DENSITY_SAMPLES {
        return Err(Error::InsufficientData {
            required: MIN_DENSITY_SAMPLES,
            available: samples.len(),
            unit: "samples",
        });
    }
    if bins == 0 {
        return Err(Error::InvalidConfig(
            "histogram needs at least one bin".into(),
        ));
    }
    let model = null_model(m)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        let f = model.cdf(s.max(0.0))?;
        ks = ks
            .max((f - i as f64 / total).abs())
            .max(((i + 1) as f64 / total - f).abs());
    }
    let critical = KS_COEFF_1PCT / total.sqrt();

    let lo = (1.0 - 6.0 * model.std_dev()).max(0.0);
    let hi = 1.0 + 6.0 * model.std_dev();
    let width = (hi - lo) / bins as f64;
    let mut histogram = Vec::with_capacity(bins);
    for b in 0..bins {
        let (a, z) = (lo + b as f64 * width, lo + (b + 1) as f64 * width);
        let count = sorted.partition_point(|&s| s < z) - sorted.partition_point(|&s| s < a);
        histogram.push(HistogramBin {
            lo: a,
            hi: z,
            count,
            empirical_density: count as f64 / (total * width),
            theoretical_density: (model.cdf(z)? - model.cdf(a)?) / width,
        });
    }
    Ok(DensityCheck {
        samples: sorted.len(),
        m,
        ks_statistic: ks,
        ks_critical_1pct: critical,
        passes: ks < critical,
        histogram,
    })
}

/// Tolerance on the sample mean of S around 1.
pub const MEAN_TOLERANCE: f64 = 0.005;
/// Relative tolerance on the sample variance around 2/(m-1).
pub const VARIANCE_REL_TOLERANCE: f64 = 0.10;

/// Moment and density checks for one `P1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullValidation {
    pub p1: f64,
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub expected_variance: f64,
    pub mean_pass: bool,
    pub variance_pass: bool,
    pub density: DensityCheck,
}

pub fn validate_null(
    p1: f64,
    n: usize,
    m: usize,
    count: usize,
    seed: u64,
    bins: usize,
) -> Result<NullValidation> {
    if count < MIN_DENSITY_SAMPLES {
        return Err(Error::InsufficientData {
            required: MIN_DENSITY_SAMPLES,
            available: count,
            unit: "samples",
        });
    }
    let samples = sample_null(p1, n, m, count, seed)?;
    let (mean, variance) = moments(&samples);
    let expected_variance = null_model(m)?.variance;
    Ok(NullValidation {
        p1,
        n,
        m,
        samples: count,
        mean,
        variance,
        expected_variance,
        mean_pass: (mean - 1.0).abs() <= MEAN_TOLERANCE,
        variance_pass: ((variance - expected_variance) / expected_variance).abs()
            <= VARIANCE_REL_TOLERANCE,
        density: null_density_check(&samples, m, bins)?,
    })
}
