//! Shot streams with step-like error episodes.
//!
//! The regime alternates between normal and anomalous with exponential dwell
//! times, or follows a scripted list of episodes. Inside an anomalous episode
//! the flip probability of the in-scope qubits itself switches between two
//! levels (a fast telegraph), which is what makes block means overdispersed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::OutcomeDistribution;
use crate::shots::ShotMatrix;

// ChaCha stream ids; each random source gets its own stream of the master seed.
const STREAM_REGIME: u64 = 0;
const STREAM_FAST: u64 = 1;
const STREAM_SHOTS: u64 = 2;

/// How an anomalous flip probability acts on a bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipChannel {
    /// Either value flips; the fast level replaces the baseline rate.
    #[default]
    Symmetric,
    /// Only 1 → 0, followed by the symmetric baseline readout flip.
    Relaxation,
    /// Only 0 → 1, followed by the symmetric baseline readout flip.
    Excitation,
}

/// An anomalous interval in seconds from the start of the stream, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub start: f64,
    pub end: f64,
}

impl Episode {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelegraphErrorModel {
    /// Per-qubit, per-shot flip probability ε₀.
    pub baseline_error: f64,
    /// Mean anomalous-episode duration, seconds.
    pub anomalous_dwell_mean: f64,
    /// Mean time between episodes, seconds.
    pub normal_dwell_mean: f64,
    pub fast_low: f64,
    pub fast_high: f64,
    /// Mean dwell of each fast level, seconds.
    pub fast_dwell_mean: f64,
    /// Qubits whose flip rate changes during episodes.
    pub per_qubit_scope: Vec<usize>,
    #[serde(default)]
    pub channel: FlipChannel,
    /// Scripted episodes; when present they replace the exponential regime process.
    #[serde(default)]
    pub episodes: Option<Vec<Episode>>,
}

impl TelegraphErrorModel {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let probs = [
            ("baseline_error", self.baseline_error),
            ("fast_low", self.fast_low),
            ("fast_high", self.fast_high),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.fast_low > self.fast_high {
            return Err(Error::InvalidConfig(format!(
                "fast_low ({}) exceeds fast_high ({})",
                self.fast_low, self.fast_high
            )));
        }
        let dwells = [
            ("anomalous_dwell_mean", self.anomalous_dwell_mean),
            ("normal_dwell_mean", self.normal_dwell_mean),
            ("fast_dwell_mean", self.fast_dwell_mean),
        ];
        for (name, d) in dwells {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {d}"
                )));
            }
        }
        if let Some(q) = self.per_qubit_scope.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidConfig(format!(
                "per_qubit_scope names qubit {q} but the circuit has {n_qubits}"
            )));
        }
        if let Some(eps) = &self.episodes {
            let mut prev_end = f64::NEG_INFINITY;
            for e in eps {
                if !(e.start >= 0.0 && e.end > e.start && e.start >= prev_end) {
                    return Err(Error::InvalidConfig(format!(
                        "episodes must be ordered, non-overlapping and non-empty; got [{}, {})",
                        e.start, e.end
                    )));
                }
                prev_end = e.end;
            }
        }
        Ok(())
    }

    /// Copy with anomalies switched off (an empty scripted schedule).
    pub fn without_anomalies(&self) -> Self {
        Self {
            episodes: Some(Vec::new()),
            ..self.clone()
        }
    }

    /// Mean of the fast flip level (both levels have the same dwell law).
    pub fn fast_mean(&self) -> f64 {
        0.5 * (self.fast_low + self.fast_high)
    }

    /// Stationary per-shot variance of the fast flip level.
    pub fn fast_variance(&self) -> f64 {
        (0.5 * (self.fast_high - self.fast_low)).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub name: String,
    pub ideal: OutcomeDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Normal,
    Anomalous,
}

/// Simulated shots with ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledShotMatrix {
    pub shots: ShotMatrix,
    pub regime: Vec<Regime>,
    /// Row-major `L × Q`: probability that the reported bit differs from the ideal bit.
    pub true_flip_prob: Vec<f64>,
    pub episodes: Vec<Episode>,
}

impl LabeledShotMatrix {
    pub fn flip_prob(&self, shot: usize, qubit: usize) -> f64 {
        self.true_flip_prob[shot * self.shots.n_qubits() + qubit]
    }

    /// Episodes that overlap the recorded stream.
    pub fn episode_count(&self) -> usize {
        self.episodes.len()
    }

    /// Shot-index ranges of anomalous runs.
    pub fn anomalous_runs(&self) -> Vec<std::ops::Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, r) in self.regime.iter().enumerate() {
            match (r, start) {
                (Regime::Anomalous, None) => start = Some(i),
                (Regime::Normal, Some(s)) => {
                    runs.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.regime.len());
        }
        runs
    }
}

/// Anomalous episodes over `[0, duration)` drawn from the exponential regime process.
///
/// The process starts in the normal regime; an episode still running at
/// `duration` is truncated there.
pub fn draw_episodes(
    model: &TelegraphErrorModel,
    duration: f64,
    seed: u64,
) -> Result<Vec<Episode>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_REGIME);
    draw_episodes_with(model, duration, &mut rng)
}

fn draw_episodes_with(
    model: &TelegraphErrorModel,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Episode>> {
    let normal = exp_dist(model.normal_dwell_mean)?;
    let anomalous = exp_dist(model.anomalous_dwell_mean)?;
    let mut episodes = Vec::new();
    let mut t = normal.sample(rng);
    while t < duration {
        let end = t + anomalous.sample(rng);
        episodes.push(Episode {
            start: t,
            end: end.min(duration),
        });
        t = end + normal.sample(rng);
    }
    Ok(episodes)
}

fn exp_dist(mean: f64) -> Result<Exp<f64>> {
    Exp::new(1.0 / mean).map_err(|e| Error::InvalidConfig(format!("dwell mean {mean}: {e}")))
}

/// Cumulative table for sampling ideal bitstrings.
struct IdealSampler {
    outcomes: Vec<Vec<u8>>,
    cumulative: Vec<f64>,
}

impl IdealSampler {
    fn new(ideal: &OutcomeDistribution) -> Self {
        let mut outcomes = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (key, &p) in ideal.probs() {
            if p > 0.0 {
                acc += p;
                outcomes.push(key.bytes().map(|c| c - b'0').collect());
                cumulative.push(acc);
            }
        }
        // Normalize away summation error so the last bucket closes at 1.
        for c in &mut cumulative {
            *c /= acc;
        }
        Self {
            outcomes,
            cumulative,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> &[u8] {
        if self.outcomes.len() == 1 {
            return &self.outcomes[0];
        }
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        &self.outcomes[idx.min(self.outcomes.len() - 1)]
    }
}

/// Generates `n_shots` records at interval `sample_interval`; deterministic per seed.
pub fn simulate_stream(
    circuit: &CircuitSpec,
    model: &TelegraphErrorModel,
    n_shots: usize,
    sample_interval: f64,
    seed: u64,
) -> Result<LabeledShotMatrix> {
    let n_qubits = circuit.ideal.n_qubits();
    model.validate(n_qubits)?;
    if n_shots == 0 {
        return Err(Error::InvalidConfig("shot count must be >= 1".into()));
    }
    if !(sample_interval > 0.0 && sample_interval.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sample interval must be positive, got {sample_interval}"
        )));
    }
    let duration = n_shots as f64 * sample_interval;
    let episodes = match &model.episodes {
        Some(scripted) => scripted
            .iter()
            .filter(|e| e.start < duration)
            .map(|e| Episode {
                start: e.start,
                end: e.end.min(duration),
            })
            .collect(),
        None => draw_episodes(model, duration, seed)?,
    };

    let mut fast_rng = ChaCha8Rng::seed_from_u64(seed);
    fast_rng.set_stream(STREAM_FAST);
    let mut shot_rng = ChaCha8Rng::seed_from_u64(seed);
    shot_rng.set_stream(STREAM_SHOTS);
    let fast_dwell = exp_dist(model.fast_dwell_mean)?;
    let sampler = IdealSampler::new(&circuit.ideal);
    let in_scope: Vec<bool> = (0..n_qubits)
        .map(|q| model.per_qubit_scope.contains(&q))
        .collect();
    let eps = model.baseline_error;

    let mut bits = Vec::with_capacity(n_shots * n_qubits);
    let mut flip_prob = Vec::with_capacity(n_shots * n_qubits);
    let mut regime = Vec::with_capacity(n_shots);

    let mut episode_idx = 0;
    let mut current_episode: Option<usize> = None;
    let mut fast_high = false;
    let mut next_fast_switch = 0.0;

    for i in 0..n_shots {
        let t = i as f64 * sample_interval;
        while episode_idx < episodes.len() && episodes[episode_idx].end <= t {
            episode_idx += 1;
        }
        let in_episode = episode_idx < episodes.len() && episodes[episode_idx].contains(t);
        if in_episode && current_episode != Some(episode_idx) {
            // Entering an episode: draw the fast level from its stationary law.
            current_episode = Some(episode_idx);
            fast_high = fast_rng.random_bool(0.5);
            next_fast_switch = t + fast_dwell.sample(&mut fast_rng);
        }
        if in_episode {
            while t >= next_fast_switch {
                fast_high = !fast_high;
                next_fast_switch += fast_dwell.sample(&mut fast_rng);
            }
        }
        let fast = if fast_high {
            model.fast_high
        } else {
            model.fast_low
        };
        regime.push(if in_episode {
            Regime::Anomalous
        } else {
            Regime::Normal
        });

        let ideal = sampler.sample(&mut shot_rng);
        for (q, &bit) in ideal.iter().enumerate() {
            let (out, p_diff) = if in_episode && in_scope[q] {
                apply_anomalous(bit, fast, eps, model.channel, &mut shot_rng)
            } else {
                (bit ^ u8::from(shot_rng.random_bool(eps)), eps)
            };
            bits.push(out);
            flip_prob.push(p_diff);
        }
    }

    Ok(LabeledShotMatrix {
        shots: ShotMatrix::from_flat(bits, n_qubits, sample_interval)?,
        regime,
        true_flip_prob: flip_prob,
        episodes,
    })
}

/// Returns the reported bit and the probability that it differs from `bit`.
fn apply_anomalous(
    bit: u8,
    fast: f64,
    eps: f64,
    channel: FlipChannel,
    rng: &mut impl Rng,
) -> (u8, f64) {
    let directional = match channel {
        FlipChannel::Symmetric => {
            return (bit ^ u8::from(rng.random_bool(fast)), fast);
        }
        FlipChannel::Relaxation => bit == 1,
        FlipChannel::Excitation => bit == 0,
    };
    if directional {
        let moved = bit ^ u8::from(rng.random_bool(fast));
        let out = moved ^ u8::from(rng.random_bool(eps));
        (out, fast * (1.0 - eps) + (1.0 - fast) * eps)
    } else {
        (bit ^ u8::from(rng.random_bool(eps)), eps)
    }
}

/// `1 + n·Var_block(p) / (p̄(1-p̄))` for a qubit whose ideal outcome is deterministic.
///
/// `Var_block(p)` is the variance of the flip probability averaged over one
/// block of `n` shots spaced `sample_interval` apart. A symmetric two-level
/// telegraph with dwell mean `T` has autocorrelation `exp(-2|t|/T)`.
pub fn expected_indicator(
    model: &TelegraphErrorModel,
    n: usize,
    sample_interval: f64,
) -> Result<f64> {
    let p_mean = model.fast_mean();
    overdispersion_indicator(p_mean, block_variance(model, n, sample_interval), n)
}

/// `1 + n·var/(p̄(1-p̄))`.
pub fn overdispersion_indicator(p_mean: f64, block_var: f64, n: usize) -> Result<f64> {
    if !(p_mean > 0.0 && p_mean < 1.0) {
        return Err(Error::Domain(format!(
            "mean flip probability must lie in (0, 1), got {p_mean}"
        )));
    }
    Ok(1.0 + n as f64 * block_var / (p_mean * (1.0 - p_mean)))
}

/// Variance of the block-averaged fast flip level.
pub fn block_variance(model: &TelegraphErrorModel, n: usize, sample_interval: f64) -> f64 {
    let rho = (-2.0 * sample_interval / model.fast_dwell_mean).exp();
    let nf = n as f64;
    // Σ_{i,j<n} ρ^|i-j| = n + 2 Σ_{k=1}^{n-1} (n-k) ρ^k
    let pair_sum = nf
        + 2.0
            * (1..n)
                .map(|k| (nf - k as f64) * rho.powi(k as i32))
                .sum::<f64>();
    model.fast_variance() * pair_sum / (nf * nf)
}

/// Expected S for windows of `m` blocks lying entirely inside an episode.
///
/// Refines [`expected_indicator`] with the loss of between-block spread from
/// correlation between neighbouring blocks of the same window, and with the
/// reduced binomial variance `E[p(1-p)] = p̄(1-p̄) - Var(p)`.
pub fn expected_window_indicator(
    model: &TelegraphErrorModel,
    n: usize,
    m: usize,
    sample_interval: f64,
) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("m must be >= 2, got {m}")));
    }
    let p_mean = model.fast_mean();
    if !(p_mean > 0.0 && p_mean < 1.0) {
        return Err(Error::Domain(format!(
            "mean flip probability must lie in (0, 1), got {p_mean}"
        )));
    }
    let rho = (-2.0 * sample_interval / model.fast_dwell_mean).exp();
    let nf = n as f64;
    let var_block = block_variance(model, n, sample_interval);
    // Cov between block means k >= 1 blocks apart: a² ρ^{(k-1)n+1} (Σ_{j<n} ρ^j)² / n².
    let geo: f64 = (0..n).map(|j| rho.powi(j as i32)).sum();
    let base = model.fast_variance() * rho * geo * geo / (nf * nf);
    let rho_n = rho.powi(n as i32);
    let mf = m as f64;
    let mut cov_sum = 0.0;
    let mut lag_factor = 1.0;
    for k in 1..m {
        cov_sum += (mf - k as f64) * base * lag_factor;
        lag_factor *= rho_n;
    }
    let spread = var_block - 2.0 * cov_sum / (mf * (mf - 1.0));
    let binom = p_mean * (1.0 - p_mean);
    Ok((binom - model.fast_variance() + nf * spread) / binom)
}

/// Two-outcome Bell distribution `{00: 1/2, 11: 1/2}`.
pub fn bell_ideal() -> OutcomeDistribution {
    let probs: BTreeMap<String, f64> = [("00".to_string(), 0.5), ("11".to_string(), 0.5)].into();
    OutcomeDistribution::from_probs(probs, 1e-12).expect("static distribution")
}

/// Deterministic single-outcome distribution.
pub fn point_ideal(bits: &str) -> Result<OutcomeDistribution> {
    OutcomeDistribution::from_probs([(bits.to_string(), 1.0)].into(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_model() -> TelegraphErrorModel {
        TelegraphErrorModel {
            baseline_error: 0.01,
            anomalous_dwell_mean: 1.0,
            normal_dwell_mean: 2.0,
            fast_low: 0.05,
            fast_high: 0.15,
            fast_dwell_mean: 0.05,
            per_qubit_scope: vec![0],
            channel: FlipChannel::Symmetric,
            episodes: None,
        }
    }

    #[test]
    fn indicator_formula_examples() {
        assert_eq!(overdispersion_indicator(0.3, 0.0, 128).unwrap(), 1.0);
        assert!((overdispersion_indicator(0.1, 0.0025, 128).unwrap() - 4.5556).abs() < 1e-4);
        assert!((overdispersion_indicator(0.5, 0.0025, 128).unwrap() - 2.28).abs() < 1e-12);
        assert!(overdispersion_indicator(0.0, 0.0025, 128).is_err());
        assert!(overdispersion_indicator(1.0, 0.0025, 128).is_err());
    }

    #[test]
    fn block_variance_limits() {
        let mut m = base_model();
        // Very slow switching: no averaging inside a block.
        m.fast_dwell_mean = 1e9;
        assert!((block_variance(&m, 128, 1e-3) - 0.0025).abs() < 1e-9);
        // Equal levels: nothing to average.
        m.fast_low = 0.1;
        m.fast_high = 0.1;
        assert_eq!(expected_indicator(&m, 128, 1e-3).unwrap(), 1.0);
        // Very fast switching: block mean is nearly constant.
        let mut m = base_model();
        m.fast_dwell_mean = 1e-9;
        assert!(block_variance(&m, 128, 1e-3) < 0.0025 / 100.0);
    }

    #[test]
    fn validation_rejects_bad_models() {
        let mut m = base_model();
        m.fast_low = 0.2;
        assert!(m.validate(1).is_err());
        let mut m = base_model();
        m.normal_dwell_mean = 0.0;
        assert!(m.validate(1).is_err());
        let mut m = base_model();
        m.per_qubit_scope = vec![3];
        assert!(m.validate(2).is_err());
        let mut m = base_model();
        m.episodes = Some(vec![
            Episode {
                start: 2.0,
                end: 3.0,
            },
            Episode {
                start: 2.5,
                end: 4.0,
            },
        ]);
        assert!(m.validate(1).is_err());
    }

    #[test]
    fn scripted_episodes_label_shots() {
        let mut m = base_model();
        m.episodes = Some(vec![Episode {
            start: 0.01,
            end: 0.02,
        }]);
        let circuit = CircuitSpec {
            name: "one".into(),
            ideal: point_ideal("1").unwrap(),
        };
        let sim = simulate_stream(&circuit, &m, 40, 1e-3, 3).unwrap();
        assert_eq!(sim.anomalous_runs(), vec![10..20]);
        assert_eq!(sim.episode_count(), 1);
        assert_eq!(sim.flip_prob(0, 0), 0.01);
        let p = sim.flip_prob(15, 0);
        assert!(p == 0.05 || p == 0.15);
    }

    #[test]
    fn relaxation_only_moves_ones() {
        let mut m = base_model();
        m.baseline_error = 0.0;
        m.fast_low = 0.5;
        m.fast_high = 0.5;
        m.channel = FlipChannel::Relaxation;
        m.episodes = Some(vec![Episode {
            start: 0.0,
            end: 1e9,
        }]);
        let circuit = CircuitSpec {
            name: "zero".into(),
            ideal: point_ideal("0").unwrap(),
        };
        let sim = simulate_stream(&circuit, &m, 1000, 1e-3, 1).unwrap();
        assert!(sim.shots.as_flat().iter().all(|&b| b == 0));
        let circuit = CircuitSpec {
            name: "one".into(),
            ideal: point_ideal("1").unwrap(),
        };
        let sim = simulate_stream(&circuit, &m, 1000, 1e-3, 1).unwrap();
        let zeros = sim.shots.as_flat().iter().filter(|&&b| b == 0).count();
        assert!((400..600).contains(&zeros));
    }

    #[test]
    fn rejects_empty_stream() {
        let circuit = CircuitSpec {
            name: "bell".into(),
            ideal: bell_ideal(),
        };
        let mut m = base_model();
        m.per_qubit_scope = vec![1];
        assert!(simulate_stream(&circuit, &m, 0, 1e-3, 1).is_err());
        assert!(simulate_stream(&circuit, &m, 10, 0.0, 1).is_err());
    }
}
