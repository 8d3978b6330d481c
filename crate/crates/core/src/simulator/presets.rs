//! Ready-made scenarios: a continuously excited qubit, a Bell pair and a
//! three-qubit sampler circuit with a supplied ideal distribution.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimation::OutcomeDistribution;

use super::telegraph::{
    bell_ideal, point_ideal, CircuitSpec, Episode, FlipChannel, TelegraphErrorModel,
};

/// Readout-level flip rate of about 1%.
pub const EXCITED_BASELINE_ERROR: f64 = 0.01;

/// Per-qubit flip rate giving ⟨Z0 Z1⟩ = (1 - 2ε)² = 0.97 on a Bell pair.
pub fn bell_baseline_error() -> f64 {
    0.5 * (1.0 - 0.97f64.sqrt())
}

/// Mean relaxation probability giving ⟨Z0 Z1⟩ = 0.97 (1 - p̄) = 0.85 during episodes.
pub fn bell_relaxation_mean() -> f64 {
    1.0 - 0.85 / 0.97
}

/// Episodes placed at fixed fractions of the run.
const EPISODE_FRACTIONS: [(f64, f64); 2] = [(0.25, 0.5), (0.7, 0.85)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Excited1q,
    Bell,
    Sampler,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excited-1q" => Ok(Preset::Excited1q),
            "bell" => Ok(Preset::Bell),
            "sampler" => Ok(Preset::Sampler),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (expected excited-1q, bell or sampler)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Excited1q => "excited-1q",
            Preset::Bell => "bell",
            Preset::Sampler => "sampler",
        })
    }
}

/// Circuit, error model and sampling interval for one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub circuit: CircuitSpec,
    pub model: TelegraphErrorModel,
    pub sample_interval: f64,
}

impl Preset {
    /// Default seconds per shot.
    pub fn sample_interval(&self) -> f64 {
        match self {
            Preset::Excited1q | Preset::Bell => 6e-4,
            Preset::Sampler => 3e-4,
        }
    }

    /// Builds the scenario for a run of `n_shots`. `Sampler` requires `ideal`.
    ///
    /// Episodes are scripted at fixed fractions of the run duration; clear
    /// `model.episodes` to use the exponential regime process instead.
    pub fn scenario(&self, n_shots: usize, ideal: Option<OutcomeDistribution>) -> Result<Scenario> {
        let sample_interval = self.sample_interval();
        let duration = n_shots as f64 * sample_interval;
        let episodes = EPISODE_FRACTIONS
            .iter()
            .map(|&(a, b)| Episode {
                start: a * duration,
                end: b * duration,
            })
            .collect();
        let (circuit, model) = match self {
            Preset::Excited1q => (
                CircuitSpec {
                    name: "excited-1q".into(),
                    ideal: ideal.map_or_else(|| point_ideal("1"), Ok)?,
                },
                TelegraphErrorModel {
                    baseline_error: EXCITED_BASELINE_ERROR,
                    anomalous_dwell_mean: 110.0,
                    normal_dwell_mean: 230.0,
                    fast_low: 0.05,
                    fast_high: 0.15,
                    fast_dwell_mean: 0.3,
                    per_qubit_scope: vec![0],
                    channel: FlipChannel::Symmetric,
                    episodes: Some(episodes),
                },
            ),
            Preset::Bell => {
                let p = bell_relaxation_mean();
                (
                    CircuitSpec {
                        name: "bell".into(),
                        ideal: ideal.unwrap_or_else(bell_ideal),
                    },
                    TelegraphErrorModel {
                        baseline_error: bell_baseline_error(),
                        anomalous_dwell_mean: 110.0,
                        normal_dwell_mean: 230.0,
                        fast_low: 0.0,
                        fast_high: 2.0 * p,
                        fast_dwell_mean: 0.3,
                        per_qubit_scope: vec![1],
                        channel: FlipChannel::Relaxation,
                        episodes: Some(episodes),
                    },
                )
            }
            Preset::Sampler => {
                let ideal = ideal.ok_or_else(|| {
                    Error::InvalidConfig("the sampler preset needs an ideal distribution".into())
                })?;
                let scope = (0..ideal.n_qubits()).collect();
                (
                    CircuitSpec {
                        name: "sampler".into(),
                        ideal,
                    },
                    TelegraphErrorModel {
                        baseline_error: EXCITED_BASELINE_ERROR,
                        anomalous_dwell_mean: 30.0,
                        normal_dwell_mean: 60.0,
                        fast_low: 0.0,
                        fast_high: 0.2,
                        fast_dwell_mean: 0.3,
                        per_qubit_scope: scope,
                        channel: FlipChannel::Relaxation,
                        episodes: Some(episodes),
                    },
                )
            }
        };
        Ok(Scenario {
            circuit,
            model,
            sample_interval,
        })
    }
}
