use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfluct_core::simulator::{Preset, TelegraphErrorModel};
use qfluct_core::PValueMethod;
use serde::{Deserialize, Serialize};

pub const DEFAULT_N: usize = 128;
pub const DEFAULT_M: usize = 128;

/// Detect temporal fluctuation in qubit measurement streams.
///
/// Exit status: 0 on success, 1 for usage errors (bad flags or values),
/// 2 for data or config-file errors (unreadable or malformed input, too few shots).
#[derive(Debug, Parser)]
#[command(name = "qfluct", version, about, long_about)]
pub struct Cli {
    /// JSON object whose keys are the subcommand's long flag names in snake_case.
    /// Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a shot stream with telegraph-noise episodes and write shots plus labels.
    Simulate(SimulateArgs),
    /// Compute the sliding-window indicator S per qubit and flag anomalous windows.
    Scan(ScanArgs),
    /// Post-select normal blocks and report raw, normal and anomalous estimates.
    Mitigate(MitigateArgs),
    /// Monte Carlo check of S against the chi-squared null model.
    Validate(ValidateArgs),
    /// Convert between S thresholds and p-values under every method.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetArg {
    #[value(name = "excited-1q")]
    Excited1q,
    Bell,
    Sampler,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Excited1q => Preset::Excited1q,
            PresetArg::Bell => Preset::Bell,
            PresetArg::Sampler => Preset::Sampler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

/// How anomalous episodes are placed in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeSchedule {
    /// Fixed episodes at 25-50% and 70-85% of the run.
    Scripted,
    /// Exponential dwell times in each regime.
    Random,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Built-in scenario [default: excited-1q].
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Number of shots L [default: 500000].
    #[arg(long)]
    pub shots: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Anomalous episodes on or off [default: on].
    #[arg(long, value_enum)]
    pub anomaly: Option<Switch>,
    /// Episode placement [default: scripted].
    #[arg(long, value_enum)]
    pub regime: Option<EpisodeSchedule>,
    /// Ideal distribution JSON (bitstring -> probability); required for the sampler preset.
    #[arg(long, value_name = "FILE")]
    pub ideal: Option<PathBuf>,
    /// Seconds per shot, overriding the preset.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Shots CSV [default: shots.csv].
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Ground-truth labels CSV [default: <out stem>.labels.csv].
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Error model replacing the preset's; config file only.
    #[arg(skip)]
    pub model: Option<TelegraphErrorModel>,
}

/// Window geometry and threshold shared by `scan` and `mitigate`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct WindowArgs {
    /// Shots per block [default: 128].
    #[arg(long, short)]
    pub n: Option<usize>,
    /// Blocks per window [default: 128].
    #[arg(long, short)]
    pub m: Option<usize>,
    /// S threshold [default: 1.5]; conflicts with --p-value.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Per-window p-value, converted to an S threshold with --method.
    #[arg(long)]
    pub p_value: Option<f64>,
    /// p-value method: chi2, gaussian-m (paper-compat) or gaussian-m1 [default: chi2].
    #[arg(long)]
    pub method: Option<PValueMethod>,
    /// Seconds per shot for headerless (bits-only) shot files.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    /// Shots CSV (`t_s,bits` header, or one bits column with --tau).
    #[arg(long, short, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Output file [default: standard output].
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MitigateArgs {
    /// Shots CSV (`t_s,bits` header, or one bits column with --tau).
    #[arg(long, short, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// JSON report [default: standard output].
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Ideal distribution JSON for Hellinger fidelities.
    #[arg(long, value_name = "FILE")]
    pub ideal: Option<PathBuf>,
    /// Qubits in the Z-parity observable, comma separated [default: all].
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    /// Shot probabilities of outcome 1, comma separated [default: 0.5].
    #[arg(long, value_delimiter = ',')]
    pub p1: Option<Vec<f64>>,
    /// Shots per block [default: 128].
    #[arg(long, short)]
    pub n: Option<usize>,
    /// Blocks per window [default: 128].
    #[arg(long, short)]
    pub m: Option<usize>,
    /// Monte Carlo samples of S per P1 [default: 100000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Master seed; P1 number i uses seed + i [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Histogram bins over mean ± 6σ [default: 60].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Summary output [default: standard output].
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Histogram CSV with empirical and theoretical densities.
    #[arg(long, value_name = "FILE")]
    pub histogram: Option<PathBuf>,
    /// Summary format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ThresholdArgs {
    /// S threshold to convert to p-values.
    #[arg(long)]
    pub s: Option<f64>,
    /// p-value to convert to S thresholds.
    #[arg(long)]
    pub p: Option<f64>,
    /// Blocks per window [default: 128].
    #[arg(long, short)]
    pub m: Option<usize>,
    /// Restrict the table to one method.
    #[arg(long)]
    pub method: Option<PValueMethod>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
