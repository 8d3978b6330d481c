//! Synthetic shot streams with ground-truth labels and null-distribution sampling.

mod null;
mod presets;
mod telegraph;

pub use null::{
    moments, null_density_check, sample_null, sample_scaled_chi2, validate_null, DensityCheck,
    HistogramBin, NullValidation, KS_COEFF_1PCT, MEAN_TOLERANCE, MIN_DENSITY_SAMPLES,
    VARIANCE_REL_TOLERANCE,
};
pub use presets::{
    bell_baseline_error, bell_relaxation_mean, Preset, Scenario, EXCITED_BASELINE_ERROR,
};
pub use telegraph::{
    bell_ideal, block_variance, draw_episodes, expected_indicator, expected_window_indicator,
    overdispersion_indicator, point_ideal, simulate_stream, CircuitSpec, Episode, FlipChannel,
    LabeledShotMatrix, Regime, TelegraphErrorModel,
};
