//! Detection of temporal fluctuations in qubit measurement streams.
//!
//! Shots are grouped into blocks of `n`; a window of `m` consecutive blocks is
//! scored by the variance-ratio indicator S (sample variance of block means over
//! the binomial variance implied by the window mean). Under i.i.d. shots S is
//! close to χ²_{m-1}/(m-1); windows whose S exceeds a threshold are labelled
//! anomalous and their shots removed before estimating observables.
//!
//! ```
//! use qfluct_core::{scan, WindowConfig};
//!
//! let bits: Vec<u8> = (0..4096).map(|i| (i % 2) as u8).collect();
//! let series = scan(&bits, &WindowConfig::new(8, 16)).unwrap();
//! assert_eq!(series.len(), 4096 / 8 - 16 + 1);
//! assert!(series.values().iter().all(|&s| s == 0.0));
//! ```

pub mod detection;
pub mod error;
pub mod estimation;
pub mod shots;
pub mod simulator;
pub mod special;
pub mod stats;
pub mod threshold;

pub use detection::{classify, post_select, AnomalyMask, ShotPartition};
pub use error::{Error, Result};
pub use estimation::{
    empirical_distribution, expectation_series, hellinger_fidelity, mitigation_report,
    parity_expectation, shot_parity_mean, ExpectationSeries, MitigationReport, OutcomeDistribution,
    SubsetReport,
};
pub use shots::ShotMatrix;
pub use special::chi2_survival;
pub use stats::{
    block_means, fluctuation_indicator, indicator_from_counts, null_model, scan, scan_matrix,
    BlockMeanSeries, FluctuationSeries, Indicator, NullModel, WindowConfig, DEFAULT_THRESHOLD,
};
pub use threshold::{pvalue_of_threshold, threshold_of_pvalue, DofConvention, PValueMethod};
