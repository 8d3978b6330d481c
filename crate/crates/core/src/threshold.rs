//! Conversions between an indicator threshold and a tail probability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{chi2_survival, normal_survival};

/// Which variance a Gaussian approximation of the indicator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofConvention {
    /// σ² = 2/m
    M,
    /// σ² = 2/(m-1)
    MMinusOne,
}

/// How a threshold on S maps to a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "String", into = "String")]
pub enum PValueMethod {
    /// One-sided upper tail of χ²_{m-1}/(m-1). The default.
    #[default]
    Chi2Upper,
    /// Two-sided Gaussian tail `2 Φ̄(|s-1|/σ)`. With [`DofConvention::M`] this
    /// is the "paper-compat" conversion that gives 6.334e-5 at s = 1.5, m = 128.
    GaussianTwoSided(DofConvention),
}

impl PValueMethod {
    pub const PAPER_COMPAT: PValueMethod = PValueMethod::GaussianTwoSided(DofConvention::M);

    pub fn all() -> [PValueMethod; 3] {
        [
            PValueMethod::Chi2Upper,
            PValueMethod::GaussianTwoSided(DofConvention::M),
            PValueMethod::GaussianTwoSided(DofConvention::MMinusOne),
        ]
    }

    pub fn is_paper_compat(&self) -> bool {
        *self == Self::PAPER_COMPAT
    }
}

impl fmt::Display for PValueMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PValueMethod::Chi2Upper => "chi2",
            PValueMethod::GaussianTwoSided(DofConvention::M) => "gaussian-m",
            PValueMethod::GaussianTwoSided(DofConvention::MMinusOne) => "gaussian-m1",
        })
    }
}

impl From<PValueMethod> for String {
    fn from(m: PValueMethod) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for PValueMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for PValueMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" | "chi2-upper" => Ok(PValueMethod::Chi2Upper),
            "gaussian-m" | "gaussian" | "paper-compat" => Ok(PValueMethod::PAPER_COMPAT),
            "gaussian-m1" => Ok(PValueMethod::GaussianTwoSided(DofConvention::MMinusOne)),
            other => Err(Error::InvalidConfig(format!(
                "unknown p-value method '{other}' (expected chi2, gaussian-m or gaussian-m1)"
            ))),
        }
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("m must be >= 2, got {m}")));
    }
    Ok(())
}

fn gaussian_sigma(m: usize, dof: DofConvention) -> f64 {
    let denom = match dof {
        DofConvention::M => m as f64,
        DofConvention::MMinusOne => (m - 1) as f64,
    };
    (2.0 / denom).sqrt()
}

/// Tail probability corresponding to threshold `s` for windows of `m` blocks.
pub fn pvalue_of_threshold(s: f64, m: usize, method: PValueMethod) -> Result<f64> {
    check_m(m)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!(
            "threshold must be positive and finite, got {s}"
        )));
    }
    match method {
        PValueMethod::Chi2Upper => {
            let dof = (m - 1) as u32;
            chi2_survival(f64::from(dof) * s, dof)
        }
        PValueMethod::GaussianTwoSided(conv) => {
            let z = (s - 1.0).abs() / gaussian_sigma(m, conv);
            Ok(2.0 * normal_survival(z))
        }
    }
}

/// Inverse of [`pvalue_of_threshold`] by bisection.
///
/// The Gaussian two-sided tail is symmetric about s = 1; the upper branch
/// (s >= 1) is returned since detection flags large S.
pub fn threshold_of_pvalue(p: f64, m: usize, method: PValueMethod) -> Result<f64> {
    check_m(m)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "p-value must lie in (0, 1), got {p}"
        )));
    }
    let f = |s: f64| pvalue_of_threshold(s, m, method);
    let mut lo = match method {
        PValueMethod::Chi2Upper => 0.0,
        PValueMethod::GaussianTwoSided(_) => 1.0,
    };
    let mut hi = 2.0;
    while f(hi)? > p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain(format!("p-value {p} is not bracketable")));
        }
    }
    // f(lo) >= p >= f(hi); f(0) is taken as 1 for the chi-squared tail.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (p_lo, p_hi) = (if lo > 0.0 { f(lo)? } else { 1.0 }, f(hi)?);
    Ok(if (p_lo - p).abs() < (p_hi - p).abs() && lo > 0.0 {
        lo
    } else {
        hi
    })
}
