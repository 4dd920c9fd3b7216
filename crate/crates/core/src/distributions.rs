//! Continuous distributions used as dynamic concept sources.
//!
//! A concept backed by a distribution reads as the tail probability above a
//! cutoff, e.g. "tall" as `P(height > 180)` for a normally distributed
//! height. Only the `>` comparison is provided; `<` is its complement.

use statrs::distribution::{ContinuousCDF, Normal, Uniform};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("normal standard deviation must be finite and > 0, got {0}")]
    InvalidStd(f64),
    #[error("uniform bounds must be finite with lo < hi, got [{0}, {1}]")]
    InvalidBounds(f64, f64),
}

/// A continuous distribution over the reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousDist {
    Normal { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ContinuousDist {
    pub fn normal(mean: f64, std: f64) -> Result<Self, DistError> {
        if !mean.is_finite() || !std.is_finite() || std <= 0.0 {
            return Err(DistError::InvalidStd(std));
        }
        Ok(ContinuousDist::Normal { mean, std })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistError> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(DistError::InvalidBounds(lo, hi));
        }
        Ok(ContinuousDist::Uniform { lo, hi })
    }

    /// `P(X > cutoff)`, the complementary CDF, clamped to [0, 1].
    pub fn prob_greater_than(&self, cutoff: f64) -> f64 {
        let p = match *self {
            ContinuousDist::Normal { mean, std } => {
                // Parameters are validated on construction.
                let normal = Normal::new(mean, std).expect("validated normal parameters");
                normal.sf(cutoff)
            }
            ContinuousDist::Uniform { lo, hi } => {
                if cutoff <= lo {
                    1.0
                } else if cutoff >= hi {
                    0.0
                } else {
                    Uniform::new(lo, hi)
                        .expect("validated uniform parameters")
                        .sf(cutoff)
                }
            }
        };
        p.clamp(0.0, 1.0)
    }

    /// `P(X <= cutoff)`, the complement of [`Self::prob_greater_than`].
    pub fn prob_at_most(&self, cutoff: f64) -> f64 {
        1.0 - self.prob_greater_than(cutoff)
    }
}
