//! Channel parameters and importance vectors shared by both schemes.

use crate::error::{Error, Result};

/// Minimum gap between consecutive importance weights.
const STRICT_GAP: f64 = 1e-12;
/// Sums within this distance of 1 are renormalized; further away is an error.
const RENORMALIZE_SLACK: f64 = 1e-9;

/// Per-block rate, power budget and mean channel power gain of a
/// quasi-static Rayleigh fading link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    rate: f64,
    power: f64,
    sigma2: f64,
    theta: f64,
}

/// `2^R - 1`, the SNR threshold of one bit block at rate `R`.
pub fn snr_threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

impl ChannelParams {
    pub fn new(rate: f64, power: f64, sigma2: f64) -> Result<Self> {
        for (name, v) in [("rate", rate), ("power", power), ("sigma2", sigma2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Argument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(ChannelParams {
            rate,
            power,
            sigma2,
            theta: snr_threshold(rate) / (power * sigma2),
        })
    }

    /// Parameterize by the threshold-to-average SNR ratio with `P = 1` and
    /// `sigma2 = (2^R - 1) / theta`.
    pub fn from_theta(rate: f64, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Argument(format!(
                "theta must be positive, got {theta}"
            )));
        }
        let mut p = ChannelParams::new(rate, 1.0, snr_threshold(rate) / theta)?;
        p.theta = theta;
        Ok(p)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `(2^R - 1) / (P sigma2)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Mean received SNR `P sigma2`.
    pub fn mean_snr(&self) -> f64 {
        self.power * self.sigma2
    }
}

/// Strictly decreasing positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector(Vec<f64>);

impl ImportanceVector {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Argument("importance vector is empty".into()));
        }
        if let Some(v) = d.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Argument(format!(
                "importance weights must be positive, got {v}"
            )));
        }
        if let Some(i) = d.windows(2).position(|w| w[0] - w[1] <= STRICT_GAP) {
            return Err(Error::Argument(format!(
                "importance weights must be strictly decreasing: d[{}] = {} vs d[{}] = {}",
                i + 1,
                d[i],
                i + 2,
                d[i + 1]
            )));
        }
        let sum: f64 = d.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_SLACK {
            return Err(Error::Argument(format!(
                "importance weights sum to {sum}, not 1"
            )));
        }
        Ok(ImportanceVector(d.into_iter().map(|v| v / sum).collect()))
    }

    /// Normalize arbitrary positive, strictly decreasing weights to sum one.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::Argument("weights must have a positive sum".into()));
        }
        ImportanceVector::new(w.iter().map(|v| v / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Merge adjacent pairs, halving the length. Requires an even length.
    pub fn aggregate_pairs(&self) -> Result<Self> {
        if !self.len().is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "cannot pair-aggregate a vector of length {}",
                self.len()
            )));
        }
        let merged: Vec<f64> = self.0.chunks(2).map(|c| c[0] + c[1]).collect();
        ImportanceVector::new(merged)
    }
}

impl std::ops::Index<usize> for ImportanceVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Named importance vectors used by the built-in sweeps.
pub mod presets {
    use super::ImportanceVector;

    /// `(5, 4, 3, 2) / 14`, used with `R = 0.1`.
    pub fn four_layer() -> ImportanceVector {
        ImportanceVector::from_weights(&[5.0, 4.0, 3.0, 2.0]).expect("valid preset")
    }

    /// `[100, 85, 70, 60, 50, 40, 25, 10] / 440`, used with `R = 0.1`.
    pub fn eight_layer() -> ImportanceVector {
        ImportanceVector::from_weights(&[100.0, 85.0, 70.0, 60.0, 50.0, 40.0, 25.0, 10.0])
            .expect("valid preset")
    }

    /// The 16-entry vector of the block-partition experiment, `/ 2560`.
    pub fn sixteen_layer() -> ImportanceVector {
        ImportanceVector::from_weights(&[
            1000.0, 300.0, 250.0, 200.0, 150.0, 110.0, 100.0, 90.0, 80.0, 70.0, 60.0, 50.0, 40.0,
            30.0, 20.0, 10.0,
        ])
        .expect("valid preset")
    }
}
