//! AWGN capacity, total information-density variance, and finite-blocklength
//! upper bounds on the ensemble error probability of an i.i.d. complex
//! Gaussian codebook.
//!
//! Rates are in bits per channel use, SNRs are linear, and `log` is base 2.
//! The blocklength `n` is a real number so that time-sharing fractions
//! `w n` can be passed directly.

use std::f64::consts::{LN_2, LOG2_E};

use crate::error::{Error, Result};
use crate::special::std_normal_cdf;

/// Below this exponent `exp` underflows; the bound is reported as exactly 0.
const EXP_UNDERFLOW: f64 = -745.0;
const GOLDEN_TOL: f64 = 1e-10;

/// Arguments of an error-bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub n: f64,
    pub rate: f64,
    pub snr: f64,
}

impl BoundQuery {
    pub fn new(n: f64, rate: f64, snr: f64) -> Result<Self> {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(Error::Argument(format!("blocklength {n} must be >= 0")));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Argument(format!("rate {rate} must be > 0")));
        }
        if !(snr >= 0.0) {
            return Err(Error::Argument(format!("snr {snr} must be >= 0")));
        }
        Ok(BoundQuery { n, rate, snr })
    }

    pub fn err_exp(&self) -> f64 {
        err_exp(self.n, self.rate, self.snr)
    }

    pub fn err_nor(&self) -> f64 {
        err_nor(self.n, self.rate, self.snr)
    }

    pub fn err_bound(&self) -> f64 {
        err_bound(self.n, self.rate, self.snr)
    }
}

/// `C(rho) = log2(1 + rho)`.
pub fn capacity(snr: f64) -> f64 {
    snr.ln_1p() * LOG2_E
}

/// Total information-density variance `log2(e)^2 * 2 rho / (1 + rho)`.
pub fn v_tot(snr: f64) -> f64 {
    LOG2_E * LOG2_E * 2.0 * snr / (1.0 + snr)
}

/// The random-coding exponent `max_{l in [0,1]} [l ln(1 + rho/(1+l)) - l R ln 2]`
/// in nats per channel use, together with its maximizer.
///
/// The objective is concave in `l`: a nonpositive slope at 0 puts the maximum
/// at 0 and a nonnegative slope at 1 puts it at 1. Otherwise golden-section
/// search runs on the interior and both endpoints are compared.
pub fn random_coding_exponent(rate: f64, snr: f64) -> (f64, f64) {
    let r_nats = rate * LN_2;
    let f = |l: f64| l * (snr / (1.0 + l)).ln_1p() - l * r_nats;
    let slope_at =
        |l: f64| (snr / (1.0 + l)).ln_1p() - l * snr / ((1.0 + l) * (1.0 + l + snr)) - r_nats;
    if slope_at(0.0) <= 0.0 {
        return (0.0, 0.0);
    }
    if slope_at(1.0) >= 0.0 {
        return (f(1.0), 1.0);
    }
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut best = (f(0.0), 0.0);
    for l in [0.5 * (a + b), 1.0] {
        let v = f(l);
        if v > best.0 {
            best = (v, l);
        }
    }
    best
}

/// Error-exponent bound `exp(-n E(R, rho))`, clamped to `[0, 1]`.
pub fn err_exp(n: f64, rate: f64, snr: f64) -> f64 {
    if n <= 0.0 || snr <= 0.0 {
        return 1.0;
    }
    let (exponent, _) = random_coding_exponent(rate, snr);
    let arg = -n * exponent;
    if arg < EXP_UNDERFLOW {
        0.0
    } else {
        arg.exp().clamp(0.0, 1.0)
    }
}

/// Normal-approximation bound
/// `min{1, Phi((sqrt(n)(R - C) + log2(n) / (2 sqrt(n))) / sqrt(V_tot)) + 2/sqrt(n)}`.
pub fn err_nor(n: f64, rate: f64, snr: f64) -> f64 {
    if n <= 4.0 || snr <= 0.0 {
        return 1.0;
    }
    let sqrt_n = n.sqrt();
    let z = (sqrt_n * (rate - capacity(snr)) + n.log2() / (2.0 * sqrt_n)) / v_tot(snr).sqrt();
    (std_normal_cdf(z) + 2.0 / sqrt_n).min(1.0)
}

/// The tighter of the two bounds, with `E(0, R, rho) = E(n, R, 0) = 1`.
pub fn err_bound(n: f64, rate: f64, snr: f64) -> f64 {
    if n <= 0.0 || snr <= 0.0 {
        return 1.0;
    }
    err_nor(n, rate, snr).min(err_exp(n, rate, snr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exponent_grid(rate: f64, snr: f64, points: usize) -> f64 {
        (0..=points)
            .map(|k| {
                let l = k as f64 / points as f64;
                l * (1.0 + snr / (1.0 + l)).ln() - l * rate * LN_2
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn exponent_ternary(rate: f64, snr: f64) -> f64 {
        let f = |l: f64| l * (1.0 + snr / (1.0 + l)).ln() - l * rate * LN_2;
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if f(m1) < f(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        f(0.5 * (a + b)).max(f(0.0)).max(f(1.0))
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(0.0), 0.0);
        assert!((capacity(1.0) - 1.0).abs() < 1e-15);
        assert!((capacity(3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn variance_values() {
        assert_eq!(v_tot(0.0), 0.0);
        assert!((v_tot(1.0) - LOG2_E * LOG2_E).abs() < 1e-15);
        let limit = 2.0 * LOG2_E * LOG2_E;
        assert!((v_tot(1e6) - limit).abs() / limit < 1e-5);
    }

    #[test]
    fn exponent_bound_saturates_above_capacity() {
        // slope at 0 is ln 2 (1 - 1.5) < 0
        assert_eq!(err_exp(100.0, 1.5, 1.0), 1.0);
        assert_eq!(random_coding_exponent(1.5, 1.0).0, 0.0);
    }

    #[test]
    fn exponent_inner_max_agrees_with_grid_and_ternary() {
        for &(rate, snr) in &[
            (1.0, 3.0),
            (0.1, 0.5),
            (0.5, 10.0),
            (1.9, 3.0),
            (0.01, 0.02),
        ] {
            let (e, _) = random_coding_exponent(rate, snr);
            let grid = exponent_grid(rate, snr, 100_000);
            let tern = exponent_ternary(rate, snr);
            assert!((e - tern).abs() < 1e-8, "{rate} {snr}: {e} vs {tern}");
            assert!((grid - tern).abs() < 1e-8);
            assert!(e >= grid - 1e-12);
        }
    }

    #[test]
    fn exponent_bound_decreases_in_n() {
        let rate = 0.5 * capacity(3.0);
        assert!((rate - 1.0).abs() < 1e-15);
        // n E = 10^4 * 0.223 nats is far past the underflow cutoff
        assert_eq!(err_exp(10_000.0, rate, 3.0), 0.0);
        let small = err_exp(10.0, rate, 3.0);
        assert!(small > 0.0 && small < 1.0);
        assert!(err_exp(11.0, rate, 3.0) < small);
    }

    #[test]
    fn normal_bound_values() {
        for n in [1.0, 2.0, 4.0] {
            assert_eq!(err_nor(n, 0.1, 100.0), 1.0);
        }
        let v = err_nor(1e6, 0.5 * capacity(3.0), 3.0);
        assert!((v - 2e-3).abs() < 1e-6);

        let n: f64 = 10_000.0;
        let z = n.log2() / (2.0 * n.sqrt() * v_tot(3.0).sqrt());
        let expected = std_normal_cdf(z) + 2.0 / n.sqrt();
        let got = err_nor(n, capacity(3.0), 3.0);
        assert!((got - expected).abs() < 1e-15);
        assert!(got > 0.5 + 2.0 / n.sqrt() && got < 0.54);
    }

    #[test]
    fn combined_bound_conventions() {
        assert_eq!(err_bound(0.0, 0.3, 5.0), 1.0);
        assert_eq!(err_bound(1000.0, 0.3, 0.0), 1.0);
        let rate = 0.8 * capacity(3.0);
        let vals: Vec<f64> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&n| err_bound(n, rate, 3.0))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        assert!(vals[3] < 1e-3);
    }

    #[test]
    fn combined_bound_is_the_pointwise_min() {
        for &n in &[10.0, 500.0, 1e4] {
            for &snr in &[0.1, 1.0, 3.0, 30.0] {
                for &rate in &[0.05, 0.5, 1.5, 3.0] {
                    let b = err_bound(n, rate, snr);
                    assert!(b <= err_nor(n, rate, snr) && b <= err_exp(n, rate, snr));
                    assert!((0.0..=1.0).contains(&b));
                }
            }
        }
    }

    #[test]
    fn combined_bound_monotonicity() {
        let n = 2000.0;
        let snrs: Vec<f64> = (1..60).map(|k| 0.05 * k as f64).collect();
        let rates: Vec<f64> = (1..60).map(|k| 0.02 * k as f64).collect();
        for &rate in &rates {
            let col: Vec<f64> = snrs.iter().map(|&s| err_bound(n, rate, s)).collect();
            assert!(col.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
        for &snr in &snrs {
            let row: Vec<f64> = rates.iter().map(|&r| err_bound(n, r, snr)).collect();
            assert!(row.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        }
    }

    #[test]
    fn query_validation() {
        assert!(BoundQuery::new(-1.0, 0.1, 1.0).is_err());
        assert!(BoundQuery::new(10.0, 0.0, 1.0).is_err());
        assert!(BoundQuery::new(10.0, 0.1, -1.0).is_err());
        let q = BoundQuery::new(0.0, 0.1, 1.0).unwrap();
        assert_eq!(q.err_bound(), 1.0);
    }
}
