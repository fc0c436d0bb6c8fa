//! Scalar kernels: the two real branches of the Lambert W function, the
//! unimodal map `psi(y) = y^2 e^{-y}` with its two-sided inverse, and the
//! standard normal CDF.
//!
//! Both Lambert branches are evaluated by Halley iteration from
//! branch-specific starting points (a series in `sqrt(2(e x + 1))` near the
//! branch point, a logarithmic guess elsewhere).

use std::f64::consts::{E, FRAC_1_SQRT_2};

use crate::error::{Error, Result};

/// `1/e`, the magnitude of the Lambert branch point.
pub const INV_E: f64 = 0.367_879_441_171_442_33;

/// Maximum of `psi`, attained at `y = 2`: `4 e^{-2}`.
pub const PSI_MAX: f64 = 0.541_341_132_946_450_8;

/// Arguments this far below `-1/e` are treated as rounding and clamped.
const BRANCH_CLAMP: f64 = 1e-14;
const HALLEY_MAX_ITER: usize = 50;
const HALLEY_STEP_TOL: f64 = 1e-14;

/// Argument of a real Lambert branch, `-1/e <= x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BranchPoint(f64);

impl BranchPoint {
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() || x >= 0.0 {
            return Err(Error::Domain(format!(
                "Lambert branch argument {x} must lie in [-1/e, 0)"
            )));
        }
        if x < -INV_E {
            if x >= -INV_E - BRANCH_CLAMP {
                return Ok(BranchPoint(-INV_E));
            }
            return Err(Error::Domain(format!(
                "Lambert branch argument {x} is below -1/e"
            )));
        }
        Ok(BranchPoint(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `sqrt(2 (e x + 1))`, the natural expansion variable at the branch point.
    fn branch_distance(self) -> f64 {
        (2.0 * E * (self.0 + INV_E)).max(0.0).sqrt()
    }
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= HALLEY_STEP_TOL * w.abs().max(1.0) {
            break;
        }
    }
    w
}

/// Principal branch `W_0` on `[-1/e, 0)`, with values in `[-1, 0)`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    Ok(lambert_w0_at(BranchPoint::new(x)?))
}

pub fn lambert_w0_at(x: BranchPoint) -> f64 {
    let p = x.branch_distance();
    if p == 0.0 {
        return -1.0;
    }
    let x = x.get();
    let guess = if p < 0.7 {
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)))
    } else {
        let l = x.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    };
    halley(x, guess).clamp(-1.0, 0.0)
}

/// Secondary branch `W_{-1}` on `[-1/e, 0)`, with values in `(-inf, -1]`.
pub fn lambert_wm1(x: f64) -> Result<f64> {
    Ok(lambert_wm1_at(BranchPoint::new(x)?))
}

pub fn lambert_wm1_at(x: BranchPoint) -> f64 {
    let p = x.branch_distance();
    if p == 0.0 {
        return -1.0;
    }
    let x = x.get();
    let guess = if p < 0.7 {
        -1.0 - p * (1.0 + p * (1.0 / 3.0 + p * (11.0 / 72.0 + p * 43.0 / 540.0)))
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    halley(x, guess).min(-1.0)
}

/// `psi(y) = y^2 e^{-y}`, with `psi(+inf) = 0`.
pub fn psi(y: f64) -> f64 {
    if y == f64::INFINITY {
        return 0.0;
    }
    y * y * (-y).exp()
}

fn psi_branch_arg(c: f64) -> Result<BranchPoint> {
    if !(c > 0.0 && c <= PSI_MAX) {
        return Err(Error::Domain(format!(
            "psi level {c} must lie in (0, 4e^-2]"
        )));
    }
    BranchPoint::new(-0.5 * c.sqrt())
}

/// Smaller root `y in (0, 2]` of `psi(y) = c`.
pub fn psi_inv_lower(c: f64) -> Result<f64> {
    Ok(-2.0 * lambert_w0_at(psi_branch_arg(c)?))
}

/// Larger root `y in [2, inf)` of `psi(y) = c`.
pub fn psi_inv_upper(c: f64) -> Result<f64> {
    Ok(-2.0 * lambert_wm1_at(psi_branch_arg(c)?))
}

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}
