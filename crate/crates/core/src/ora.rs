//! Orthogonal time sharing: first-order asymptotic resource splits.
//!
//! Block `i` gets a fraction `v_i` of the channel uses and is coded at rate
//! `R / v_i`. In the outage limit its success probability is
//! `t(v) = exp(-(2^{R/v} - 1) theta / (2^R - 1))` and the objective is
//! `T(v) = sum_i d_i t(v_i)` over the standard simplex.
//!
//! Stationarity reduces to `U(v_i) = C_i(lambda)` with the unimodal map
//! `U(v) = 2^{R/v} t(v) / v^2`. Its two inverses `V^+` (right of the peak) and
//! `V^-` (left of the peak) play the roles of the two Lambert branches.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::params::{snr_threshold, ImportanceVector};
use crate::roots::{bisect, scan_roots, Tolerance};
use crate::solution::{pick_best, support_len, SolverOptions, SplitSolution};

const SPLIT_TOL: f64 = 1e-10;
const RANGE_SLACK: f64 = 1e-12;
/// `ln 746`; larger exponent magnitudes underflow `exp`.
const LN_UNDERFLOW: f64 = 6.614_726_746_559_622;

/// A point of the standard simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSplit(Vec<f64>);

impl ResourceSplit {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Argument("empty resource split".into()));
        }
        if let Some(i) = v.iter().position(|x| !(*x >= 0.0)) {
            return Err(Error::Domain(format!(
                "v[{}] = {} is negative",
                i + 1,
                v[i]
            )));
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > SPLIT_TOL {
            return Err(Error::Domain(format!("time fractions sum to {sum}, not 1")));
        }
        Ok(ResourceSplit(v))
    }

    /// Wraps `v` without checking the simplex constraint.
    pub fn from_raw(v: Vec<f64>) -> Self {
        ResourceSplit(v)
    }

    pub fn single(k: usize) -> Self {
        let mut v = vec![0.0; k];
        v[0] = 1.0;
        ResourceSplit(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for ResourceSplit {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Natural log of `(2^{R/v} - 1) theta / (2^R - 1)`, the magnitude of the
/// exponent in `t(v)`.
fn ln_exponent(v: f64, rate: f64, theta: f64) -> f64 {
    let a = rate * LN_2 / v;
    let ln_num = if a < 700.0 { a.exp_m1().ln() } else { a };
    ln_num + theta.ln() - snr_threshold(rate).ln()
}

/// `t(v) = exp(-(2^{R/v} - 1) theta / (2^R - 1))` with `t(0) = 0`.
pub fn t_scalar(v: f64, rate: f64, theta: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let l = ln_exponent(v, rate, theta);
    if l.is_nan() || l > LN_UNDERFLOW {
        0.0
    } else {
        (-l.exp()).exp()
    }
}

/// `T(v) = sum_i d_i t(v_i)`.
pub fn objective_t(v: &[f64], d: &ImportanceVector, rate: f64, theta: f64) -> Result<f64> {
    if v.len() != d.len() {
        return Err(Error::Argument(format!(
            "split has {} entries but importance vector has {}",
            v.len(),
            d.len()
        )));
    }
    Ok(v.iter()
        .zip(d.as_slice())
        .map(|(vi, di)| di * t_scalar(*vi, rate, theta))
        .sum())
}

/// For `theta >= theta_c(R)` only the first block is sent.
pub fn theta_c(rate: f64) -> f64 {
    let t = snr_threshold(rate);
    t / (t + 1.0) * (2.0 / (rate * LN_2) + 1.0)
}

/// `ln U(v)`, `-inf` at `v = 0`.
fn ln_u(v: f64, rate: f64, theta: f64) -> f64 {
    if v <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let l = ln_exponent(v, rate, theta);
    if l.is_nan() {
        return f64::NEG_INFINITY;
    }
    rate * LN_2 / v - 2.0 * v.ln() - l.exp()
}

/// `U(v) = 2^{R/v} t(v) / v^2` with `U(0) = 0`.
pub fn u_fn(v: f64, rate: f64, theta: f64) -> f64 {
    let l = ln_u(v, rate, theta);
    if l < -745.0 {
        0.0
    } else {
        l.exp()
    }
}

/// `v^2 d ln U / dv`, strictly decreasing in `v`.
fn n_fn(v: f64, rate: f64, theta: f64) -> f64 {
    let r = rate * LN_2;
    r * (theta * (r / v).exp() / snr_threshold(rate) - 1.0) - 2.0 * v
}

/// `t'(v) = theta R ln 2 U(v) / (2^R - 1)`.
pub fn t_prime(v: f64, rate: f64, theta: f64) -> f64 {
    theta * rate * LN_2 * u_fn(v, rate, theta) / snr_threshold(rate)
}

/// Interior maximizer of `U` and its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UPeak {
    pub v_int: f64,
    pub m_int: f64,
}

pub fn u_peak(rate: f64, theta: f64) -> Result<UPeak> {
    if theta >= theta_c(rate) {
        return Err(Error::Domain(format!(
            "theta = {theta} is at or above the single-block threshold {}; U peaks at v = 1",
            theta_c(rate)
        )));
    }
    let exact = Tolerance {
        x: 0.0,
        f: 0.0,
        max_iter: 2000,
    };
    let v_int = bisect(|v| n_fn(v, rate, theta), 0.0, 1.0, exact);
    Ok(UPeak {
        v_int,
        m_int: u_fn(v_int, rate, theta),
    })
}

/// Stationarity machinery for one `(theta, R, d)` instance with
/// `theta < theta_c(R)`.
#[derive(Debug, Clone, Copy)]
pub struct OraModel<'a> {
    rate: f64,
    theta: f64,
    peak: UPeak,
    /// `U(1) = 2^R e^{-theta}`, the smallest admissible level.
    u_one: f64,
    d: &'a [f64],
}

impl<'a> OraModel<'a> {
    pub fn new(theta: f64, rate: f64, d: &'a ImportanceVector) -> Result<Self> {
        Ok(OraModel {
            rate,
            theta,
            peak: u_peak(rate, theta)?,
            u_one: rate.exp2() * (-theta).exp(),
            d: d.as_slice(),
        })
    }

    pub fn peak(&self) -> UPeak {
        self.peak
    }

    fn clamp_level(&self, c: f64) -> Result<f64> {
        let (lo, hi) = (self.u_one, self.peak.m_int);
        let slack = RANGE_SLACK * hi.max(1.0);
        if c < lo - slack || c > hi + slack || c.is_nan() {
            return Err(Error::Domain(format!(
                "level {c} lies outside [{lo}, {hi}]"
            )));
        }
        Ok(c.clamp(lo, hi))
    }

    /// Root of `ln U(v) = ln c` on `[lo, hi]`, where `ln U` is monotone.
    /// Newton steps use `d ln U / dv = N(v) / v^2`; any step leaving the
    /// bracket falls back to bisection.
    fn solve_level(&self, c: f64, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
        let target = c.ln();
        let mut v = 0.5 * (lo + hi);
        for _ in 0..200 {
            let h = ln_u(v, self.rate, self.theta) - target;
            if h == 0.0 || h.abs() <= 1e-15 {
                break;
            }
            if (h < 0.0) == increasing {
                lo = v;
            } else {
                hi = v;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
            let slope = n_fn(v, self.rate, self.theta) / (v * v);
            let newton = v - h / slope;
            v = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        v
    }

    /// Root of `U(v) = c` on `[v_int, 1]`.
    pub fn v_plus(&self, c: f64) -> Result<f64> {
        let c = self.clamp_level(c)?;
        if c >= self.peak.m_int {
            return Ok(self.peak.v_int);
        }
        if c <= self.u_one {
            return Ok(1.0);
        }
        Ok(self.solve_level(c, self.peak.v_int, 1.0, false))
    }

    /// Root of `U(v) = c` on `[0, v_int]`.
    pub fn v_minus(&self, c: f64) -> Result<f64> {
        let c = self.clamp_level(c)?;
        if c >= self.peak.m_int {
            return Ok(self.peak.v_int);
        }
        Ok(self.solve_level(c, 0.0, self.peak.v_int, true))
    }

    /// `C_i(lambda)` for the zero-based block `i`.
    pub fn level(&self, lambda: f64, i: usize) -> f64 {
        lambda * snr_threshold(self.rate) / (self.theta * self.d[i] * self.rate * LN_2)
    }

    pub fn lambda_low(&self) -> f64 {
        self.u_one * self.theta * self.d[0] * self.rate * LN_2 / snr_threshold(self.rate)
    }

    /// Largest multiplier at which block `ell` (one-based) is reachable.
    pub fn lambda_upp(&self, ell: usize) -> f64 {
        self.peak.m_int * self.theta * self.d[ell - 1] * self.rate * LN_2 / snr_threshold(self.rate)
    }

    fn vp(&self, lambda: f64, i: usize) -> f64 {
        self.v_plus(self.level(lambda, i))
            .expect("level within range")
    }

    fn vm(&self, lambda: f64, i: usize) -> f64 {
        self.v_minus(self.level(lambda, i))
            .expect("level within range")
    }

    pub fn v_plus_split(&self, lambda: f64, ell: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.d.len()];
        for (i, vi) in v.iter_mut().enumerate().take(ell) {
            *vi = self.vp(lambda, i);
        }
        v
    }

    /// As [`Self::v_plus_split`] with the last active block left of the peak.
    pub fn v_minus_split(&self, lambda: f64, ell: usize) -> Vec<f64> {
        let mut v = self.v_plus_split(lambda, ell - 1);
        v[ell - 1] = self.vm(lambda, ell - 1);
        v
    }

    pub fn s_plus(&self, lambda: f64, ell: usize) -> f64 {
        (0..ell).map(|i| self.vp(lambda, i)).sum()
    }

    pub fn s_minus(&self, lambda: f64, ell: usize) -> f64 {
        (0..ell - 1).map(|i| self.vp(lambda, i)).sum::<f64>() + self.vm(lambda, ell - 1)
    }

    /// Whether `S_ell^+(lambda) = 1` has its root inside
    /// `[lambda_low, lambda_upp(ell)]`.
    pub fn right_branch_feasible(&self, ell: usize) -> bool {
        let (lo, hi) = (self.lambda_low(), self.lambda_upp(ell));
        lo <= hi && self.s_plus(lo, ell) >= 1.0 && 1.0 >= self.s_plus(hi, ell)
    }
}

/// Upper bound on the number of blocks an optimal split serves.
pub fn ell_ora(theta: f64, rate: f64, d: &ImportanceVector) -> usize {
    let Ok(peak) = u_peak(rate, theta) else {
        return 1;
    };
    let cut = rate.exp2() * (-theta).exp() / peak.m_int * d[0];
    d.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, di)| **di >= cut)
        .map(|(i, _)| i + 1)
        .max()
        .unwrap_or(1)
}

fn single_solution(d: &ImportanceVector, rate: f64, theta: f64) -> SplitSolution<ResourceSplit> {
    SplitSolution {
        split: ResourceSplit::single(d.len()),
        objective: d[0] * t_scalar(1.0, rate, theta),
        ell: 1,
        lambda: None,
    }
}

fn candidate(
    v: Vec<f64>,
    lambda: f64,
    d: &ImportanceVector,
    rate: f64,
    theta: f64,
) -> SplitSolution<ResourceSplit> {
    let objective = objective_t(&v, d, rate, theta).expect("lengths match");
    SplitSolution {
        ell: support_len(&v),
        split: ResourceSplit::from_raw(v),
        objective,
        lambda: Some(lambda),
    }
}

fn right_branch_candidate(
    model: &OraModel,
    ell: usize,
    d: &ImportanceVector,
    rate: f64,
    theta: f64,
    opts: &SolverOptions,
) -> SplitSolution<ResourceSplit> {
    let lambda = bisect(
        |l| model.s_plus(l, ell) - 1.0,
        model.lambda_low(),
        model.lambda_upp(ell),
        opts.tolerance(),
    );
    candidate(model.v_plus_split(lambda, ell), lambda, d, rate, theta)
}

/// Global maximizer of `T` by enumerating every stationary candidate.
pub fn algorithm3_global(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
) -> SplitSolution<ResourceSplit> {
    algorithm3_global_with(theta, rate, d, &SolverOptions::default())
}

pub fn algorithm3_global_with(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    opts: &SolverOptions,
) -> SplitSolution<ResourceSplit> {
    let single = single_solution(d, rate, theta);
    if d.len() == 1 || theta >= theta_c(rate) {
        return single;
    }
    let model = OraModel::new(theta, rate, d).expect("theta below threshold");
    let mut cands = vec![single];
    for ell in 2..=ell_ora(theta, rate, d) {
        let (lo, hi) = (model.lambda_low(), model.lambda_upp(ell));
        if lo > hi {
            continue;
        }
        if model.right_branch_feasible(ell) {
            cands.push(right_branch_candidate(&model, ell, d, rate, theta, opts));
        }
        let roots = scan_roots(
            |l| model.s_minus(l, ell) - 1.0,
            lo,
            hi,
            opts.root_scan_points,
            opts.tolerance(),
        );
        for lambda in roots {
            cands.push(candidate(
                model.v_minus_split(lambda, ell),
                lambda,
                d,
                rate,
                theta,
            ));
        }
    }
    pick_best(cands)
}

/// Candidate set of the local search.
#[derive(Debug, Clone)]
pub struct LocalCandidates {
    /// `theta >= theta_c`; only `(1, 0, ..., 0)` remains.
    pub early_exit: bool,
    pub candidates: Vec<SplitSolution<ResourceSplit>>,
}

pub fn algorithm4_candidates(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    opts: &SolverOptions,
) -> LocalCandidates {
    let single = single_solution(d, rate, theta);
    if d.len() == 1 || theta >= theta_c(rate) {
        return LocalCandidates {
            early_exit: true,
            candidates: vec![single],
        };
    }
    let model = OraModel::new(theta, rate, d).expect("theta below threshold");
    let mut candidates = vec![single];
    for ell in 2..=ell_ora(theta, rate, d) {
        if model.right_branch_feasible(ell) {
            candidates.push(right_branch_candidate(&model, ell, d, rate, theta, opts));
        }
    }
    LocalCandidates {
        early_exit: false,
        candidates,
    }
}

/// Best strict local maximizer of `T` from right-of-peak candidates.
pub fn algorithm4_local(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
) -> SplitSolution<ResourceSplit> {
    algorithm4_local_with(theta, rate, d, &SolverOptions::default())
}

pub fn algorithm4_local_with(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    opts: &SolverOptions,
) -> SplitSolution<ResourceSplit> {
    pick_best(algorithm4_candidates(theta, rate, d, opts).candidates)
}

/// Largest `|-t'(v_i) d_i + lambda|` over the active blocks.
pub fn kkt_residual(v: &[f64], lambda: f64, theta: f64, rate: f64, d: &ImportanceVector) -> f64 {
    v.iter()
        .zip(d.as_slice())
        .filter(|(vi, _)| **vi > 0.0)
        .map(|(vi, di)| (-t_prime(*vi, rate, theta) * di + lambda).abs())
        .fold(0.0, f64::max)
}
