//! Power-domain superposition: first-order asymptotic power splits.
//!
//! With successive interference cancellation, the outage-limited objective of
//! a power split `alpha` becomes `G(x) = sum_i d_i exp(-theta / x_i)` on the
//! weighted simplex `S_K = {x >= 0 : sum_i 2^{R(i-1)} x_i = 1}`, where `x` is
//! the image of `alpha` under [`mb_forward`].
//!
//! Stationary points have `x_i = theta / y_i` with `psi(y_i) = c_i(lambda) =
//! lambda theta 2^{R(i-1)} / d_i`. Taking the lower root of `psi` for every
//! layer gives `H^-(lambda) = sum_i 2^{R(i-1)} x_i^-`, which is decreasing in
//! `lambda`; taking the upper root for the last active layer gives `H^+`.
//! Candidates are the roots of `H^{+-}(lambda) = 1`.

use crate::error::{Error, Result};
use crate::params::{snr_threshold, ImportanceVector};
use crate::roots::{bisect, scan_roots};
use crate::solution::{pick_best, support_len, SolverOptions, SplitSolution};
use crate::special::{lambert_w0, psi_inv_lower, psi_inv_upper, INV_E, PSI_MAX};

const SPLIT_TOL: f64 = 1e-10;
const NEG_SLACK: f64 = 1e-12;
const PSI_CLAMP: f64 = 1e-12;

/// A point of the weighted simplex `S_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct XSplit(Vec<f64>);

impl XSplit {
    /// Checks `x >= 0` and `sum_i 2^{R(i-1)} x_i = 1` within `1e-10`.
    pub fn new(x: Vec<f64>, rate: f64) -> Result<Self> {
        check_weighted(&x, rate)?;
        Ok(XSplit(x))
    }

    /// Wraps `x` without checking membership in `S_K`.
    pub fn from_raw(x: Vec<f64>) -> Self {
        XSplit(x)
    }

    /// `(1, 0, ..., 0)`.
    pub fn single(k: usize) -> Self {
        let mut x = vec![0.0; k];
        x[0] = 1.0;
        XSplit(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for XSplit {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Power fractions on the standard simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSplit(Vec<f64>);

impl PowerSplit {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Argument("empty power split".into()));
        }
        if let Some(i) = alpha.iter().position(|a| !(*a >= 0.0)) {
            return Err(Error::Domain(format!(
                "alpha[{}] = {} is negative",
                i + 1,
                alpha[i]
            )));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > SPLIT_TOL {
            return Err(Error::Domain(format!(
                "power fractions sum to {sum}, not 1"
            )));
        }
        Ok(PowerSplit(alpha))
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

impl AsRef<[f64]> for PowerSplit {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_weighted(x: &[f64], rate: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Argument("empty split".into()));
    }
    if let Some(i) = x.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(format!(
            "x[{}] = {} is negative",
            i + 1,
            x[i]
        )));
    }
    let gap = weighted_sum_gap(x, rate);
    if gap > SPLIT_TOL {
        return Err(Error::Domain(format!(
            "weighted sum of x misses 1 by {gap:e}"
        )));
    }
    Ok(())
}

/// `|sum_i 2^{R(i-1)} x_i - 1|`.
pub fn weighted_sum_gap(x: &[f64], rate: f64) -> f64 {
    let two_r = rate.exp2();
    let mut w = 1.0;
    let mut s = 0.0;
    for v in x {
        s += w * v;
        w *= two_r;
    }
    (s - 1.0).abs()
}

/// `g(x) = exp(-theta / x)` with `g(0) = 0`.
pub fn g_scalar(x: f64, theta: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-theta / x).exp()
    }
}

/// `G(x) = sum_i d_i g(x_i)`.
pub fn objective_g(x: &[f64], d: &ImportanceVector, theta: f64) -> Result<f64> {
    if x.len() != d.len() {
        return Err(Error::Argument(format!(
            "split has {} entries but importance vector has {}",
            x.len(),
            d.len()
        )));
    }
    Ok(x.iter()
        .zip(d.as_slice())
        .map(|(xi, di)| di * g_scalar(*xi, theta))
        .sum())
}

/// `x_i = alpha_i - (2^R - 1) beta_i` with `beta_i = sum_{j > i} alpha_j`.
pub fn mb_forward(alpha: &PowerSplit, rate: f64) -> Result<XSplit> {
    let a = alpha.as_slice();
    let t = snr_threshold(rate);
    let mut x = vec![0.0; a.len()];
    let mut beta = 0.0;
    for i in (0..a.len()).rev() {
        let xi = a[i] - t * beta;
        if xi < -NEG_SLACK {
            return Err(Error::Domain(format!(
                "alpha[{}] = {} is below (2^R - 1) * {} so the split cannot be decoded",
                i + 1,
                a[i],
                beta
            )));
        }
        x[i] = xi.max(0.0);
        beta += a[i];
    }
    XSplit::new(x, rate)
}

/// Backward recursion `alpha_K = x_K`, `alpha_i = x_i + (2^R - 1) beta_i`.
pub fn mb_inverse(x: &XSplit, rate: f64) -> Result<PowerSplit> {
    check_weighted(x.as_slice(), rate)?;
    let t = snr_threshold(rate);
    let xs = x.as_slice();
    let mut alpha = vec![0.0; xs.len()];
    let mut beta = 0.0;
    for i in (0..xs.len()).rev() {
        alpha[i] = xs[i] + t * beta;
        beta += alpha[i];
    }
    PowerSplit::new(alpha)
}

/// Upper bound on the number of layers an optimal split transmits.
pub fn ell_pds(theta: f64, rate: f64, d: &ImportanceVector) -> usize {
    if theta >= 2.0 {
        return 1;
    }
    let ds = d.as_slice();
    let rhs = (rate.exp2() / ds[0]) * PSI_MAX / (theta * theta * (-theta).exp());
    let ln_rhs = rhs.ln();
    ds.iter()
        .enumerate()
        .filter(|(i, di)| (i + 1) as f64 * rate * std::f64::consts::LN_2 - di.ln() <= ln_rhs)
        .map(|(i, _)| i + 1)
        .max()
        .unwrap_or(1)
}

/// For `theta` above this value the single-layer split `(1, 0, ..., 0)` is
/// optimal. Requires `K >= 2`.
pub fn single_layer_threshold(rate: f64, d: &ImportanceVector) -> f64 {
    let ds = d.as_slice();
    let arg = -INV_E * (ds[1] / (rate.exp2() * ds[0])).sqrt();
    -2.0 * lambert_w0(arg).expect("argument lies in (-1/e, 0)")
}

/// Stationarity machinery for one `(theta, R, d)` instance.
#[derive(Debug, Clone, Copy)]
pub struct PdsModel<'a> {
    theta: f64,
    two_r: f64,
    d: &'a [f64],
}

impl<'a> PdsModel<'a> {
    pub fn new(theta: f64, rate: f64, d: &'a ImportanceVector) -> Self {
        PdsModel {
            theta,
            two_r: rate.exp2(),
            d: d.as_slice(),
        }
    }

    fn weight(&self, i: usize) -> f64 {
        self.two_r.powi(i as i32)
    }

    /// `c_i(lambda)` for the zero-based layer `i`, clamped to the top of the
    /// range of `psi` when rounding pushes it over.
    pub fn c(&self, lambda: f64, i: usize) -> f64 {
        let c = lambda * self.theta * self.weight(i) / self.d[i];
        if c > PSI_MAX && c <= PSI_MAX + PSI_CLAMP {
            PSI_MAX
        } else {
            c
        }
    }

    pub fn lambda_min(&self) -> f64 {
        self.d[0] * self.theta * (-self.theta).exp()
    }

    /// Largest multiplier at which layer `ell` (one-based) is still reachable.
    pub fn lambda_max(&self, ell: usize) -> f64 {
        PSI_MAX * self.d[ell - 1] / (self.theta * self.weight(ell - 1))
    }

    fn x_lower(&self, lambda: f64, i: usize) -> f64 {
        let c = self.c(lambda, i).min(PSI_MAX);
        self.theta / psi_inv_lower(c).expect("c lies in (0, 4/e^2]")
    }

    fn x_upper(&self, lambda: f64, i: usize) -> f64 {
        let c = self.c(lambda, i).min(PSI_MAX);
        self.theta / psi_inv_upper(c).expect("c lies in (0, 4/e^2]")
    }

    /// Stationary point with `ell` active layers, all on the lower branch.
    pub fn x_minus(&self, lambda: f64, ell: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d.len()];
        for (i, xi) in x.iter_mut().enumerate().take(ell) {
            *xi = self.x_lower(lambda, i);
        }
        x
    }

    /// As [`Self::x_minus`] with the last active layer on the upper branch.
    pub fn x_plus(&self, lambda: f64, ell: usize) -> Vec<f64> {
        let mut x = self.x_minus(lambda, ell - 1);
        x[ell - 1] = self.x_upper(lambda, ell - 1);
        x
    }

    pub fn h_minus(&self, lambda: f64, ell: usize) -> f64 {
        (0..ell)
            .map(|i| self.weight(i) * self.x_lower(lambda, i))
            .sum()
    }

    pub fn h_plus(&self, lambda: f64, ell: usize) -> f64 {
        (0..ell - 1)
            .map(|i| self.weight(i) * self.x_lower(lambda, i))
            .sum::<f64>()
            + self.weight(ell - 1) * self.x_upper(lambda, ell - 1)
    }

    /// Whether `H_ell^-(lambda) = 1` has its root inside
    /// `[lambda_min, lambda_max(ell)]`.
    pub fn lower_branch_feasible(&self, ell: usize) -> bool {
        let (lo, hi) = (self.lambda_min(), self.lambda_max(ell));
        lo <= hi && self.h_minus(lo, ell) >= 1.0 && 1.0 >= self.h_minus(hi, ell)
    }
}

fn single_solution(d: &ImportanceVector, theta: f64) -> SplitSolution<XSplit> {
    SplitSolution {
        split: XSplit::single(d.len()),
        objective: d[0] * g_scalar(1.0, theta),
        ell: 1,
        lambda: None,
    }
}

fn candidate(x: Vec<f64>, lambda: f64, d: &ImportanceVector, theta: f64) -> SplitSolution<XSplit> {
    let objective = objective_g(&x, d, theta).expect("lengths match");
    SplitSolution {
        ell: support_len(&x),
        split: XSplit::from_raw(x),
        objective,
        lambda: Some(lambda),
    }
}

fn lower_branch_candidate(
    model: &PdsModel,
    ell: usize,
    d: &ImportanceVector,
    theta: f64,
    opts: &SolverOptions,
) -> SplitSolution<XSplit> {
    let lambda = bisect(
        |l| model.h_minus(l, ell) - 1.0,
        model.lambda_min(),
        model.lambda_max(ell),
        opts.tolerance(),
    );
    candidate(model.x_minus(lambda, ell), lambda, d, theta)
}

/// Global maximizer of `G` over `S_K` by enumerating every stationary
/// candidate, including upper-branch ones.
pub fn algorithm1_global(theta: f64, rate: f64, d: &ImportanceVector) -> SplitSolution<XSplit> {
    algorithm1_global_with(theta, rate, d, &SolverOptions::default())
}

pub fn algorithm1_global_with(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    opts: &SolverOptions,
) -> SplitSolution<XSplit> {
    let single = single_solution(d, theta);
    if d.len() == 1 || theta > single_layer_threshold(rate, d) {
        return single;
    }
    let model = PdsModel::new(theta, rate, d);
    let mut cands = vec![single];
    for ell in 2..=ell_pds(theta, rate, d) {
        let (lo, hi) = (model.lambda_min(), model.lambda_max(ell));
        if lo > hi {
            continue;
        }
        if model.lower_branch_feasible(ell) {
            cands.push(lower_branch_candidate(&model, ell, d, theta, opts));
        }
        let roots = scan_roots(
            |l| model.h_plus(l, ell) - 1.0,
            lo,
            hi,
            opts.root_scan_points,
            opts.tolerance(),
        );
        for lambda in roots {
            cands.push(candidate(model.x_plus(lambda, ell), lambda, d, theta));
        }
    }
    pick_best(cands)
}

/// Candidate set of the local search: the single-layer split and one
/// lower-branch stationary point per feasible layer count.
#[derive(Debug, Clone)]
pub struct LocalCandidates {
    /// The single-layer threshold was exceeded; only `(1, 0, ..., 0)` remains.
    pub early_exit: bool,
    pub candidates: Vec<SplitSolution<XSplit>>,
}

pub fn algorithm2_candidates(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    opts: &SolverOptions,
) -> LocalCandidates {
    let single = single_solution(d, theta);
    if d.len() == 1 || theta > single_layer_threshold(rate, d) {
        return LocalCandidates {
            early_exit: true,
            candidates: vec![single],
        };
    }
    let model = PdsModel::new(theta, rate, d);
    let mut candidates = vec![single];
    for ell in 2..=ell_pds(theta, rate, d) {
        if model.lower_branch_feasible(ell) {
            candidates.push(lower_branch_candidate(&model, ell, d, theta, opts));
        }
    }
    LocalCandidates {
        early_exit: false,
        candidates,
    }
}

/// Best strict local maximizer of `G`, built from lower-branch candidates only.
pub fn algorithm2_local(theta: f64, rate: f64, d: &ImportanceVector) -> SplitSolution<XSplit> {
    algorithm2_local_with(theta, rate, d, &SolverOptions::default())
}

pub fn algorithm2_local_with(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    opts: &SolverOptions,
) -> SplitSolution<XSplit> {
    pick_best(algorithm2_candidates(theta, rate, d, opts).candidates)
}

/// Largest stationarity residual `|-(theta/x_i^2) e^{-theta/x_i} d_i +
/// lambda 2^{R(i-1)}|` over the active layers.
pub fn kkt_residual(x: &[f64], lambda: f64, theta: f64, rate: f64, d: &ImportanceVector) -> f64 {
    let two_r = rate.exp2();
    x.iter()
        .zip(d.as_slice())
        .enumerate()
        .filter(|(_, (xi, _))| **xi > 0.0)
        .map(|(i, (xi, di))| {
            let grad = theta / (xi * xi) * (-theta / xi).exp() * di;
            (-grad + lambda * two_r.powi(i as i32)).abs()
        })
        .fold(0.0, f64::max)
}

/// Optimal two-layer split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Solution {
    /// Power fraction of the first layer.
    pub alpha_star: f64,
    pub objective: f64,
}

/// Closed-form optimum for two layers.
pub fn solve_k2(theta: f64, rate: f64, d1: f64, d2: f64) -> Result<K2Solution> {
    if !(d1 > d2 && d2 > 0.0) {
        return Err(Error::Argument(format!("need d1 > d2 > 0, got {d1}, {d2}")));
    }
    if !(theta > 0.0) || !(rate > 0.0) {
        return Err(Error::Argument("theta and rate must be positive".into()));
    }
    let two_r = rate.exp2();
    let objective = |alpha: f64| {
        let x2 = 1.0 - alpha;
        let x1 = alpha - (two_r - 1.0) * x2;
        d1 * g_scalar(x1, theta) + d2 * g_scalar(x2, theta)
    };
    let single = K2Solution {
        alpha_star: 1.0,
        objective: objective(1.0),
    };
    if theta >= 1.0 / two_r.sqrt() {
        return Ok(single);
    }
    let root = (1.0 - two_r * theta * theta).sqrt();
    let xi =
        (theta * two_r.sqrt() / (1.0 + root)).powi(2) * (theta * (two_r - 1.0) + 2.0 * root).exp();
    let ratio = d2 / d1;
    if ratio <= xi {
        return Ok(single);
    }
    let half = (1.0 / (theta * theta) - two_r).sqrt();
    let (lo, hi) = (1.0 / theta - half, 1.0 / theta + half);
    // log of the decreasing left-hand side minus log of the ratio
    let f = |q: f64| two_r.ln() - 2.0 * q.ln() + theta * (q + two_r - 1.0 - two_r / q) - ratio.ln();
    let q0 = bisect(f, lo, hi, Default::default());
    if (-theta * two_r / q0).exp() * (1.0 + two_r / (q0 * q0)) > 1.0 {
        let alpha_star = (q0 + two_r - 1.0) / (q0 + two_r);
        Ok(K2Solution {
            alpha_star,
            objective: objective(alpha_star),
        })
    } else {
        Ok(single)
    }
}
