//! Solver output and tuning knobs shared by the power-split and time-split
//! solvers.

use crate::roots::Tolerance;

/// A solved allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSolution<S> {
    pub split: S,
    /// Objective value at `split`.
    pub objective: f64,
    /// Number of strictly positive entries; always a prefix `1..=ell`.
    pub ell: usize,
    /// Lagrange multiplier of the budget constraint. `None` for the
    /// single-layer allocation `(1, 0, ..., 0)`.
    pub lambda: Option<f64>,
}

/// Numerical settings for the multiplier searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Grid size of the sign-change scan used to find every root of the
    /// non-monotone budget equations.
    pub root_scan_points: usize,
    /// Bracket width at which multiplier bisection stops.
    pub lambda_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            root_scan_points: 2000,
            lambda_tol: 1e-12,
        }
    }
}

impl SolverOptions {
    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance {
            x: self.lambda_tol,
            f: 1e-12,
            max_iter: 200,
        }
    }
}

/// Count of the leading strictly positive entries.
pub(crate) fn support_len(x: &[f64]) -> usize {
    x.iter().take_while(|v| **v > 0.0).count()
}

/// Highest objective wins. Exact ties go to the earlier candidate unless a
/// later one has the same `ell` and a larger first coordinate. Callers list
/// candidates in increasing `ell`, so ties resolve to the smallest `ell`.
pub(crate) fn pick_best<S: AsRef<[f64]>>(candidates: Vec<SplitSolution<S>>) -> SplitSolution<S> {
    let mut iter = candidates.into_iter();
    let mut best = iter.next().expect("candidate list is never empty");
    for c in iter {
        let better = c.objective > best.objective
            || (c.objective == best.objective
                && c.ell == best.ell
                && c.split.as_ref()[0] > best.split.as_ref()[0]);
        if better {
            best = c;
        }
    }
    best
}
