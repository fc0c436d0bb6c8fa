//! Self-checks of the solvers against the brute-force oracles, the two-layer
//! closed form, Monte Carlo expectations and the Lambert kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fbl::{g_n, g_n_integrand, t_n, t_n_integrand, FblParams, QuantizedResourceSplit};
use crate::ora::{self, algorithm3_global_with, algorithm4_local_with, ell_ora};
use crate::oracle::{grid_max_g, grid_max_t, mc_expectation, GridSpec};
use crate::params::{presets, ChannelParams, ImportanceVector};
use crate::pds::{
    self, algorithm1_global_with, algorithm2_local_with, ell_pds, solve_k2, PowerSplit,
};
use crate::quadrature::QuadratureSpec;
use crate::solution::{SolverOptions, SplitSolution};
use crate::special::{lambert_w0, lambert_wm1, psi, psi_inv_lower, psi_inv_upper, INV_E, PSI_MAX};

/// Knobs of a validation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Smaller instance counts and Monte Carlo sample sizes.
    pub quick: bool,
    pub solver: SolverOptions,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            quick: false,
            solver: SolverOptions::default(),
            seed: 2024,
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteReport {
    fn new(name: &'static str, worst: f64, limit: f64, what: &str) -> Self {
        SuiteReport {
            name,
            passed: worst <= limit,
            detail: format!("{what}: worst {worst:.3e} (limit {limit:.0e})"),
        }
    }
}

/// Runs every suite in a fixed order.
pub fn run_all(opts: &ValidateOptions) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        lambert_suite(opts),
        agreement_suite(opts),
        two_layer_suite(opts)?,
        grid_suite(opts)?,
        kkt_suite(opts),
        quadrature_suite(opts)?,
    ])
}

/// A strictly decreasing importance vector of length `k` with a minimum
/// relative gap between entries.
pub fn random_importance<R: Rng>(rng: &mut R, k: usize) -> ImportanceVector {
    let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    for i in 1..k {
        w[i] = w[i].min(w[i - 1] * 0.97);
    }
    ImportanceVector::from_weights(&w).expect("strictly decreasing")
}

/// Relative Lambert residuals on both branches and `psi` inversion
/// round trips.
pub fn lambert_suite(opts: &ValidateOptions) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst_w: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for _ in 0..1000 {
        let x = -INV_E * rng.random_range(1e-12..=1.0);
        for w in [lambert_w0(x), lambert_wm1(x)] {
            let w = w.expect("argument in range");
            worst_w = worst_w.max((w * w.exp() - x).abs() / x.abs());
        }
        let c = PSI_MAX * rng.random_range(1e-9..=1.0);
        for y in [psi_inv_lower(c), psi_inv_upper(c)] {
            worst_psi = worst_psi.max((psi(y.expect("level in range")) - c).abs() / c);
        }
    }
    let mut r = SuiteReport::new("lambert", worst_w, 1e-12, "relative W residual");
    if worst_psi > 1e-10 {
        r.passed = false;
    }
    r.detail.push_str(&format!(
        "; psi round trip worst {worst_psi:.3e} (limit 1e-10)"
    ));
    r
}

fn theta_sweep(quick: bool) -> Vec<f64> {
    let step = if quick { 5 } else { 1 };
    (1..100).step_by(step).map(|k| 0.01 * k as f64).collect()
}

/// Global and local searches agree on the built-in vectors.
pub fn agreement_suite(opts: &ValidateOptions) -> SuiteReport {
    let mut worst: f64 = 0.0;
    for d in [presets::four_layer(), presets::eight_layer()] {
        for theta in theta_sweep(opts.quick) {
            let a = algorithm1_global_with(theta, 0.1, &d, &opts.solver).objective;
            let b = algorithm2_local_with(theta, 0.1, &d, &opts.solver).objective;
            let c = algorithm3_global_with(theta, 0.1, &d, &opts.solver).objective;
            let e = algorithm4_local_with(theta, 0.1, &d, &opts.solver).objective;
            worst = worst.max((a - b).abs()).max((c - e).abs());
        }
    }
    SuiteReport::new("global-local", worst, 1e-9, "objective gap")
}

/// Closed form against the local solver and the grid for two layers.
pub fn two_layer_suite(opts: &ValidateOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 1);
    let count = if opts.quick { 10 } else { 50 };
    let (mut worst_exact, mut worst_grid): (f64, f64) = (0.0, 0.0);
    for _ in 0..count {
        let theta = rng.random_range(0.01..1.5);
        let rate = rng.random_range(0.05..1.5);
        let d = random_importance(&mut rng, 2);
        let k2 = solve_k2(theta, rate, d[0], d[1])?;
        let local = algorithm2_local_with(theta, rate, &d, &opts.solver).objective;
        let grid = grid_max_g(theta, rate, &d, &GridSpec::for_len(2))?.value;
        worst_exact = worst_exact.max((k2.objective - local).abs());
        worst_grid = worst_grid
            .max((k2.objective - grid).abs())
            .max((local - grid).abs());
    }
    let mut r = SuiteReport::new("two-layer", worst_exact, 1e-9, "closed form vs solver");
    if worst_grid > 1e-4 {
        r.passed = false;
    }
    r.detail
        .push_str(&format!("; vs grid worst {worst_grid:.3e} (limit 1e-4)"));
    Ok(r)
}

/// Global solvers are never beaten by the three-layer grid search.
pub fn grid_suite(opts: &ValidateOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 2);
    let count = if opts.quick { 4 } else { 20 };
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let theta = rng.random_range(0.01..1.0);
        let rate = rng.random_range(0.05..1.0);
        let d = random_importance(&mut rng, 3);
        let grid = GridSpec::for_len(3);
        let g = algorithm1_global_with(theta, rate, &d, &opts.solver).objective;
        worst = worst.max(grid_max_g(theta, rate, &d, &grid)?.value - g);
        let t = algorithm3_global_with(theta, rate, &d, &opts.solver).objective;
        worst = worst.max(grid_max_t(theta, rate, &d, &grid)?.value - t);
    }
    Ok(SuiteReport::new(
        "grid-oracle",
        worst,
        1e-4,
        "grid excess over solver",
    ))
}

/// Largest structural violation of a solution: 1 for a broken support
/// shape, otherwise the constraint gap and KKT residual.
fn structure_defect<S: AsRef<[f64]>>(
    s: &SplitSolution<S>,
    bound: usize,
    constraint_gap: f64,
    kkt: f64,
) -> f64 {
    let x = s.split.as_ref();
    let ell = s.ell;
    let shape_ok = ell >= 1
        && ell <= bound
        && x[..ell].iter().all(|v| *v > 0.0)
        && x[ell..].iter().all(|v| *v == 0.0)
        && x[..ell].windows(2).all(|w| w[0] > w[1]);
    if !shape_ok {
        return 1.0;
    }
    constraint_gap.max(kkt)
}

/// Prefix support, strictly decreasing active entries, support bounds, the
/// budget constraint and stationarity, over `theta` sweeps and random
/// instances.
pub fn kkt_suite(opts: &ValidateOptions) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 3);
    let mut cases: Vec<(f64, f64, ImportanceVector)> = Vec::new();
    for d in [presets::four_layer(), presets::eight_layer()] {
        cases.extend(
            theta_sweep(opts.quick)
                .into_iter()
                .map(|t| (t, 0.1, d.clone())),
        );
    }
    for _ in 0..if opts.quick { 20 } else { 100 } {
        let k = rng.random_range(2..=6);
        cases.push((
            rng.random_range(0.01..1.0),
            rng.random_range(0.05..1.0),
            random_importance(&mut rng, k),
        ));
    }
    let mut worst: f64 = 0.0;
    for (theta, rate, d) in &cases {
        let (theta, rate) = (*theta, *rate);
        let bound = ell_pds(theta, rate, d);
        for s in [
            algorithm1_global_with(theta, rate, d, &opts.solver),
            algorithm2_local_with(theta, rate, d, &opts.solver),
        ] {
            let x = s.split.as_slice();
            let kkt = s
                .lambda
                .map_or(0.0, |l| pds::kkt_residual(x, l, theta, rate, d));
            worst = worst.max(structure_defect(
                &s,
                bound,
                pds::weighted_sum_gap(x, rate),
                kkt,
            ));
        }
        let bound = ell_ora(theta, rate, d);
        for s in [
            algorithm3_global_with(theta, rate, d, &opts.solver),
            algorithm4_local_with(theta, rate, d, &opts.solver),
        ] {
            let v = s.split.as_slice();
            let kkt = s
                .lambda
                .map_or(0.0, |l| ora::kkt_residual(v, l, theta, rate, d));
            let gap = (v.iter().sum::<f64>() - 1.0).abs();
            worst = worst.max(structure_defect(&s, bound, gap, kkt));
        }
    }
    SuiteReport::new("kkt", worst, 1e-8, "structure, budget and stationarity")
}

/// Finite-blocklength objectives under the configured rule against a plain
/// Monte Carlo average on random instances.
pub fn quadrature_suite(opts: &ValidateOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 4);
    let (count, samples) = if opts.quick {
        (3, 100_000)
    } else {
        (10, 1_000_000)
    };
    let rule = opts.quadrature.rule()?;
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let (n, ch, d, alpha, counts) = random_fbl_instance(&mut rng)?;
        let fbl = FblParams::new(n, ch)?;
        let w = QuantizedResourceSplit::new(counts, n)?;
        let sigma2 = ch.sigma2();
        let q = g_n(&alpha, &d, &fbl, &rule)?;
        let (m, _) = mc_expectation(
            g_n_integrand(&alpha, &d, &fbl)?,
            sigma2,
            samples,
            opts.seed + 100 + i,
        )?;
        worst = worst.max((q - m).abs());
        let q = t_n(&w, &d, &fbl, &rule)?;
        let (m, _) = mc_expectation(
            t_n_integrand(&w, &d, &fbl)?,
            sigma2,
            samples,
            opts.seed + 200 + i,
        )?;
        worst = worst.max((q - m).abs());
    }
    Ok(SuiteReport::new(
        "quadrature",
        worst,
        5e-3,
        "rule vs Monte Carlo",
    ))
}

/// Blocklength, channel, importance vector, power split and time split
/// (as channel-use counts) drawn at random.
pub fn random_fbl_instance<R: Rng>(
    rng: &mut R,
) -> Result<(u64, ChannelParams, ImportanceVector, PowerSplit, Vec<u64>)> {
    let n = [500u64, 1000, 5000, 20000][rng.random_range(0..4)];
    let k = rng.random_range(2..=4);
    let rate = rng.random_range(0.1..1.0);
    let ch = ChannelParams::from_theta(rate, rng.random_range(0.02..0.8))?;
    let d = random_importance(rng, k);
    let mut alpha: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    alpha.sort_by(|a, b| b.total_cmp(a));
    let s: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= s);
    let mut counts: Vec<u64> = (0..k).map(|_| rng.random_range(1..=n / k as u64)).collect();
    counts.sort_by(|a, b| b.cmp(a));
    counts[0] += n - counts.iter().sum::<u64>();
    Ok((n, ch, d, PowerSplit::new(alpha)?, counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ValidateOptions {
        ValidateOptions {
            quick: true,
            ..Default::default()
        }
    }

    #[test]
    fn quick_suites_pass() {
        for r in run_all(&quick()).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn loose_multiplier_tolerance_breaks_stationarity() {
        let mut opts = quick();
        opts.solver.lambda_tol = 0.1;
        let r = kkt_suite(&opts);
        assert!(!r.passed, "{}", r.detail);
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (n, _, d, alpha, counts) = random_fbl_instance(&mut rng).unwrap();
            assert_eq!(counts.iter().sum::<u64>(), n);
            assert_eq!(alpha.len(), d.len());
            assert!(counts.iter().all(|c| *c > 0));
        }
    }
}
