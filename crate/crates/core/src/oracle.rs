//! Brute-force reference maximizers and a plain Monte Carlo estimator, used to
//! validate the structured solvers and the quadrature layer.
//!
//! The grid search never looks at stationarity conditions: it enumerates the
//! simplex, keeps the best point, and zooms in around it.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ora::{objective_t, ResourceSplit};
use crate::params::ImportanceVector;
use crate::pds::{objective_g, XSplit};

/// Offsets explored per coordinate in each refinement round.
const REFINE_REACH: i64 = 4;

/// Simplex grid density and refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per simplex edge.
    pub resolution: usize,
    pub refine_rounds: usize,
    /// Largest number of grid points allowed in the coarse pass.
    pub budget: u64,
}

impl GridSpec {
    /// 400 / 100 / 40 points per edge for `K` = 2 / 3 / 4 (and 40 beyond),
    /// with 3 refinement rounds.
    pub fn for_len(k: usize) -> Self {
        let resolution = match k {
            0..=2 => 400,
            3 => 100,
            _ => 40,
        };
        GridSpec {
            resolution,
            refine_rounds: 3,
            budget: 10_000_000,
        }
    }

    /// Number of coarse grid points on the `K`-simplex.
    pub fn size(&self, k: usize) -> u64 {
        binomial((self.resolution + k - 1) as u64, (k - 1) as u64)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Result of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMax<S> {
    pub split: S,
    pub value: f64,
    /// Best value after the coarse pass and after each refinement round.
    pub history: Vec<f64>,
}

/// Calls `f` on every composition of `total` into `parts` nonnegative parts,
/// in lexicographic order.
fn for_each_composition<F: FnMut(&[usize])>(
    total: usize,
    parts: usize,
    buf: &mut Vec<usize>,
    f: &mut F,
) {
    if parts == 1 {
        buf.push(total);
        f(buf);
        buf.pop();
        return;
    }
    for c in 0..=total {
        buf.push(c);
        for_each_composition(total - c, parts - 1, buf, f);
        buf.pop();
    }
}

/// Maximizes `f` over the standard `K`-simplex.
fn simplex_search<F>(k: usize, grid: &GridSpec, f: F) -> Result<(Vec<f64>, f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if grid.resolution < 10 {
        return Err(Error::Argument(format!(
            "grid resolution {} is below 10",
            grid.resolution
        )));
    }
    let size = grid.size(k);
    if size > grid.budget {
        return Err(Error::Resource(format!(
            "simplex grid of {size} points exceeds the budget of {}",
            grid.budget
        )));
    }
    let res = grid.resolution;
    let h = 1.0 / res as f64;
    if k == 1 {
        return Ok((vec![1.0], f(&[1.0]), vec![f(&[1.0])]));
    }
    // best per leading coordinate, reduced in index order so ties keep the
    // lexicographically first point
    let per_lead: Vec<(Vec<f64>, f64)> = (0..=res)
        .into_par_iter()
        .map(|c0| {
            let mut best = (Vec::new(), f64::NEG_INFINITY);
            let mut z = vec![0.0; k];
            let mut buf = vec![c0];
            for_each_composition(res - c0, k - 1, &mut buf, &mut |c: &[usize]| {
                for (zi, ci) in z.iter_mut().zip(c) {
                    *zi = *ci as f64 * h;
                }
                let v = f(&z);
                if v > best.1 {
                    best = (z.clone(), v);
                }
            });
            best
        })
        .collect();
    let (mut point, mut value) =
        per_lead
            .into_iter()
            .fold((Vec::new(), f64::NEG_INFINITY), |acc, c| {
                if c.1 > acc.1 {
                    c
                } else {
                    acc
                }
            });
    let mut history = vec![value];

    let mut step = h;
    for _ in 0..grid.refine_rounds {
        step *= 0.5;
        let span = (2 * REFINE_REACH + 1) as usize;
        let count = span.pow((k - 1) as u32);
        let mut z = vec![0.0; k];
        let center = point.clone();
        for idx in 0..count {
            let mut rem = idx;
            let mut head = 0.0;
            let mut ok = true;
            for i in 0..k - 1 {
                let off = (rem % span) as i64 - REFINE_REACH;
                rem /= span;
                z[i] = center[i] + off as f64 * step;
                if z[i] < 0.0 {
                    ok = false;
                    break;
                }
                head += z[i];
            }
            if !ok {
                continue;
            }
            z[k - 1] = 1.0 - head;
            if z[k - 1] < 0.0 {
                if z[k - 1] < -1e-12 {
                    continue;
                }
                z[k - 1] = 0.0;
            }
            let v = f(&z);
            if v > value {
                value = v;
                point = z.clone();
            }
        }
        history.push(value);
    }
    Ok((point, value, history))
}

/// Grid maximum of `G` over the weighted simplex, searched through
/// `z_i = 2^{R(i-1)} x_i` on the standard simplex.
pub fn grid_max_g(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    grid: &GridSpec,
) -> Result<GridMax<XSplit>> {
    let k = d.len();
    let w: Vec<f64> = (0..k).map(|i| rate.exp2().powi(i as i32)).collect();
    let to_x = |z: &[f64]| -> Vec<f64> { z.iter().zip(&w).map(|(zi, wi)| zi / wi).collect() };
    let (z, value, history) = simplex_search(k, grid, |z| {
        objective_g(&to_x(z), d, theta).expect("lengths match")
    })?;
    Ok(GridMax {
        split: XSplit::from_raw(to_x(&z)),
        value,
        history,
    })
}

/// Grid maximum of `T` over the standard simplex.
pub fn grid_max_t(
    theta: f64,
    rate: f64,
    d: &ImportanceVector,
    grid: &GridSpec,
) -> Result<GridMax<ResourceSplit>> {
    let (v, value, history) = simplex_search(d.len(), grid, |v| {
        objective_t(v, d, rate, theta).expect("lengths match")
    })?;
    Ok(GridMax {
        split: ResourceSplit::from_raw(v),
        value,
        history,
    })
}

/// Sample mean and standard error of `f(gamma)` with `gamma = -sigma2 ln U`.
pub fn mc_expectation<F: Fn(f64) -> f64>(
    f: F,
    sigma2: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::Argument(format!(
            "Monte Carlo needs at least 1000 samples, got {samples}"
        )));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..samples {
        let u: f64 = 1.0 - rng.random::<f64>();
        let x = f(-sigma2 * u.ln());
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ora::theta_c;

    #[test]
    fn grid_sizes() {
        assert_eq!(GridSpec::for_len(2).size(2), 401);
        assert_eq!(GridSpec::for_len(3).size(3), 5151);
        assert_eq!(GridSpec::for_len(4).size(4), 12341);
        let g = GridSpec {
            resolution: 1000,
            refine_rounds: 0,
            budget: 10_000_000,
        };
        assert!(g.size(5) > 10_000_000);
    }

    #[test]
    fn budget_and_resolution_are_enforced() {
        let d = ImportanceVector::from_weights(&[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let g = GridSpec {
            resolution: 1000,
            refine_rounds: 0,
            budget: 10_000_000,
        };
        assert!(matches!(
            grid_max_t(0.1, 0.1, &d, &g),
            Err(Error::Resource(_))
        ));
        let g = GridSpec {
            resolution: 5,
            refine_rounds: 0,
            budget: 10,
        };
        assert!(matches!(
            grid_max_g(0.1, 0.1, &d, &g),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn two_layers_on_a_poor_channel_send_one_layer() {
        let d = ImportanceVector::new(vec![0.6, 0.4]).unwrap();
        for (rate, theta) in [(1.0, 0.75), (0.1, 0.97), (0.5, 1.5)] {
            assert!(theta >= 2f64.powf(-rate / 2.0));
            let r = grid_max_g(theta, rate, &d, &GridSpec::for_len(2)).unwrap();
            let x = r.split.as_slice();
            assert!(
                (x[0] - 1.0).abs() <= 1.0 / 400.0 && x[1] <= 1.0 / 400.0,
                "{x:?}"
            );
        }
    }

    #[test]
    fn beyond_the_time_split_threshold_one_block_is_served() {
        let d = ImportanceVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let r = grid_max_t(theta_c(0.2) + 0.05, 0.2, &d, &GridSpec::for_len(3)).unwrap();
        let v = r.split.as_slice();
        assert!(
            (v[0] - 1.0).abs() <= 0.01 && v[1] <= 0.01 && v[2] <= 0.01,
            "{v:?}"
        );
    }

    #[test]
    fn grid_argmax_is_ordered() {
        let d = ImportanceVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let r = grid_max_t(0.05, 0.1, &d, &GridSpec::for_len(3)).unwrap();
        let v = r.split.as_slice();
        assert!(v.windows(2).all(|w| w[0] >= w[1] - 0.01), "{v:?}");
    }

    #[test]
    fn refinement_never_loses_ground() {
        let d = ImportanceVector::new(vec![0.45, 0.35, 0.2]).unwrap();
        let r = grid_max_g(0.05, 0.1, &d, &GridSpec::for_len(3)).unwrap();
        assert_eq!(r.history.len(), 4);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*r.history.last().unwrap(), r.value);
        let x = r.split.as_slice();
        let s: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| v * 0.1f64.exp2().powi(i as i32))
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separable_objective_is_found_exactly() {
        // maximize -(z1 - 0.3)^2 - (z2 - 0.7)^2 on the 2-simplex
        let g = GridSpec {
            resolution: 10,
            refine_rounds: 3,
            budget: 100,
        };
        let (z, v, _) =
            simplex_search(2, &g, |z| -(z[0] - 0.3).powi(2) - (z[1] - 0.7).powi(2)).unwrap();
        assert!((z[0] - 0.3).abs() < 1e-12 && v > -1e-24);
    }

    #[test]
    fn monte_carlo_examples() {
        let (m, s) = mc_expectation(|_| 1.0, 2.0, 10_000, 1).unwrap();
        assert_eq!((m, s), (1.0, 0.0));
        let (m, s) = mc_expectation(|g| if g > 0.5 { 1.0 } else { 0.0 }, 0.5, 200_000, 2).unwrap();
        assert!((m - (-1.0f64).exp()).abs() <= 4.0 * s, "{m} {s}");
        assert!(mc_expectation(|g| g, 1.0, 10, 3).is_err());
    }
}
