//! Expectations over an exponentially distributed channel power gain.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Samples drawn from one ChaCha stream before moving to the next.
const MC_CHUNK: usize = 1 << 16;
/// Node counts above which integrands are evaluated in parallel.
const PARALLEL_NODES: usize = 4096;

/// How `E[f(gamma)]` is approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureSpec {
    GaussLaguerre {
        order: usize,
    },
    /// Gauss-Legendre of the given order on `panels` log-spaced panels of
    /// `u` in `[1e-6, 50]`, plus one panel on `[0, 1e-6]`.
    CompositeLegendre {
        panels: usize,
        order: usize,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::CompositeLegendre {
            panels: 100,
            order: 8,
        }
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureSpec::GaussLaguerre { order } => write!(f, "gl:{order}"),
            QuadratureSpec::CompositeLegendre { panels, order } => write!(f, "cl:{panels}:{order}"),
            QuadratureSpec::MonteCarlo { samples, seed } => write!(f, "mc:{samples}:{seed}"),
        }
    }
}

impl FromStr for QuadratureSpec {
    type Err = Error;

    /// `gl:ORDER`, `cl:PANELS:ORDER` or `mc:SAMPLES:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "quadrature spec `{s}` is not gl:ORDER, cl:PANELS:ORDER or mc:SAMPLES:SEED"
            ))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["gl", order] => QuadratureSpec::GaussLaguerre {
                order: order.parse().map_err(|_| bad())?,
            },
            ["cl", panels, order] => QuadratureSpec::CompositeLegendre {
                panels: panels.parse().map_err(|_| bad())?,
                order: order.parse().map_err(|_| bad())?,
            },
            ["mc", samples, seed] => QuadratureSpec::MonteCarlo {
                samples: samples.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let count = match self {
            QuadratureSpec::GaussLaguerre { order } => *order,
            QuadratureSpec::CompositeLegendre { panels, order } => (*panels).min(*order),
            QuadratureSpec::MonteCarlo { samples, .. } => *samples,
        };
        if count == 0 {
            return Err(Error::Config("quadrature needs at least one node".into()));
        }
        Ok(())
    }

    /// Nodes and weights for a unit-mean exponential variable.
    pub fn rule(&self) -> Result<QuadratureRule> {
        self.validate()?;
        Ok(match *self {
            QuadratureSpec::GaussLaguerre { order } => gauss_laguerre(order),
            QuadratureSpec::CompositeLegendre { panels, order } => {
                composite_legendre(panels, order)
            }
            QuadratureSpec::MonteCarlo { samples, seed } => monte_carlo(samples, seed),
        })
    }
}

/// Weighted nodes approximating the unit-mean exponential distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E[f(gamma)]` for `gamma ~ Exp(mean sigma2)`. The sum runs in node
    /// order so the result does not depend on the thread count.
    pub fn expectation<F: Fn(f64) -> f64 + Sync>(&self, f: F, sigma2: f64) -> f64 {
        let values: Vec<f64> = if self.nodes.len() >= PARALLEL_NODES {
            self.nodes.par_iter().map(|u| f(sigma2 * u)).collect()
        } else {
            self.nodes.iter().map(|u| f(sigma2 * u)).collect()
        };
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Golub-Welsch: nodes are the eigenvalues of the Laguerre Jacobi matrix and
/// weights the squared first eigenvector components.
fn gauss_laguerre(order: usize) -> QuadratureRule {
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 0..order {
        j[(k, k)] = (2 * k + 1) as f64;
        if k + 1 < order {
            j[(k, k + 1)] = (k + 1) as f64;
            j[(k + 1, k)] = (k + 1) as f64;
        }
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Panels whose widths grow with `u`, so outage transitions at small gains
/// are resolved as finely, relative to their location, as those at large
/// gains. The mass beyond `u = 50` is below `2e-22` and dropped.
fn composite_legendre(panels: usize, order: usize) -> QuadratureRule {
    const U_MIN: f64 = 1e-6;
    const U_MAX: f64 = 50.0;
    let base = gauss_legendre(order);
    let ratio = (U_MAX / U_MIN).ln() / panels as f64;
    let mut edges = vec![0.0];
    edges.extend((0..=panels).map(|k| U_MIN * (ratio * k as f64).exp()));
    let mut nodes = Vec::with_capacity(edges.len() * order);
    let mut weights = Vec::with_capacity(edges.len() * order);
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, w) in &base {
            let u = mid + half * t;
            nodes.push(u);
            weights.push(half * w * (-u).exp());
        }
    }
    QuadratureRule { nodes, weights }
}

/// Equal-weight unit-mean exponential samples `-ln U`. Chunk `c` is drawn
/// from stream `c` of the seeded generator.
fn monte_carlo(samples: usize, seed: u64) -> QuadratureRule {
    let nodes: Vec<f64> = (0..samples.div_ceil(MC_CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            (0..len)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect::<Vec<_>>()
        })
        .collect();
    let w = 1.0 / samples as f64;
    QuadratureRule {
        weights: vec![w; nodes.len()],
        nodes,
    }
}

/// `E[f(gamma)]` for `gamma ~ Exp(mean sigma2)` under `spec`.
pub fn exp_expectation<F: Fn(f64) -> f64 + Sync>(
    f: F,
    sigma2: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(spec.rule()?.expectation(f, sigma2))
}
