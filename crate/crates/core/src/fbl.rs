//! Finite-blocklength objectives and their approximate maximizers.
//!
//! `G_n` (power splits) and `T_n` (time splits) average per-layer success
//! probabilities, bounded via [`crate::bounds::err_bound`], over the fading
//! gain. Maximizing them exactly is impractical, so [`n5`] and [`n6`] evaluate
//! them on the asymptotic candidates plus a few importance-weighted splits and
//! keep the best.

use crate::bounds::err_bound;
use crate::error::{Error, Result};
use crate::ora::{algorithm4_candidates, ResourceSplit};
use crate::params::{ChannelParams, ImportanceVector};
use crate::pds::{algorithm2_candidates, mb_inverse, PowerSplit, XSplit};
use crate::quadrature::QuadratureRule;
use crate::solution::SolverOptions;

/// Blocklength and channel of a finite-blocklength evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblParams {
    n: u64,
    channel: ChannelParams,
}

impl FblParams {
    pub fn new(n: u64, channel: ChannelParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("blocklength must be at least 1".into()));
        }
        Ok(FblParams { n, channel })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }
}

/// Time split whose entries are multiples of `1/n`, stored as channel-use
/// counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedResourceSplit {
    counts: Vec<u64>,
    n: u64,
}

impl QuantizedResourceSplit {
    pub fn new(counts: Vec<u64>, n: u64) -> Result<Self> {
        if counts.iter().sum::<u64>() != n || n == 0 {
            return Err(Error::Argument(format!(
                "channel-use counts {counts:?} do not add up to n = {n}"
            )));
        }
        Ok(QuantizedResourceSplit { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn w(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|c| *c as f64 / self.n as f64)
            .collect()
    }
}

fn check_len(k: usize, d: &ImportanceVector) -> Result<()> {
    if k != d.len() {
        return Err(Error::Argument(format!(
            "split has {k} entries but importance vector has {}",
            d.len()
        )));
    }
    Ok(())
}

/// `G_n(alpha) = sum_i d_i E[prod_{j <= i} (1 - E(n, R, SINR_j(gamma)))]`
/// with `SINR_j = gamma alpha_j P / (1 + gamma P beta_j)`.
pub fn g_n(
    alpha: &PowerSplit,
    d: &ImportanceVector,
    fbl: &FblParams,
    rule: &QuadratureRule,
) -> Result<f64> {
    let f = g_n_integrand(alpha, d, fbl)?;
    Ok(rule.expectation(f, fbl.channel.sigma2()))
}

/// The integrand of [`g_n`] as a function of the channel gain `gamma`.
pub fn g_n_integrand<'a>(
    alpha: &'a PowerSplit,
    d: &'a ImportanceVector,
    fbl: &FblParams,
) -> Result<impl Fn(f64) -> f64 + Sync + 'a> {
    let a = alpha.as_slice();
    check_len(a.len(), d)?;
    let (n, rate, power) = (fbl.n as f64, fbl.channel.rate(), fbl.channel.power());
    let beta: Vec<f64> = (0..a.len()).map(|i| a[i + 1..].iter().sum()).collect();
    let ds = d.as_slice();
    Ok(move |gamma: f64| {
        let mut prefix = 1.0;
        let mut acc = 0.0;
        for i in 0..a.len() {
            let sinr = gamma * a[i] * power / (1.0 + gamma * power * beta[i]);
            prefix *= 1.0 - err_bound(n, rate, sinr);
            if prefix == 0.0 {
                break;
            }
            acc += ds[i] * prefix;
        }
        acc
    })
}

/// `T_n(w) = sum_i d_i E[1 - E(w_i n, R / w_i, gamma P)]`.
pub fn t_n(
    w: &QuantizedResourceSplit,
    d: &ImportanceVector,
    fbl: &FblParams,
    rule: &QuadratureRule,
) -> Result<f64> {
    let f = t_n_integrand(w, d, fbl)?;
    Ok(rule.expectation(f, fbl.channel.sigma2()))
}

/// The integrand of [`t_n`] as a function of the channel gain `gamma`.
pub fn t_n_integrand(
    w: &QuantizedResourceSplit,
    d: &ImportanceVector,
    fbl: &FblParams,
) -> Result<impl Fn(f64) -> f64 + Sync> {
    check_len(w.counts.len(), d)?;
    if w.n != fbl.n {
        return Err(Error::Argument(format!(
            "split is quantized for n = {} but the blocklength is {}",
            w.n, fbl.n
        )));
    }
    let (rate, power) = (fbl.channel.rate(), fbl.channel.power());
    let blocks: Vec<(f64, f64, f64)> = w
        .counts
        .iter()
        .zip(d.as_slice())
        .filter(|(m, _)| **m > 0)
        .map(|(m, di)| (*m as f64, rate * fbl.n as f64 / *m as f64, *di))
        .collect();
    Ok(move |gamma: f64| {
        blocks
            .iter()
            .map(|(m, r, di)| di * (1.0 - err_bound(*m, *r, gamma * power)))
            .sum::<f64>()
    })
}

/// Round `v` to multiples of `1/n`: floor every `v_i n`, then give the
/// remaining channel uses to the largest fractional parts, smaller index
/// first on ties.
pub fn m_i_round(v: &ResourceSplit, n: u64) -> Result<QuantizedResourceSplit> {
    if n == 0 {
        return Err(Error::Argument("blocklength must be at least 1".into()));
    }
    let scaled: Vec<f64> = v.as_slice().iter().map(|x| x * n as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let remaining = n.saturating_sub(assigned) as usize;
    let mut order: Vec<usize> = (0..scaled.len()).filter(|&i| scaled[i] > 0.0).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (scaled[i] - scaled[i].floor(), scaled[j] - scaled[j].floor());
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    if remaining > order.len() {
        return Err(Error::Domain(format!(
            "split sums to {} and cannot be rounded to n = {n}",
            v.as_slice().iter().sum::<f64>()
        )));
    }
    for &i in order.iter().take(remaining) {
        counts[i] += 1;
    }
    QuantizedResourceSplit::new(counts, n)
}

/// Importance-weighted points of `S_K` with supports `1..=i` for each `i`.
pub fn heuristic_x_inits(d: &ImportanceVector, rate: f64) -> Vec<XSplit> {
    let ds = d.as_slice();
    let two_r = rate.exp2();
    (1..=ds.len())
        .map(|i| {
            let total: f64 = ds[..i].iter().sum();
            let x = (0..ds.len())
                .map(|j| {
                    if j < i {
                        ds[j] / (total * two_r.powi(j as i32))
                    } else {
                        0.0
                    }
                })
                .collect();
            XSplit::from_raw(x)
        })
        .collect()
}

/// `d` truncated to its first `i` entries and renormalized, for each `i`.
pub fn heuristic_v_inits(d: &ImportanceVector) -> Vec<ResourceSplit> {
    let ds = d.as_slice();
    (1..=ds.len())
        .map(|i| {
            let total: f64 = ds[..i].iter().sum();
            ResourceSplit::from_raw(
                (0..ds.len())
                    .map(|j| if j < i { ds[j] / total } else { 0.0 })
                    .collect(),
            )
        })
        .collect()
}

/// Best power split under `G_n` among the asymptotic local candidates and the
/// heuristic splits, with its value.
pub fn n5(
    d: &ImportanceVector,
    fbl: &FblParams,
    rule: &QuadratureRule,
) -> Result<(PowerSplit, f64)> {
    let ch = fbl.channel;
    let local = algorithm2_candidates(ch.theta(), ch.rate(), d, &SolverOptions::default());
    let mut xs: Vec<XSplit> = Vec::new();
    if !local.early_exit {
        xs.extend(local.candidates.into_iter().map(|c| c.split));
    }
    xs.extend(heuristic_x_inits(d, ch.rate()));
    let mut best: Option<(PowerSplit, f64)> = None;
    for x in &xs {
        let alpha = mb_inverse(x, ch.rate())?;
        let value = g_n(&alpha, d, fbl, rule)?;
        if best.as_ref().is_none_or(|b| value > b.1) {
            best = Some((alpha, value));
        }
    }
    Ok(best.expect("at least one heuristic split"))
}

/// Best quantized time split under `T_n` among the asymptotic local
/// candidates and the heuristic splits, with its value.
pub fn n6(
    d: &ImportanceVector,
    fbl: &FblParams,
    rule: &QuadratureRule,
) -> Result<(QuantizedResourceSplit, f64)> {
    let ch = fbl.channel;
    let local = algorithm4_candidates(ch.theta(), ch.rate(), d, &SolverOptions::default());
    let mut vs: Vec<ResourceSplit> = Vec::new();
    if !local.early_exit {
        vs.extend(local.candidates.into_iter().map(|c| c.split));
    }
    vs.extend(heuristic_v_inits(d));
    let mut best: Option<(QuantizedResourceSplit, f64)> = None;
    for v in &vs {
        let w = m_i_round(v, fbl.n)?;
        let value = t_n(&w, d, fbl, rule)?;
        if best.as_ref().is_none_or(|b| value > b.1) {
            best = Some((w, value));
        }
    }
    Ok(best.expect("at least one heuristic split"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::presets;
    use crate::pds::{algorithm2_local, mb_forward, objective_g, weighted_sum_gap};
    use crate::quadrature::QuadratureSpec;
    use proptest::prelude::*;

    fn gl() -> QuadratureRule {
        QuadratureSpec::default().rule().unwrap()
    }

    fn fbl(n: u64, rate: f64, theta: f64) -> FblParams {
        FblParams::new(n, ChannelParams::from_theta(rate, theta).unwrap()).unwrap()
    }

    #[test]
    fn rounding_examples() {
        let v = ResourceSplit::single(3);
        assert_eq!(m_i_round(&v, 17).unwrap().counts(), &[17, 0, 0]);
        let v = ResourceSplit::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(m_i_round(&v, 3).unwrap().counts(), &[2, 1]);
        let v = ResourceSplit::new(vec![0.6, 0.4, 0.0]).unwrap();
        assert_eq!(m_i_round(&v, 1).unwrap().counts(), &[1, 0, 0]);
    }

    proptest! {
        #[test]
        fn rounding_properties(u in proptest::collection::vec(0.0..1.0f64, 1..8), zero in 0usize..8) {
            let mut u = u;
            if zero < u.len() && u.len() > 1 {
                u[zero] = 0.0;
            }
            let s: f64 = u.iter().sum();
            prop_assume!(s > 1e-6);
            let v = ResourceSplit::new(u.iter().map(|x| x / s).collect()).unwrap();
            let w = m_i_round(&v, 1000).unwrap();
            prop_assert_eq!(w.counts().iter().sum::<u64>(), 1000);
            for (vi, wi) in v.as_slice().iter().zip(w.w()) {
                prop_assert!((vi - wi).abs() < 1e-3);
                if *vi == 0.0 {
                    prop_assert_eq!(wi, 0.0);
                }
            }
        }
    }

    #[test]
    fn heuristic_splits() {
        let d = ImportanceVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let xs = heuristic_x_inits(&d, 0.1);
        assert_eq!(xs[0].as_slice(), &[1.0, 0.0, 0.0]);
        let x2 = xs[1].as_slice();
        assert!((x2[0] - 0.5 / 0.8).abs() < 1e-15);
        assert!((x2[1] - 0.3 / 0.8 / 0.1f64.exp2()).abs() < 1e-15);
        assert_eq!(x2[2], 0.0);
        for x in &xs {
            assert!(weighted_sum_gap(x.as_slice(), 0.1) <= 1e-12);
        }
        let vs = heuristic_v_inits(&d);
        assert_eq!(vs[0].as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(vs[2].as_slice(), d.as_slice());
        for v in &vs {
            assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn silent_layer_cuts_off_later_layers() {
        let d = presets::four_layer();
        let f = fbl(1000, 0.1, 0.1);
        let rule = gl();
        let p = f.channel().power();
        let a = PowerSplit::new(vec![0.6, 0.0, 0.4, 0.0]).unwrap();
        let got = g_n(&a, &d, &f, &rule).unwrap();
        let first_only = d[0]
            * rule.expectation(
                |g| 1.0 - err_bound(1000.0, 0.1, g * 0.6 * p / (1.0 + g * p * 0.4)),
                f.channel().sigma2(),
            );
        assert!(got > 0.0);
        assert!((got - first_only).abs() < 1e-15);
        let w = QuantizedResourceSplit::new(vec![1000, 0, 0, 0], 1000).unwrap();
        let t = t_n(&w, &d, &f, &rule).unwrap();
        assert!(t > 0.0 && t <= d[0]);
    }

    #[test]
    fn single_block_objectives_coincide_and_grow_with_n() {
        let d = ImportanceVector::new(vec![1.0]).unwrap();
        let rule = gl();
        let mut prev = 0.0;
        for n in [500, 1000, 5000] {
            let f = fbl(n, 0.5, 0.2);
            let g = g_n(&PowerSplit::new(vec![1.0]).unwrap(), &d, &f, &rule).unwrap();
            let t = t_n(
                &QuantizedResourceSplit::new(vec![n], n).unwrap(),
                &d,
                &f,
                &rule,
            )
            .unwrap();
            assert!((g - t).abs() < 1e-15);
            assert!(g >= prev && g <= 1.0);
            prev = g;
        }
    }

    #[test]
    fn long_blocks_approach_the_outage_limit() {
        let d = presets::four_layer();
        let (rate, theta) = (0.1, 0.05);
        let x = algorithm2_local(theta, rate, &d);
        let alpha = mb_inverse(&x.split, rate).unwrap();
        let v = g_n(&alpha, &d, &fbl(1_000_000, rate, theta), &gl()).unwrap();
        let asym = objective_g(x.split.as_slice(), &d, theta).unwrap();
        assert!((v - asym).abs() <= 0.02, "{v} vs {asym}");
    }

    #[test]
    fn n5_dominates_the_asymptotic_split() {
        let d = presets::four_layer();
        let rule = gl();
        for theta in [0.05, 0.2, 0.6] {
            let f = fbl(2000, 0.1, theta);
            let (alpha, value) = n5(&d, &f, &rule).unwrap();
            assert!(mb_forward(&alpha, 0.1).is_ok());
            let x = algorithm2_local(theta, 0.1, &d);
            let base = g_n(&mb_inverse(&x.split, 0.1).unwrap(), &d, &f, &rule).unwrap();
            assert!(value >= base);
        }
    }

    #[test]
    fn beyond_thresholds_only_heuristics_compete() {
        let d = presets::four_layer();
        let rule = gl();
        let f = fbl(1000, 0.1, 2.5);
        let (_, v5) = n5(&d, &f, &rule).unwrap();
        let best_h = heuristic_x_inits(&d, 0.1)
            .iter()
            .map(|x| g_n(&mb_inverse(x, 0.1).unwrap(), &d, &f, &rule).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(v5, best_h);
        let (_, v6) = n6(&d, &f, &rule).unwrap();
        let best_h = heuristic_v_inits(&d)
            .iter()
            .map(|v| t_n(&m_i_round(v, 1000).unwrap(), &d, &f, &rule).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(v6, best_h);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let d = presets::four_layer();
        let rule = gl();
        let f = fbl(100, 0.1, 0.1);
        assert!(g_n(&PowerSplit::new(vec![1.0]).unwrap(), &d, &f, &rule).is_err());
        let w = QuantizedResourceSplit::new(vec![50, 50, 0, 0], 100).unwrap();
        assert!(t_n(&w, &d, &fbl(200, 0.1, 0.1), &rule).is_err());
        assert!(QuantizedResourceSplit::new(vec![50, 40], 100).is_err());
        assert!(FblParams::new(0, *f.channel()).is_err());
    }
}
