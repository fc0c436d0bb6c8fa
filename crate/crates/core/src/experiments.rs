//! Parameter sweeps producing CSV tables: error bounds against rate,
//! asymptotic and finite-blocklength objectives against `theta`, and the
//! block-partition comparison against `sigma2`.

use rayon::prelude::*;

use crate::bounds::{capacity, err_bound, err_exp, err_nor};
use crate::error::{Error, Result};
use crate::fbl::{n5, n6, FblParams};
use crate::ora::algorithm3_global;
use crate::params::{snr_threshold, ChannelParams, ImportanceVector};
use crate::pds::{algorithm1_global, mb_inverse};
use crate::quadrature::QuadratureRule;
use crate::report::Table;

/// Which allocation schemes a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Pds,
    Ora,
    #[default]
    Both,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pds" => Ok(Scheme::Pds),
            "ora" => Ok(Scheme::Ora),
            "both" => Ok(Scheme::Both),
            _ => Err(Error::Config(format!(
                "scheme `{s}` is not pds, ora or both"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Pds => "pds",
            Scheme::Ora => "ora",
            Scheme::Both => "both",
        })
    }
}

/// Points `min, min + step, ...` not exceeding `max` (up to rounding).
pub fn linear_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !min.is_finite() || !max.is_finite() || min > max {
        return Err(Error::Config(format!(
            "grid needs min <= max and step > 0, got {min}..{max} step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Resource(format!(
            "grid of {count} points is too large"
        )));
    }
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// Rows `(f, R, err_exp, err_nor, err_bound)` for `f = k / points`,
/// `k = 1..=points`, with `R = f C(snr)`.
pub fn error_bounds_table(n: f64, snr: f64, points: usize) -> Result<Table> {
    if !(n > 0.0) || !(snr > 0.0) || points == 0 {
        return Err(Error::Config(
            "error bounds need n > 0, snr > 0 and points >= 1".into(),
        ));
    }
    let c = capacity(snr);
    let mut table = Table::new(
        ["f", "R", "err_exp", "err_nor", "err_bound"]
            .map(String::from)
            .to_vec(),
    )
    .with_meta("n", n)
    .with_meta("rho", snr)
    .with_meta("capacity", c);
    table.rows = (1..=points)
        .into_par_iter()
        .map(|k| {
            let f = k as f64 / points as f64;
            let r = f * c;
            vec![
                f,
                r,
                err_exp(n, r, snr),
                err_nor(n, r, snr),
                err_bound(n, r, snr),
            ]
        })
        .collect();
    Ok(table)
}

fn numbered(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}_{i}"))
}

fn channel_meta(table: &mut Table, channels: &[ChannelParams]) {
    if channels.windows(2).all(|w| w[0].sigma2() == w[1].sigma2()) {
        table.push_meta("P", channels[0].power());
        table.push_meta("sigma2", channels[0].sigma2());
    } else {
        table.push_meta("P", 1);
        table.push_meta("sigma2", "(2^R-1)/theta");
    }
}

/// Asymptotic optima per channel point: `theta, N2, alpha_*, N4, v_*,
/// ratio_pct` (columns of schemes not requested are omitted).
pub fn asym_table(
    channels: &[ChannelParams],
    d: &ImportanceVector,
    scheme: Scheme,
) -> Result<Table> {
    let rate = common_rate(channels)?;
    let k = d.len();
    let (pds, ora) = (scheme != Scheme::Ora, scheme != Scheme::Pds);
    let mut header = vec!["theta".to_string()];
    if pds {
        header.push("N2".into());
        header.extend(numbered("alpha", k));
    }
    if ora {
        header.push("N4".into());
        header.extend(numbered("v", k));
    }
    if pds && ora {
        header.push("ratio_pct".into());
    }
    let mut table = Table::new(header)
        .with_meta("command", "asym")
        .with_meta("R", rate)
        .with_meta("d", join(d.as_slice()))
        .with_meta("scheme", scheme);
    channel_meta(&mut table, channels);
    table.rows = channels
        .par_iter()
        .map(|ch| -> Result<Vec<f64>> {
            let theta = ch.theta();
            let mut row = vec![theta];
            let mut n2 = f64::NAN;
            if pds {
                let sol = algorithm1_global(theta, rate, d);
                n2 = sol.objective;
                row.push(n2);
                row.extend_from_slice(mb_inverse(&sol.split, rate)?.as_slice());
            }
            if ora {
                let sol = algorithm3_global(theta, rate, d);
                row.push(sol.objective);
                row.extend_from_slice(sol.split.as_slice());
                if pds {
                    row.push(100.0 * sol.objective / n2);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(table)
}

/// Finite-blocklength optima per channel point: `theta, N5, N6, N2, N4` and
/// the three percentage ratios.
pub fn fbl_table(
    channels: &[ChannelParams],
    d: &ImportanceVector,
    n: u64,
    rule: &QuadratureRule,
) -> Result<Table> {
    let rate = common_rate(channels)?;
    let header = [
        "theta",
        "N5",
        "N6",
        "N2",
        "N4",
        "pct_fbl_vs_asym_pds",
        "pct_fbl_vs_asym_ora",
        "pct_ora_vs_pds_fbl",
    ];
    let mut table = Table::new(header.map(String::from).to_vec())
        .with_meta("command", "fbl")
        .with_meta("R", rate)
        .with_meta("n", n)
        .with_meta("d", join(d.as_slice()));
    channel_meta(&mut table, channels);
    table.rows = channels
        .par_iter()
        .map(|ch| -> Result<Vec<f64>> {
            let fbl = FblParams::new(n, *ch)?;
            let (_, v5) = n5(d, &fbl, rule)?;
            let (_, v6) = n6(d, &fbl, rule)?;
            let v2 = algorithm1_global(ch.theta(), rate, d).objective;
            let v4 = algorithm3_global(ch.theta(), rate, d).objective;
            Ok(vec![
                ch.theta(),
                v5,
                v6,
                v2,
                v4,
                100.0 * v5 / v2,
                100.0 * v6 / v4,
                100.0 * v6 / v5,
            ])
        })
        .collect::<Result<_>>()?;
    Ok(table)
}

/// Importance vectors obtained by repeatedly summing adjacent pairs, from `d`
/// down to a single entry. `d.len()` must be a power of two.
pub fn partition_levels(d: &ImportanceVector) -> Result<Vec<ImportanceVector>> {
    if !d.len().is_power_of_two() {
        return Err(Error::Config(format!(
            "block count {} is not a power of two",
            d.len()
        )));
    }
    let mut levels = vec![d.clone()];
    while levels.last().expect("nonempty").len() > 1 {
        let next = levels.last().expect("nonempty").aggregate_pairs()?;
        levels.push(next);
    }
    Ok(levels)
}

/// Time-split optimum per `sigma2` for every pairwise aggregation of `d`,
/// where merging two blocks doubles the per-block rate. With `n`, the
/// finite-blocklength values are appended.
pub fn partition_table(
    rate: f64,
    power: f64,
    sigma2s: &[f64],
    d: &ImportanceVector,
    n: Option<(u64, &QuadratureRule)>,
) -> Result<Table> {
    let levels = partition_levels(d)?;
    let mut header = vec!["sigma2".to_string()];
    header.extend(levels.iter().map(|l| format!("N4_K{}", l.len())));
    if n.is_some() {
        header.extend(levels.iter().map(|l| format!("N6_K{}", l.len())));
    }
    let mut table = Table::new(header)
        .with_meta("command", "partition")
        .with_meta("R", rate)
        .with_meta("P", power)
        .with_meta("d", join(d.as_slice()));
    if let Some((n, _)) = n {
        table.push_meta("n", n);
    }
    table.rows = sigma2s
        .par_iter()
        .map(|&sigma2| -> Result<Vec<f64>> {
            let mut row = vec![sigma2];
            let mut channels = Vec::with_capacity(levels.len());
            for (j, level) in levels.iter().enumerate() {
                let r = rate * (1u64 << j) as f64;
                let ch = ChannelParams::new(r, power, sigma2)?;
                row.push(algorithm3_global(ch.theta(), r, level).objective);
                channels.push(ch);
            }
            if let Some((n, rule)) = n {
                for (ch, level) in channels.iter().zip(&levels) {
                    row.push(n6(level, &FblParams::new(n, *ch)?, rule)?.1);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(table)
}

/// Channels along a `theta` grid with `P = 1`.
pub fn theta_channels(rate: f64, thetas: &[f64]) -> Result<Vec<ChannelParams>> {
    thetas
        .iter()
        .map(|t| ChannelParams::from_theta(rate, *t))
        .collect()
}

fn common_rate(channels: &[ChannelParams]) -> Result<f64> {
    let first = channels
        .first()
        .ok_or_else(|| Error::Config("empty parameter sweep".into()))?;
    if channels.iter().any(|c| c.rate() != first.rate()) {
        return Err(Error::Argument(
            "all sweep points must share one rate".into(),
        ));
    }
    Ok(first.rate())
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| crate::report::format_number(*x))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `e^{-theta}` for one block carrying everything at rate `rate`.
pub fn single_block_success(rate: f64, power: f64, sigma2: f64) -> f64 {
    (-snr_threshold(rate) / (power * sigma2)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::presets;

    #[test]
    fn grid_endpoints() {
        let g = linear_grid(0.005, 0.995, 0.005).unwrap();
        assert_eq!(g.len(), 199);
        assert!((g[198] - 0.995).abs() < 1e-12);
        assert!(linear_grid(1.0, 0.5, 0.1).is_err());
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn error_bound_rows() {
        let t = error_bounds_table(1e4, 3.0, 100).unwrap();
        assert_eq!(t.rows.len(), 100);
        for r in &t.rows {
            assert_eq!(r[4], r[2].min(r[3]));
        }
        assert!(t.rows[99][4] >= 0.4);
        assert!(t.rows[9][2] < t.rows[9][3]);
        assert!(t.rows[99][2] > t.rows[99][3]);
    }

    #[test]
    fn asym_columns_follow_the_scheme() {
        let d = presets::four_layer();
        let ch = theta_channels(0.1, &[0.1, 0.3]).unwrap();
        let t = asym_table(&ch, &d, Scheme::Both).unwrap();
        assert_eq!(t.header.len(), 1 + 5 + 5 + 1);
        for r in &t.rows {
            let alpha: f64 = r[2..6].iter().sum();
            let v: f64 = r[7..11].iter().sum();
            assert!((alpha - 1.0).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
            assert!(r[11] <= 100.0 + 1e-6);
        }
        assert_eq!(asym_table(&ch, &d, Scheme::Ora).unwrap().header[1], "N4");
        assert_eq!(asym_table(&ch, &d, Scheme::Pds).unwrap().header.len(), 6);
        assert!(t.to_csv().contains("# sigma2=(2^R-1)/theta\n"));
    }

    #[test]
    fn partition_levels_and_single_block_column() {
        let d = ImportanceVector::new(vec![0.5, 0.25, 0.2, 0.05]).unwrap();
        let levels = partition_levels(&d).unwrap();
        assert_eq!(levels[1].as_slice(), &[0.75, 0.25]);
        assert_eq!(levels[2].as_slice(), &[1.0]);
        let odd = ImportanceVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert!(matches!(partition_levels(&odd), Err(Error::Config(_))));

        let t = partition_table(0.1, 1.0, &[2.0, 5.0], &presets::sixteen_layer(), None).unwrap();
        assert_eq!(t.header.last().unwrap(), "N4_K1");
        for r in &t.rows {
            let expect = single_block_success(1.6, 1.0, r[0]);
            assert!((r[5] - expect).abs() < 1e-12, "{} vs {expect}", r[5]);
        }
    }
}
