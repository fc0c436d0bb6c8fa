//! Finite-blocklength objectives approach the asymptotic ones as n grows.

use uep::fbl::{n5, n6, FblParams};
use uep::ora::algorithm3_global;
use uep::params::presets;
use uep::pds::algorithm1_global;
use uep::quadrature::QuadratureSpec;
use uep::ChannelParams;

fn main() -> uep::Result<()> {
    let (rate, theta, d) = (0.1, 0.2, presets::four_layer());
    let rule = QuadratureSpec::default().rule()?;
    let ch = ChannelParams::from_theta(rate, theta)?;
    let n2 = algorithm1_global(theta, rate, &d).objective;
    let n4 = algorithm3_global(theta, rate, &d).objective;
    println!("asymptotic: power split {n2:.6}, time split {n4:.6}");
    for n in [500, 1000, 5000, 20000] {
        let fbl = FblParams::new(n, ch)?;
        let (alpha, v5) = n5(&d, &fbl, &rule)?;
        let (w, v6) = n6(&d, &fbl, &rule)?;
        println!(
            "n {n:>5}: power {v5:.6} alpha {:.3?}  time {v6:.6} uses {:?}",
            alpha.as_slice(),
            w.counts()
        );
    }
    Ok(())
}
