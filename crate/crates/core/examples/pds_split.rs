//! Optimal power split for the four-layer vector as the channel worsens.

use uep::params::presets;
use uep::pds::{algorithm1_global, algorithm2_local, mb_inverse};

fn main() -> uep::Result<()> {
    let (rate, d) = (0.1, presets::four_layer());
    for theta in [0.02, 0.1, 0.2, 0.4, 0.8] {
        let global = algorithm1_global(theta, rate, &d);
        let local = algorithm2_local(theta, rate, &d);
        let alpha = mb_inverse(&global.split, rate)?;
        println!(
            "theta {theta:<5} layers {} G {:.6} (local {:.6}) alpha {:.4?}",
            global.ell,
            global.objective,
            local.objective,
            alpha.as_slice()
        );
    }
    Ok(())
}
