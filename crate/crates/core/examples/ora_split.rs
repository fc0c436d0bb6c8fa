//! Optimal time split for the eight-layer vector, and how close it comes to
//! the power split.

use uep::ora::{algorithm3_global, theta_c};
use uep::params::presets;
use uep::pds::algorithm1_global;

fn main() {
    let (rate, d) = (0.1, presets::eight_layer());
    println!("single-block threshold theta_c = {:.4}", theta_c(rate));
    for theta in [0.02, 0.05, 0.1, 0.3, 0.6] {
        let t = algorithm3_global(theta, rate, &d);
        let g = algorithm1_global(theta, rate, &d);
        println!(
            "theta {theta:<5} blocks {} T {:.6} T/G {:.2}% v {:.3?}",
            t.ell,
            t.objective,
            100.0 * t.objective / g.objective,
            t.split.as_slice()
        );
    }
}
