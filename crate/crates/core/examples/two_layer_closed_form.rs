//! Two layers: the closed form, the local solver and a brute-force grid.

use uep::oracle::{grid_max_g, GridSpec};
use uep::pds::{algorithm2_local, mb_inverse, solve_k2};
use uep::ImportanceVector;

fn main() -> uep::Result<()> {
    let d = ImportanceVector::new(vec![0.7, 0.3])?;
    let rate = 0.5;
    for theta in [0.05, 0.2, 0.5] {
        let k2 = solve_k2(theta, rate, d[0], d[1])?;
        let local = algorithm2_local(theta, rate, &d);
        let grid = grid_max_g(theta, rate, &d, &GridSpec::for_len(2))?;
        println!(
            "theta {theta:<4} alpha* {:.6} (solver {:.6})  G {:.9} solver {:.9} grid {:.9}",
            k2.alpha_star,
            mb_inverse(&local.split, rate)?.as_slice()[0],
            k2.objective,
            local.objective,
            grid.value
        );
    }
    Ok(())
}
