//! Merging adjacent blocks of a 16-block source: fewer, faster blocks lose
//! value on every channel.

use uep::experiments::partition_table;
use uep::params::presets;

fn main() -> uep::Result<()> {
    let table = partition_table(
        0.1,
        1.0,
        &[1.0, 2.0, 5.0, 10.0, 20.0],
        &presets::sixteen_layer(),
        None,
    )?;
    print!("{}", table.to_csv());
    Ok(())
}
