//! Runs the quick self-check suites and prints one line per suite.

use uep::validate::{run_all, ValidateOptions};

fn main() -> uep::Result<()> {
    let opts = ValidateOptions {
        quick: true,
        ..Default::default()
    };
    for r in run_all(&opts)? {
        println!(
            "{} {}: {}",
            if r.passed { "ok  " } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    Ok(())
}
