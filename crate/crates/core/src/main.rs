use std::process::ExitCode;

use clap::Parser;
use uep::cli::{emit, exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| emit(&o, &mut std::io::stdout().lock()).map(|_| o));
    match outcome {
        Ok(o) => {
            if o.code != 0 {
                eprintln!("validation failed");
            }
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
