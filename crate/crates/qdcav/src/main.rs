use std::process::ExitCode;

use clap::Parser;
use qdcav::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdcav: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
