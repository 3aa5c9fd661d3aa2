use std::process::ExitCode;

use clap::Parser;
use husimi_phase::cli::{exit_code, run, Cli, Outcome};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => {
            eprintln!("husimi-phase: verification failed");
            ExitCode::from(3)
        }
        Ok(Outcome::VerificationError) => {
            eprintln!("husimi-phase: some checks could not run; see the report (raise --cutoff for cutoff_inadequate)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("husimi-phase: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
