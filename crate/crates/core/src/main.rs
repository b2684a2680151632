use std::process::ExitCode;

use clap::Parser;
use nrp_core::cli::{execute, Cli};

fn main() -> ExitCode {
    execute(Cli::parse())
}
