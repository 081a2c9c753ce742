use std::process::ExitCode;

use clap::Parser;
use qvscreen::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
