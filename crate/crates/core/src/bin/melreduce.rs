use std::process::ExitCode;

use clap::Parser;
use melreduce::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse()).into()
}
