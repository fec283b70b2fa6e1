// SPDX-License-Identifier: MIT OR Apache-2.0

//! `cpwalk`: reproducible change-point jobs.

mod args;
mod input;
mod jobs;
mod output;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    if let Err(err) = jobs::run(cli) {
        eprintln!("cpwalk: {err:#}");
        std::process::exit(1);
    }
}
