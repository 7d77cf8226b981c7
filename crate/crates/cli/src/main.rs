mod args;
mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use erw_core::ErwError;

use crate::args::Cli;
use crate::commands::Env;

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("erw: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main() -> Result<(), ErwError> {
    let args = config::merge_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(args);
    let env = Env {
        threads: cli.threads.map(|t| t as usize),
    };
    let out = commands::run(&cli.command, &env)?;
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| out.write(cli.format, BufWriter::new(f))),
        None => out.write(cli.format, io::stdout().lock()),
    };
    written.map_err(|e| ErwError::domain(format!("cannot write output: {e}")))
}
