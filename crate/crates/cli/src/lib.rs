// SPDX-License-Identifier: Apache-2.0

//! Staged command-line pipeline over the `echoscope` library.

pub mod args;
pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

use clap::Parser;

pub use args::{Analysis, Cli, Command};
pub use config::{stage_seed, PipelineConfig};
pub use error::CliError;

/// Resolves settings for `cli` and runs its command.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut layers = Vec::new();
    if let Some(path) = &cli.config {
        layers.push(config::read_config_file(path)?);
    }
    layers.push(cli.overrides.to_map());
    let cfg = PipelineConfig::resolve(&layers)?;
    let ctx = stages::Context { work: cli.work, cfg };
    match cli.command {
        Command::Synth { out } => stages::synth(&ctx.cfg, &out),
        Command::Ingest { tweets, bot_scores } => stages::ingest(&ctx, &tweets, bot_scores.as_deref()),
        Command::Graph => stages::graph(&ctx),
        Command::Seed => stages::seed(&ctx),
        Command::Train => stages::train(&ctx),
        Command::Score => stages::score(&ctx),
        Command::Eval => stages::eval(&ctx),
        Command::Analyze { which } => stages::analyze(&ctx, which),
        Command::Report { out } => stages::report(&ctx, out.as_deref()),
    }
}

/// Parses `argv` and runs it, returning the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("echoscope: {e}");
            e.exit_code()
        }
    }
}
