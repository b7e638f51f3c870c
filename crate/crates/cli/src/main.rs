//! Command-line experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use config::{merged_fields, InvalidSpec, SharedFields};
use experiments::{ar, bernoulli, mixture, validate, varsel};
use output::Format;
use runner::{execute, Driver, RunOptions};

#[derive(Parser)]
#[command(name = "cposterior", version, about = "Coarsened-posterior experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bernoulli toy: standard vs approximate and exact c-posteriors.
    Bernoulli(Run<bernoulli::BernoulliFields>),
    /// Autoregressive order selection under misspecification.
    Ar(Run<ar::ArFields>),
    /// Spike-and-slab variable selection.
    Varsel(Run<varsel::VarselFields>),
    /// Mixtures with an unknown number of components.
    Mixture(Run<mixture::MixtureFields>),
    /// Monte-Carlo check of the small-sample correction.
    Validate(Run<validate::ValidateFields>),
}

#[derive(Args)]
struct Run<F: Args> {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    shared: SharedFields,
    #[command(flatten)]
    fields: F,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write per-cell chain traces.
    #[arg(long)]
    save_traces: bool,
    /// Table format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl<F: Args + Serialize> Run<F> {
    fn resolve<D: Driver>(
        &self,
        resolve: fn(serde_json::Map<String, Value>) -> anyhow::Result<D>,
    ) -> anyhow::Result<(D, RunOptions)> {
        let flags = [serde_json::to_value(&self.shared)?, serde_json::to_value(&self.fields)?];
        let map = merged_fields(self.config.as_deref(), &flags)?;
        let driver = resolve(map)?;
        if self.jobs == Some(0) {
            anyhow::bail!(InvalidSpec(vec!["jobs: must be >= 1".into()]));
        }
        let opts =
            RunOptions { out: self.out.clone(), jobs: self.jobs, save_traces: self.save_traces, format: self.format };
        Ok((driver, opts))
    }
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    fn go<F: Args + Serialize, D: Driver>(
        r: &Run<F>,
        resolve: fn(serde_json::Map<String, Value>) -> anyhow::Result<D>,
    ) -> anyhow::Result<usize> {
        let (driver, opts) = r.resolve(resolve)?;
        execute(&driver, &opts)
    }
    match &cli.command {
        Command::Bernoulli(r) => go(r, bernoulli::resolve),
        Command::Ar(r) => go(r, ar::resolve),
        Command::Varsel(r) => go(r, varsel::resolve),
        Command::Mixture(r) => go(r, mixture::resolve),
        Command::Validate(r) => go(r, validate::resolve),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} cell(s) failed; see manifest.json");
            ExitCode::from(1)
        }
        Err(e) => {
            if let Some(invalid) = e.downcast_ref::<InvalidSpec>() {
                eprint!("{invalid}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
