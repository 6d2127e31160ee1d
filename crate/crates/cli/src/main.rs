mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairgame::data_pipeline::{ScenarioKind, ScenarioSpec};
use fairgame::{Policy, Selection};

use crate::commands::Output;
use crate::config::{Format, Overrides, RunConfig};

/// Exit status when an emitted equilibrium fails verification.
const EXIT_UNVERIFIED: u8 = 3;

#[derive(Parser)]
#[command(name = "fairgame", version, about = "Equilibria and welfare of a hiring game under fairness policies")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Existing directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Output formats, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Policies, comma separated: lf, cb, dp, eo, eopp.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_policy)]
    policies: Option<Vec<Policy>>,
    /// Equilibrium selection for the comparison table.
    #[arg(long, global = true, value_parser = parse_selection)]
    select: Option<Selection>,
    /// Add the raw cost integral to applicant welfare instead of subtracting
    /// the expected cost.
    #[arg(long, global = true)]
    aw_literal: bool,
    /// Seed for sampling, the data split and solver starts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Built-in scenario (overrides the config's data source).
    #[arg(long, global = true, value_parser = parse_scenario)]
    scenario: Option<ScenarioKind>,
    /// Sample CSV (overrides the config's data source).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Response curves, ROC curves and the equalized-odds frontier.
    Curves,
    /// Equilibria of each policy with verification.
    Equilibria,
    /// Policy comparison table.
    Compare,
    /// Fit a tabulated model to sample data.
    Fit,
    /// Sample a scenario to CSV.
    Generate,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: fairgame::Error| e.to_string())
}

fn parse_selection(s: &str) -> Result<Selection, String> {
    s.parse().map_err(|e: fairgame::Error| e.to_string())
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|_| {
        format!("unknown scenario {s:?} (expected gaussian_g1, example1, example2, patronizing, dp_welfare_gain)")
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let flags = Overrides {
        policies: cli.policies,
        select: cli.select,
        formats: cli.format,
        aw_literal: cli.aw_literal,
        seed: cli.seed,
        scenario: cli.scenario.map(ScenarioSpec::preset),
        input: cli.input,
    };
    let cfg = RunConfig::read(cli.config.as_deref(), flags)?;
    let out = Output::new(&cli.out)?;
    match cli.command {
        Command::Curves => commands::curves(&cfg, &out),
        Command::Equilibria => commands::equilibria(&cfg, &out),
        Command::Compare => commands::compare(&cfg, &out),
        Command::Fit => commands::fit(&cfg, &out),
        Command::Generate => commands::generate_samples(&cfg, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some equilibria failed verification");
            ExitCode::from(EXIT_UNVERIFIED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
