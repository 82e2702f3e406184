//! `fpshock`: shock analysis, viscous profiles and time evolution for the
//! fluid–particle models, driven by a TOML configuration.

mod commands;
mod config;
mod csv;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, CliError};

#[derive(Parser)]
#[command(name = "fpshock", version, about = "Fluid-particle shock waves and viscous profiles")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set model.theta=0.5`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenstructure and stability diagnostics at the base state.
    Analyze,
    /// Hugoniot branches through the base state with Liu flags.
    Hugoniot,
    /// Viscous shock profile.
    Profile,
    /// Time evolution of Riemann data or of a perturbed profile.
    Evolve,
    /// τ_# and n_× over a κ grid.
    SweepTau,
    /// g_κ(n) tables.
    SweepG,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Hugoniot => "hugoniot",
            Command::Profile => "profile",
            Command::Evolve => "evolve",
            Command::SweepTau => "sweep-tau",
            Command::SweepG => "sweep-g",
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let cfg = parse_config(cli.config.as_deref(), &cli.set)?;
    let dir = cfg.output_dir();
    match cli.command {
        Command::Analyze => commands::analyze(&cfg, &dir),
        Command::Hugoniot => commands::hugoniot(&cfg, &dir),
        Command::Profile => commands::profile(&cfg, &dir),
        Command::Evolve => commands::evolve(&cfg, &dir),
        Command::SweepTau => commands::sweep_tau(&cfg, &dir),
        Command::SweepG => commands::sweep_g(&cfg, &dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("error kind=usage message=\"{}\"", e.kind());
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(lines) => {
            println!("{}: ok", cli.command.name());
            for l in lines {
                println!("  {l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
            eprintln!("error kind={} message=\"{msg}\"", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
