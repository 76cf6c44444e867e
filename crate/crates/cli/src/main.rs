//! `removal-attrib`: attributions, operator norms and the synthetic
//! experiments from the command line.
//!
//! Exit status: 0 when every asserted check holds, 2 when an assertion
//! fails, 1 on any error.

mod commands;
mod config;
mod model_spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::{attribute_keys, experiment_keys, norms_keys, Outcome, EXPERIMENTS};
use config::{help_table, Config, ConfigError, Key};

#[derive(Parser)]
#[command(name = "removal-attrib", version, about = "Removal-based feature attributions and robustness certificates")]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Random seed; sets run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; sets output.dir.
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Worker threads; sets run.workers.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attribute one explicand and print the robustness certificate.
    Attribute {
        /// `key=value` overrides.
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Tabulate operator norms beside their closed forms.
    Norms {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run one of the synthetic experiments and write its CSV.
    #[command(subcommand_required = true)]
    Experiment {
        #[command(subcommand)]
        name: Experiment,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Attribution change under random input perturbations.
    InputPerturb {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Attribution change between two models that agree on the data.
    ModelPerturb {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Attribution change for networks trained with increasing weight decay.
    WeightDecay {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Cascading-randomization sanity check.
    SanityCheck {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Empirical intercept and slope against the removal sample size.
    Sampling {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn command_with_key_help() -> clap::Command {
    let mut cmd = Cli::command()
        .mut_subcommand("attribute", |c| c.after_help(help_table(&attribute_keys())))
        .mut_subcommand("norms", |c| c.after_help(help_table(&norms_keys())));
    cmd = cmd.mut_subcommand("experiment", |mut e| {
        for name in EXPERIMENTS {
            e = e.mut_subcommand(name, |c| c.after_help(help_table(&experiment_keys(name))));
        }
        e
    });
    cmd
}

fn resolve(cli: &Cli, keys: &[Key], overrides: &[String]) -> Result<Config, ConfigError> {
    let mut cfg = Config::new(keys);
    if let Some(path) = &cli.config {
        cfg.load_file(keys, path)?;
    }
    cfg.apply_overrides(keys, overrides)?;
    let flags = [
        ("--seed", "run.seed", cli.seed.map(|v| v.to_string())),
        ("--workers", "run.workers", cli.workers.map(|v| v.to_string())),
        ("--output", "output.dir", cli.output.as_ref().map(|p| p.display().to_string())),
    ];
    for (flag, key, value) in flags {
        if let Some(v) = value {
            if !keys.iter().any(|k| k.name == key) {
                return Err(ConfigError(format!("{flag} is not used by this command")));
            }
            cfg.set(keys, key, &v)?;
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, ConfigError> {
    match &cli.command {
        Command::Attribute { overrides } => {
            let keys = attribute_keys();
            commands::run_attribute(&resolve(cli, &keys, overrides)?)
        }
        Command::Norms { overrides } => {
            let keys = norms_keys();
            commands::run_norms(&resolve(cli, &keys, overrides)?)
        }
        Command::Experiment { name } => {
            let (name, overrides) = match name {
                Experiment::InputPerturb { overrides } => ("input-perturb", overrides),
                Experiment::ModelPerturb { overrides } => ("model-perturb", overrides),
                Experiment::WeightDecay { overrides } => ("weight-decay", overrides),
                Experiment::SanityCheck { overrides } => ("sanity-check", overrides),
                Experiment::Sampling { overrides } => ("sampling", overrides),
            };
            let keys = experiment_keys(name);
            commands::run_experiment(name, &resolve(cli, &keys, overrides)?)
        }
    }
}

fn main() -> ExitCode {
    let matches = match command_with_key_help().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
