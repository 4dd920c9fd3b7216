//! `adl` — evaluate queries against belief model files, apply observations,
//! and run the anonymised-messages demonstration experiments.
//!
//! Exit codes: 0 success, 1 query parse error, 2 model error, 3 resolution
//! error (unknown individual or symbol), 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adl::demo;
use adl::learn::{self, Change, Influence};
use adl::model::{BeliefModel, ModelError};
use adl::{EvalError, Formula, LearnError, ModelContext};

#[derive(Parser)]
#[command(name = "adl", version, about = "Aleatoric description logic toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the probability that a query is true about an individual.
    Eval {
        #[command(flatten)]
        target: Target,
        /// Query text, e.g. "happy & !tired" or "exists(conversed_with)".
        #[arg(short, long)]
        query: String,
    },
    /// Observe a sentence about an individual and write the updated model.
    Observe {
        #[command(flatten)]
        target: Target,
        /// Observation text.
        #[arg(short, long)]
        query: String,
        /// Where to write the post-observation model.
        #[arg(short, long)]
        out: PathBuf,
        /// Chance that the observation is true.
        #[arg(long, default_value_t = 1.0)]
        likelihood: f64,
        /// Strength of the update, 0 disables learning.
        #[arg(long, default_value_t = 1.0)]
        learning_rate: f64,
    },
    /// Run the anonymised-messages demonstration experiments.
    Demo {
        #[command(subcommand)]
        experiment: DemoCommand,
    },
}

#[derive(Args)]
struct Target {
    /// Belief model JSON file.
    #[arg(short, long)]
    model: PathBuf,
    /// Individual the query or observation is about.
    #[arg(short, long)]
    individual: String,
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Author prediction accuracy sweep; writes author,k,n,accuracy_pct.
    Predict {
        /// Message sets sampled per (author, message count) cell.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, env = "ADL_SEED", default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Tendency learning experiment; writes author,concept,mean_pct,std_pct,truth_pct.
    Learn {
        /// Number of independent learning trials.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = "ADL_SEED", default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(short, long)]
        out: PathBuf,
    },
}

enum CliError {
    Parse(adl::ParseError),
    Model(ModelError),
    Resolution(ModelError),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Model(_) => 2,
            CliError::Resolution(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Parse(e) => format!("query error {e}"),
            CliError::Model(e) => format!("model error: {e}"),
            CliError::Resolution(e) => format!("resolution error: {e}"),
            CliError::Io(e) => format!("i/o error: {e}"),
        }
    }
}

/// Unknown names are resolution failures; everything else about a model is
/// a model error.
fn classify(error: ModelError) -> CliError {
    match error {
        ModelError::UnknownIndividual(_)
        | ModelError::UnknownConcept { .. }
        | ModelError::UnknownRole { .. } => CliError::Resolution(error),
        other => CliError::Model(other),
    }
}

impl From<EvalError> for CliError {
    fn from(error: EvalError) -> Self {
        match error {
            EvalError::Model(m) => classify(m),
            EvalError::Context(m) => CliError::Model(ModelError::Schema(m)),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(error: LearnError) -> Self {
        match error {
            LearnError::Eval(e) => e.into(),
            LearnError::Model(m) => classify(m),
            LearnError::Ast(e) => CliError::Io(e.to_string()),
            e @ LearnError::InfluenceRange { .. } => CliError::Io(e.to_string()),
        }
    }
}

fn load_model(path: &Path) -> Result<BeliefModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Model(ModelError::Schema(format!("{}: {e}", path.display()))))?;
    BeliefModel::from_json(&text).map_err(CliError::Model)
}

fn parse_query(text: &str) -> Result<Formula, CliError> {
    adl::parse(text).map_err(CliError::Parse)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval { target, query } => {
            let model = load_model(&target.model)?;
            let formula = parse_query(&query)?;
            let ctx = ModelContext::new(&model, &target.individual)?;
            let probability = adl::evaluate(&ctx, &formula)?;
            println!("{probability:.6}");
            Ok(())
        }
        Command::Observe {
            target,
            query,
            out,
            likelihood,
            learning_rate,
        } => {
            let mut model = load_model(&target.model)?;
            let formula = parse_query(&query)?;
            let influence = Influence::new(likelihood, learning_rate)
                .map_err(|e| CliError::Io(e.to_string()))?;
            let report = learn::observe_with(&mut model, &target.individual, &formula, influence)?;
            write_file(&out, &model.to_json())?;
            if report.changes.is_empty() {
                println!("no learnable symbols changed");
            }
            for change in &report.changes {
                match change {
                    Change::Concept {
                        individual,
                        symbol,
                        old,
                        new,
                    } => println!("{individual}.{symbol}: {old:.6} -> {new:.6}"),
                    Change::Role {
                        individual,
                        symbol,
                        old,
                        new,
                    } => {
                        println!("{individual}.{symbol}:");
                        for (before, after) in old.entries().iter().zip(new.entries()) {
                            let target = before.target.as_deref().unwrap_or("null");
                            println!("  {target}: {:.6} -> {:.6}", before.weight, after.weight);
                        }
                    }
                }
            }
            Ok(())
        }
        Command::Demo { experiment } => match experiment {
            DemoCommand::Predict { n, seed, out } => {
                let model = demo::ground_truth_model();
                let report = demo::run_prediction_experiment(&model, n, 1..=10, seed)?;
                write_file(&out, &report.to_csv())?;
                println!(
                    "wrote {} cells ({} sets each, seed {seed}) to {}",
                    report.cells.len(),
                    report.sets_per_cell,
                    out.display()
                );
                Ok(())
            }
            DemoCommand::Learn { trials, seed, out } => {
                let config = demo::LearningConfig {
                    trials,
                    ..demo::LearningConfig::default()
                };
                let report = demo::run_learning_experiment(&config, seed)?;
                write_file(&out, &report.to_csv())?;
                println!(
                    "wrote {} tendencies ({} trials x {} observations, seed {seed}) to {}",
                    report.rows.len(),
                    report.trials,
                    report.observations_per_trial,
                    out.display()
                );
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("{}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}
