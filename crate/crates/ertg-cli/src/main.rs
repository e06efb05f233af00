//! Command-line interface to the expected reachability-time game solver.
//!
//! Exit codes are the machine contract:
//! - `validate`: 0 accepted, 2 rejected (or parse/I-O failure)
//! - `decide`: 0 at-most, 1 greater, 3 undecided
//! - `solve`, `bra`, `simulate`: 0 on success
//! - parse or I/O failures: 2

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use ertg::game::Sense;
use ertg::model::{Configuration, Ptga};
use ertg::pipeline::{self, PipelineError, PrepareOptions, SimulateOptions};
use ertg::rat;

#[derive(Parser)]
#[command(
    name = "ertg",
    about = "Expected reachability-time games on probabilistic timed game arenas",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model file (.ptga)
    model: PathBuf,
    /// Initial configuration, e.g. "l0 x=3/10 y=0.1"; defaults to the
    /// model's init clause or all-zero clocks at the first location
    #[arg(long)]
    init: Option<String>,
    /// Skip the structural non-Zenoness gate
    #[arg(long)]
    allow_zeno: bool,
    /// Safety cap on explored abstraction states
    #[arg(long, default_value_t = 1_000_000)]
    state_cap: usize,
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Which value to compute
    #[arg(long, default_value = "upper")]
    sense: String,
    /// Convergence tolerance of value iteration
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Also run the exact strategy-improvement solver
    #[arg(long)]
    exact: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model; exit 0 iff accepted
    Validate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Build the boundary region abstraction and dump it
    Bra {
        #[command(flatten)]
        model: ModelArgs,
        /// Write a DOT rendering of the graph to this path
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the JSON dump to this path instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve for the upper or lower expected reachability time
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Write the JSON report to this path instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide whether the value at the initial state is at most a bound
    Decide {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Threshold, exact rational (`p/q`, decimal, or integer);
        /// omit for "no bound"
        #[arg(long)]
        bound: Option<String>,
    },
    /// Monte Carlo estimation under the extracted optimal strategies
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of runs
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        /// Step horizon per run
        #[arg(long, default_value_t = 256)]
        horizon: usize,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Solver tolerance used for strategy extraction
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("ertg: {message}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &ModelArgs) -> Result<(Arc<Ptga>, Option<Configuration>), String> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| format!("{}: {e}", args.model.display()))?;
    let model = ertg::parser::parse_model(&text)
        .map_err(|e| format!("{}:{e}", args.model.display()))?;
    let model = Arc::new(model);
    let init = match &args.init {
        None => None,
        Some(text) => Some(
            pipeline::parse_init(&model, text).map_err(|e| format!("--init: {e}"))?,
        ),
    };
    Ok((model, init))
}

fn sense_of(text: &str) -> Result<Sense, String> {
    match text {
        "upper" => Ok(Sense::Upper),
        "lower" => Ok(Sense::Lower),
        other => Err(format!("--sense must be `upper` or `lower`, got `{other}`")),
    }
}

fn prepare_options(args: &ModelArgs) -> PrepareOptions {
    PrepareOptions {
        allow_zeno: args.allow_zeno,
        state_cap: args.state_cap,
    }
}

fn emit(output: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn describe(model: &Ptga, err: PipelineError) -> String {
    match err {
        PipelineError::Validation(report) => {
            let mut lines = vec![format!(
                "model rejected with {} error(s):",
                report.errors.len()
            )];
            for d in &report.errors {
                lines.push(format!("  [{}] {}: {}", d.code, d.context, d.message));
            }
            lines.join("\n")
        }
        PipelineError::Zeno(witness) => format!(
            "model is not structurally non-Zeno; witness cycle: {} (pass --allow-zeno to proceed)",
            pipeline::render_witness(model, &witness)
        ),
        other => other.to_string(),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Validate { model: args } => {
            let (model, init) = load(&args)?;
            let mut report = model.validate();
            if let Some(init) = &init {
                if !model
                    .invariant_zone(init.location)
                    .contains_valuation(&init.valuation)
                {
                    report.errors.push(ertg::model::Diagnostic {
                        code: "init-violates-invariant".into(),
                        context: "--init".into(),
                        message: "initial valuation does not satisfy the location invariant"
                            .into(),
                    });
                }
            }
            let json = serde_json::to_value(&report).expect("serializable");
            emit(&None, &json)?;
            Ok(if report.accepted() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Bra {
            model: args,
            dot,
            output,
        } => {
            let (model, init) = load(&args)?;
            let prepared = pipeline::prepare(
                Arc::clone(&model),
                init,
                Sense::Upper,
                prepare_options(&args),
            )
            .map_err(|e| describe(&model, e))?;
            if let Some(path) = dot {
                std::fs::write(&path, pipeline::bra_dot(&prepared.bra))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            emit(&output, &pipeline::bra_json(&prepared.bra))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            model: args,
            solve,
            output,
        } => {
            let (model, init) = load(&args)?;
            let sense = sense_of(&solve.sense)?;
            let prepared =
                pipeline::prepare(Arc::clone(&model), init, sense, prepare_options(&args))
                    .map_err(|e| describe(&model, e))?;
            let out = pipeline::solve_prepared(&prepared, solve.epsilon, solve.exact)
                .map_err(|e| describe(&model, e))?;
            emit(&output, &pipeline::solve_json(&prepared, &out, solve.epsilon))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decide {
            model: args,
            solve,
            bound,
        } => {
            let (model, init) = load(&args)?;
            let sense = sense_of(&solve.sense)?;
            let bound = match bound {
                None => None,
                Some(text) => Some(
                    rat::parse(&text).ok_or_else(|| format!("--bound: bad number `{text}`"))?,
                ),
            };
            let prepared =
                pipeline::prepare(Arc::clone(&model), init, sense, prepare_options(&args))
                    .map_err(|e| describe(&model, e))?;
            let verdict =
                pipeline::decide_prepared(&prepared, bound, solve.exact, solve.epsilon)
                    .map_err(|e| describe(&model, e))?;
            emit(&None, &pipeline::verdict_json(&verdict))?;
            Ok(match verdict {
                ertg::game::ThresholdVerdict::AtMost => ExitCode::SUCCESS,
                ertg::game::ThresholdVerdict::Greater => ExitCode::from(1),
                ertg::game::ThresholdVerdict::Undecided { .. } => ExitCode::from(3),
            })
        }
        Command::Simulate {
            model: args,
            runs,
            horizon,
            seed,
            epsilon,
        } => {
            let (model, init) = load(&args)?;
            let init = init.unwrap_or_else(|| model.init_configuration());
            let (outcome, _) = pipeline::simulate_prepared(
                &model,
                &init,
                SimulateOptions {
                    runs,
                    horizon,
                    seed,
                    epsilon,
                },
                prepare_options(&args),
            )
            .map_err(|e| describe(&model, e))?;
            emit(&None, &pipeline::sim_json(&outcome, 1.0f64 / (1u64 << 20) as f64))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
