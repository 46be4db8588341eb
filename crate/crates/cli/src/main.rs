use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flexlink_cli::commands::{self, CliError, SweepAxis};
use flexlink_cli::config::{ControlMode, ProjectConfig, Scenario};

/// Modal analysis, observer synthesis and closed-loop simulation for a
/// single-link flexible manipulator.
#[derive(Parser)]
#[command(name = "flexlink", version, about)]
struct Cli {
    /// Configuration file; omitted means the bundled reference defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Regulation,
    Tracking,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "full_state")]
    FullState,
    #[value(name = "observer_fed")]
    ObserverFed,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the computed mode table (and optionally the state-space blocks).
    Modes {
        /// Also dump the A, B, C matrices of the simulation plant.
        #[arg(long)]
        state_space: bool,
    },
    /// Synthesize the functional observer and emit the verification report.
    Synth {
        /// Also write the report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the closed loop and emit the trace and summary.
    Simulate {
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Re-check a user-supplied observer matrix set against the existence
    /// conditions.
    Verify {
        /// TOML file with a `[matrices]` table holding n, l, h, g, d, t.
        #[arg(long)]
        matrices: PathBuf,
        /// Relative residual tolerance for the pass/fail verdicts.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Run a grid of simulations over one or more parameters.
    Sweep {
        /// Parameter name; repeat the flag for a multi-axis grid.
        #[arg(long = "param", required = true)]
        params: Vec<String>,
        /// Comma-separated values, one list per --param.
        #[arg(long = "values", required = true)]
        values: Vec<String>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ProjectConfig, CliError> {
    match path {
        Some(path) => Ok(ProjectConfig::load(path)?),
        None => Ok(ProjectConfig::default()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Modes { state_space } => commands::run_modes(&config, state_space),
        Command::Synth { report } => commands::run_synth(&config, report.as_deref()),
        Command::Simulate { scenario, mode } => {
            let scenario = scenario.map(|s| match s {
                ScenarioArg::Regulation => Scenario::Regulation,
                ScenarioArg::Tracking => Scenario::Tracking,
            });
            let mode = mode.map(|m| match m {
                ModeArg::FullState => ControlMode::FullState,
                ModeArg::ObserverFed => ControlMode::ObserverFed,
            });
            commands::run_simulate(&config, scenario, mode)
        }
        Command::Verify { matrices, tol } => commands::run_verify(&config, &matrices, tol),
        Command::Sweep { params, values } => {
            if params.len() != values.len() {
                return Err(CliError::Config(format!(
                    "sweep: {} --param flags but {} --values lists",
                    params.len(),
                    values.len()
                )));
            }
            let mut axes = Vec::with_capacity(params.len());
            for (param, list) in params.into_iter().zip(values) {
                let parsed: Result<Vec<f64>, _> =
                    list.split(',').map(|v| v.trim().parse::<f64>()).collect();
                let values = parsed.map_err(|e| {
                    CliError::Config(format!("sweep: bad value list for `{param}`: {e}"))
                })?;
                axes.push(SweepAxis { param, values });
            }
            commands::run_sweep(&config, &axes)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
