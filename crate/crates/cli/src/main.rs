//! tauspace: scenario runner for extended phase-space mechanics where
//! proper time and mass are conjugate dynamical variables.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tauspace_cli::config::{parse_config, ConfigError, ScenarioConfig, ScenarioKind};
use tauspace_cli::runner::{run, sweep, write_sweep, CliError};

#[derive(Parser)]
#[command(
    name = "tauspace",
    version,
    about = "Extended-mechanics scenarios: dynamics with (tau, m) as a conjugate pair, \
             relativistic kinematics, loop phases, and uncertainty products",
    after_help = "Exit codes: 0 success, 2 config error, 3 domain/runtime error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config file (line-oriented sections; see README)
    #[arg(long)]
    config: PathBuf,
    /// Directory for output artifacts (report + CSV)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's random seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the extended equations of motion for one particle
    Simulate(CommonArgs),
    /// Two-particle barycentric kinematics and invariant mass
    Barycentric(CommonArgs),
    /// Quantum-phase scenarios
    Phase {
        #[command(subcommand)]
        which: PhaseCommand,
    },
    /// Mass-proper-time uncertainty products
    Uncertainty {
        #[command(subcommand)]
        which: UncertaintyCommand,
    },
    /// Wave-packet oracle runs
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Run a scenario across a range of one numeric parameter
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to sweep (see README for the per-kind list)
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of evenly spaced points (inclusive of both ends)
        #[arg(long)]
        points: usize,
    },
}

#[derive(Subcommand)]
enum PhaseCommand {
    /// Accumulated phase around a closed loop of boosts and translations
    Loop(CommonArgs),
    /// Proper-time hypotheses for a wave trapped in a cavity
    Cavity(CommonArgs),
    /// Two-branch interferometer with optional decay weighting
    Interfere(CommonArgs),
}

#[derive(Subcommand)]
enum UncertaintyCommand {
    /// Gravitational scattering estimate (analytic)
    Grav(CommonArgs),
    /// Magnetic spectrometer estimate (analytic, plus optional Monte Carlo)
    Spectrometer {
        #[command(flatten)]
        common: CommonArgs,
        /// Run the Monte Carlo estimator with this many samples
        #[arg(long = "monte-carlo")]
        monte_carlo: Option<usize>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Standard verification loop: cocycle phase vs wave-packet phase
    Loop(CommonArgs),
}

fn load(common: &CommonArgs, expected_kind: &str) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        CliError::Config(ConfigError::Invariant {
            field: "config".into(),
            msg: format!("cannot read {}: {e}", common.config.display()),
        })
    })?;
    let mut config = parse_config(&text)?;
    if config.kind.name() != expected_kind {
        return Err(CliError::Config(ConfigError::Invariant {
            field: "scenario.kind".into(),
            msg: format!(
                "config is '{}' but the subcommand expects '{expected_kind}'",
                config.kind.name()
            ),
        }));
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn execute(common: &CommonArgs, kind: &str) -> Result<(), CliError> {
    let config = load(common, kind)?;
    let artifacts = run(&config, common.out.as_deref())?;
    print!("{}", artifacts.report.render());
    for path in &artifacts.written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(c) => execute(c, "simulate"),
        Command::Barycentric(c) => execute(c, "barycentric"),
        Command::Phase { which } => match which {
            PhaseCommand::Loop(c) => execute(c, "phase-loop"),
            PhaseCommand::Cavity(c) => execute(c, "phase-cavity"),
            PhaseCommand::Interfere(c) => execute(c, "phase-interfere"),
        },
        Command::Uncertainty { which } => match which {
            UncertaintyCommand::Grav(c) => execute(c, "uncertainty-grav"),
            UncertaintyCommand::Spectrometer { common, monte_carlo } => {
                let mut config = load(common, "uncertainty-spectrometer")?;
                if let Some(n) = monte_carlo {
                    if let ScenarioKind::UncertaintySpectrometer(sp) = &mut config.kind {
                        sp.monte_carlo = Some(*n);
                    }
                }
                let artifacts = run(&config, common.out.as_deref())?;
                print!("{}", artifacts.report.render());
                for path in &artifacts.written {
                    eprintln!("wrote {}", path.display());
                }
                Ok(())
            }
        },
        Command::Oracle { which } => match which {
            OracleCommand::Loop(c) => execute(c, "oracle-loop"),
        },
        Command::Sweep {
            common,
            param,
            from,
            to,
            points,
        } => {
            let text = std::fs::read_to_string(&common.config).map_err(|e| {
                CliError::Config(ConfigError::Invariant {
                    field: "config".into(),
                    msg: format!("cannot read {}: {e}", common.config.display()),
                })
            })?;
            let mut config = parse_config(&text)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            let table = sweep(&config, param, *from, *to, *points)?;
            let written = write_sweep(&config, &table, common.out.as_deref())?;
            println!(
                "swept {} over [{from}, {to}] at {points} points ({} columns)",
                param,
                table.columns.len()
            );
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // machine-readable error report in the same section format as
            // the run reports
            let kind = match err {
                CliError::Config(_) => "config",
                CliError::Engine(_) => "runtime",
                CliError::Io(_) => "io",
            };
            eprintln!("[error]");
            eprintln!("kind = {kind}");
            eprintln!("message = {err}");
            eprintln!("exit_code = {}", err.exit_code());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
