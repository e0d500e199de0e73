use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradflow::runner::{self, convergence_study, output_root, parse_runspec, RunSpec, RunStatus, PRESETS};
use gradflow::Error;

/// Energy-stable gradient-flow simulations from `key = value` run files.
///
/// Relative output directories resolve against $GRADFLOW_OUTPUT_ROOT (default:
/// the working directory). Exit status: 0 success, 2 spec error, 3 solver
/// failure, 1 anything else.
#[derive(Parser)]
#[command(name = "gradflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a spec to T, writing trace, snapshots and manifest.
    Run { spec: PathBuf },
    /// Time-step refinement study against a cached Gauss s = 3 reference.
    Converge {
        spec: PathBuf,
        /// Comma-separated time steps.
        #[arg(long, value_delimiter = ',', required = true)]
        dts: Vec<f64>,
        #[arg(long)]
        ref_dt: f64,
    },
    /// List the built-in presets.
    Presets,
    /// Validate a spec without running it.
    Check { spec: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_solver_failure() => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn load(path: &Path) -> Result<RunSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Validation {
        key: "spec".into(),
        message: format!("cannot read {}: {source}", path.display()),
    })?;
    parse_runspec(&text)
}

fn dispatch(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Presets => {
            for p in PRESETS {
                println!("{:<18} {}", p.name, p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { spec } => {
            let s = load(&spec)?;
            print!("{}", s.to_text());
            println!("# ok: {} steps", s.steps());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { spec } => {
            let s = load(&spec)?;
            let dir = s.resolve_output_dir(&output_root());
            let out = runner::run(&s, &dir)?;
            println!(
                "{} steps to t = {} in {:.1}s, output in {}",
                out.steps,
                out.final_time,
                out.wall_seconds,
                dir.display()
            );
            match out.status {
                RunStatus::Completed => Ok(ExitCode::SUCCESS),
                RunStatus::SolverFailure(why) => {
                    eprintln!("solver failure at {why}");
                    Ok(ExitCode::from(3))
                }
            }
        }
        Command::Converge { spec, dts, ref_dt } => {
            let s = load(&spec)?;
            let root = output_root();
            let dir = s.resolve_output_dir(&root);
            let report = convergence_study(&s, &dts, ref_dt, &root.join("references"))?;
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let csv = report.to_csv();
            let path = dir.join("convergence.csv");
            std::fs::write(&path, &csv).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            print!("{csv}");
            if report.slope.is_some() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("fewer than two successful runs; no order fitted");
                Ok(ExitCode::from(3))
            }
        }
    }
}
