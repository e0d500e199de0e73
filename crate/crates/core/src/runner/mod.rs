//! Batch front end: run descriptions, presets, runs and convergence studies.

mod convergence;
mod presets;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use convergence::{convergence_study, ConvergenceReport, ConvergenceRow};
pub use presets::{preset, Preset, PRESETS};
pub use spec::{parse_runspec, RunSpec, KEYS};

use crate::diagnostics::{disk_volume, record};
use crate::eq::QuadState;
use crate::error::{Error, Result};
use crate::integrators::Stepper;
use crate::io::{write_snapshot, TraceWriter};

/// Environment variable that overrides the directory relative output paths
/// resolve against.
pub const OUTPUT_ROOT_ENV: &str = "GRADFLOW_OUTPUT_ROOT";

/// `$GRADFLOW_OUTPUT_ROOT`, or the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

impl RunSpec {
    /// Where this run writes, given the output root.
    pub fn resolve_output_dir(&self, root: &Path) -> PathBuf {
        if self.output_dir.is_absolute() {
            self.output_dir.clone()
        } else {
            root.join(&self.output_dir)
        }
    }

    /// Builds the model and its initial state.
    pub fn initial_state(&self) -> Result<(crate::eq::QuadSystem, QuadState)> {
        let sys = self.model.build(self.grid, &self.params)?;
        let phi = self.initial.sample(self.grid)?;
        let psi = sys.initial_state(phi)?;
        Ok((sys, psi))
    }

    pub fn stepper(&self) -> Result<Stepper> {
        let (sys, psi) = self.initial_state()?;
        Stepper::new(sys, psi, self.stepper)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The solver gave up; the message says why.
    SolverFailure(String),
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub steps: usize,
    pub final_time: f64,
    pub wall_seconds: f64,
    pub dir: PathBuf,
    pub trace: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn succeeded(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

/// Integrates `spec` to `T`, writing `trace.csv`, snapshots and
/// `manifest.txt` into `dir`.
///
/// Problems with the spec or the output directory are returned as errors
/// before anything is written. A solver failure is not an error: the run
/// stops, the trace so far is kept and the manifest records the reason.
pub fn run(spec: &RunSpec, dir: &Path) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut stepper = spec.stepper()?;
    prepare_dir(dir)?;

    let extras: Vec<String> = if spec.volume { vec!["volume".into()] } else { Vec::new() };
    let trace_path = dir.join("trace.csv");
    let mut trace = TraceWriter::create(&trace_path, &extras)?;
    let mut snapshots = Vec::new();
    let mut pending = spec.snapshot_times.iter().copied().peekable();
    let total = spec.steps();
    let dt = spec.stepper.dt;
    let mut status = RunStatus::Completed;

    loop {
        let n = stepper.steps();
        let t = stepper.time();
        if n % spec.record_every == 0 || n == total {
            let mut row = record(stepper.system(), stepper.state(), t)?;
            if spec.volume {
                row = row.with_extra("volume", disk_volume(&stepper.state().phi));
            }
            trace.write(&row)?;
        }
        while let Some(&ts) = pending.peek() {
            if ts > t + 1e-9 * dt {
                break;
            }
            let path = dir.join(format!("phi_t{ts}.field"));
            write_snapshot(&path, &stepper.state().phi, t)?;
            snapshots.push(path);
            pending.next();
        }
        if n >= total {
            break;
        }
        match stepper.step() {
            Ok(()) => {}
            Err(e) if e.is_solver_failure() => {
                status = RunStatus::SolverFailure(format!("t = {}: {e}", stepper.time()));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    trace.flush()?;

    let outcome = RunOutcome {
        status,
        steps: stepper.steps(),
        final_time: stepper.time(),
        wall_seconds: start.elapsed().as_secs_f64(),
        dir: dir.to_path_buf(),
        trace: trace_path,
        snapshots,
    };
    let manifest = dir.join("manifest.txt");
    fs::write(&manifest, manifest_text(spec, &outcome)).map_err(|e| Error::io(&manifest, e))?;
    Ok(outcome)
}

/// Creates `dir` if needed; fails without creating anything when the path
/// names a file or cannot be created.
fn prepare_dir(dir: &Path) -> Result<()> {
    let invalid = |message: String| Error::Validation {
        key: "output_dir".into(),
        message,
    };
    if dir.exists() && !dir.is_dir() {
        return Err(invalid(format!("{} exists and is not a directory", dir.display())));
    }
    fs::create_dir_all(dir).map_err(|e| invalid(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".gradflow-write-test");
    fs::write(&probe, b"").map_err(|e| invalid(format!("{} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

/// The resolved spec followed by run results as comments, so a manifest can
/// be fed back to `run`.
fn manifest_text(spec: &RunSpec, o: &RunOutcome) -> String {
    let mut out = String::from("# gradflow run manifest\n");
    out.push_str(&format!(
        "# gradflow {} (trace csv, gradflow-field v1)\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&spec.to_text());
    let status = match &o.status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::SolverFailure(why) => format!("solver failure: {why}"),
    };
    out.push_str(&format!("# status: {status}\n"));
    out.push_str(&format!("# steps: {}\n# final_time: {}\n", o.steps, o.final_time));
    out.push_str(&format!("# wall_time_s: {:.3}\n", o.wall_seconds));
    out
}
