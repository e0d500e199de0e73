//! Phase field crystal growth from a centred crystallite, driven through the
//! run-spec layer: writes `trace.csv`, `phi_t*.field` snapshots and
//! `manifest.txt` under `$GRADFLOW_OUTPUT_ROOT` (default: the working
//! directory).
//!
//! ```bash
//! cargo run --release --example pfc_crystal [T]
//! ```

use gradflow::runner::{output_root, RunStatus};
use gradflow::{run, RunSpec};

fn main() -> gradflow::Result<()> {
    let t_end: f64 = std::env::args().nth(1).map_or(10.0, |s| s.parse().expect("T"));
    let mut spec = RunSpec::from_preset("pfc-crystal-small")?;
    spec.t_end = t_end;
    spec.snapshot_times.retain(|&t| t <= t_end);
    spec.record_every = 1;
    let dir = spec.resolve_output_dir(&output_root());
    let out = run(&spec, &dir)?;
    if let RunStatus::SolverFailure(why) = &out.status {
        eprintln!("stopped early: {why}");
    }
    let trace = std::fs::read_to_string(&out.trace).expect("trace");
    for line in trace.lines().step_by((out.steps / 10).max(1)) {
        println!("{line}");
    }
    println!("{} steps in {:.1}s, output in {}", out.steps, out.wall_seconds, dir.display());
    for s in &out.snapshots {
        println!("  {}", s.display());
    }
    Ok(())
}
