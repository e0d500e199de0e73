//! A run described in the `key = value` spec format: presets expand first and
//! explicit keys override them. `to_text` prints the fully resolved spec,
//! marking values the source experiment did not state.
//!
//! ```bash
//! cargo run --release --example spec_runner
//! ```

use gradflow::{parse_runspec, run};

const SPEC: &str = "\
preset = ac-disk-small
scheme = gauss
stages = 2
dt = 2       # the Gauss stages stay solvable at large steps
T = 20
snapshot_times = 0, 20
";

fn main() -> gradflow::Result<()> {
    let spec = parse_runspec(SPEC)?;
    print!("{}", spec.to_text());
    let dir = std::env::temp_dir().join("gradflow-spec-runner");
    let out = run(&spec, &dir)?;
    println!("{:?} after {} steps; files:", out.status, out.steps);
    let mut names: Vec<_> = std::fs::read_dir(&dir).expect("dir").flatten().map(|e| e.file_name()).collect();
    names.sort();
    for n in names {
        println!("  {}", n.to_string_lossy());
    }
    Ok(())
}
