//! Time-step refinement for Cahn-Hilliard against a fine Gauss `s = 3`
//! reference. The reference is cached next to the target directory so a
//! second run skips it.
//!
//! ```bash
//! cargo run --release --example convergence_study [scheme]
//! ```

use gradflow::parse_runspec;
use gradflow::runner::convergence_study;

fn main() -> gradflow::Result<()> {
    let scheme = std::env::args().nth(1).unwrap_or_else(|| "gauss2".into());
    let scheme_lines = match scheme.strip_prefix("gauss") {
        Some(s) => format!("scheme = gauss\nstages = {s}\n"),
        None => match scheme.strip_prefix("bdf") {
            Some(k) => format!("scheme = bdf\norder = {k}\n"),
            None => format!("scheme = {scheme}\n"),
        },
    };
    let spec = parse_runspec(&format!(
        "model = cahn-hilliard\nepsilon = 0.01\nlambda = 1e-3\nLx = 1\nNx = 32\nic = sine\n\
         {scheme_lines}dt = 0.01\nT = 0.2\n"
    ))?;
    let cache = std::env::temp_dir().join("gradflow-references");
    let report = convergence_study(&spec, &[0.02, 0.01, 0.005, 0.0025], 1e-4, &cache)?;
    print!("{}", report.to_csv());
    println!(
        "# reference {} ({})",
        report.reference.display(),
        if report.reference_cached { "cached" } else { "computed" }
    );
    Ok(())
}
