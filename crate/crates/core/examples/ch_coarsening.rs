//! Cahn-Hilliard spinodal decomposition from small noise. Prints the
//! quadratized energy and mass for a few schemes at a large step; the energy
//! never increases and the mass stays put.
//!
//! ```bash
//! cargo run --release --example ch_coarsening [dt]
//! ```

use gradflow::diagnostics::record;
use gradflow::integrators::{Scheme, Stepper, StepperConfig};
use gradflow::RunSpec;

fn main() -> gradflow::Result<()> {
    let dt: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("dt"));
    let base = RunSpec::from_preset("ch-coarsen-small")?;
    for name in ["lcn", "icn", "ibdf2", "gauss2"] {
        let scheme: Scheme = name.parse()?;
        let (sys, psi) = base.initial_state()?;
        let mut st = Stepper::new(sys, psi, StepperConfig::new(scheme, dt))?;
        println!("{name}, dt = {dt}");
        println!("  {:>5} {:>14} {:>14} {:>12}", "t", "F_eq", "F", "mass");
        while st.time() < base.t_end - 1e-12 {
            st.step()?;
            if st.steps() % ((0.5 / dt).round().max(1.0) as usize) == 0 {
                let r = record(st.system(), st.state(), st.time())?;
                println!("  {:>5.2} {:>14.8} {:>14.8} {:>12.3e}", r.t, r.f_eq, r.f_orig, r.mass);
            }
        }
    }
    Ok(())
}
