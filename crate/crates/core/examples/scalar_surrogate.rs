//! Every scheme on `ψ' = −ψ`: the EQ system with no bulk term reduces to the
//! scalar test equation, so the error at `t = 1` shows the order directly.
//!
//! ```bash
//! cargo run --release --example scalar_surrogate
//! ```

use gradflow::diagnostics::fit_order;
use gradflow::integrators::{Scheme, Stepper, StepperConfig};
use gradflow::models::build_linear_relaxation;
use gradflow::{Field, Grid2D, ModelParams};

fn error_at_one(scheme: Scheme, dt: f64) -> gradflow::Result<f64> {
    let g = Grid2D::square(1.0, 4)?;
    let sys = build_linear_relaxation(g, &ModelParams::default())?;
    let psi = sys.initial_state(Field::constant(g, 1.0))?;
    let mut st = Stepper::new(sys, psi, StepperConfig::new(scheme, dt))?;
    st.advance_to(1.0)?;
    Ok((st.state().phi.values()[0] - (-1.0f64).exp()).abs())
}

fn main() -> gradflow::Result<()> {
    let dts = [0.1, 0.05, 0.025];
    println!("{:<7} {:>10} {:>10} {:>10} {:>6}", "scheme", "dt=0.1", "0.05", "0.025", "order");
    for name in ["lcn", "icn", "lbdf2", "ibdf2", "bdf3", "bdf4", "bdf5", "bdf6", "gauss1", "gauss2", "gauss3"] {
        let scheme: Scheme = name.parse()?;
        let errs = dts.iter().map(|&dt| error_at_one(scheme, dt)).collect::<gradflow::Result<Vec<_>>>()?;
        println!(
            "{name:<7} {:>10.3e} {:>10.3e} {:>10.3e} {:>6.2}",
            errs[0],
            errs[1],
            errs[2],
            fit_order(&dts, &errs)?
        );
    }
    Ok(())
}
