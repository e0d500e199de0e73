//! Thin-film epitaxy with slope selection: the height field coarsens into
//! facets and the interface roughness `‖φ − φ̄‖` grows while the energy decays.
//!
//! ```bash
//! cargo run --release --example mbe_epitaxy [T]
//! ```

use gradflow::diagnostics::record;
use gradflow::RunSpec;

fn main() -> gradflow::Result<()> {
    let t_end: f64 = std::env::args().nth(1).map_or(2.0, |s| s.parse().expect("T"));
    let spec = RunSpec::from_preset("mbe-coarsen-small")?;
    let mut st = spec.stepper()?;
    let area = spec.grid.area();
    println!("{:>6} {:>14} {:>14} {:>10} {:>12}", "t", "F_eq", "F", "roughness", "mean");
    loop {
        let phi = &st.state().phi;
        let mean = phi.integral() / area;
        let rough = phi.map(|v| v - mean).norm_h() / area.sqrt();
        let r = record(st.system(), st.state(), st.time())?;
        println!("{:>6.2} {:>14.8} {:>14.8} {:>10.5} {:>12.3e}", r.t, r.f_eq, r.f_orig, rough, mean);
        if st.time() >= t_end - 1e-9 {
            break;
        }
        st.advance_to((st.time() + 0.25).min(t_end))?;
    }
    Ok(())
}
