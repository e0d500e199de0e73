//! Gauss collocation tableaux: nodes, weights, and the algebraic-stability
//! matrix `M = BA + AᵀB − bbᵀ`, which vanishes for Gauss methods.
//!
//! ```bash
//! cargo run --example gauss_tableau
//! ```

use gradflow::integrators::gauss_tableau;

fn main() -> gradflow::Result<()> {
    for s in 1..=3 {
        let t = gauss_tableau(s)?;
        println!("s = {s}");
        println!("  c = {:?}", t.c);
        println!("  b = {:?}", t.b);
        for row in &t.a {
            println!("  a = {row:?}");
        }
        println!("  max |Σ_j a_ij − c_i| = {:.1e}", t.row_sum_defect());
        println!("  max |M_ij|          = {:.1e}", t.algebraic_stability_defect());
    }
    Ok(())
}
