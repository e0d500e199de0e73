//! Observables recorded along a run, and the fits used to check them.

use crate::eq::{QuadState, QuadSystem};
use crate::error::{Error, Result};
use crate::grid::Field;

/// One line of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Quadratized energy `½‖Ψ‖²_B − A`.
    pub f_eq: f64,
    /// Energy of the original model evaluated at `φ`.
    pub f_orig: f64,
    /// `∫ φ`.
    pub mass: f64,
    /// `‖q − q_init(φ)‖∞`.
    pub q_drift: f64,
    /// Named extra columns, in output order.
    pub extra: Vec<(String, f64)>,
}

impl TraceRow {
    pub fn with_extra(mut self, name: &str, value: f64) -> Self {
        self.extra.push((name.to_string(), value));
        self
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.f_eq, self.f_orig, self.mass, self.q_drift]
            .iter()
            .chain(self.extra.iter().map(|(_, v)| v))
            .all(|v| v.is_finite())
    }
}

/// Evaluates every standard observable at `psi`.
pub fn record(sys: &QuadSystem, psi: &QuadState, t: f64) -> Result<TraceRow> {
    psi.ensure_finite("recorded state")?;
    Ok(TraceRow {
        t,
        f_eq: sys.energy(psi)?,
        f_orig: sys.original_energy(&psi.phi)?,
        mass: psi.phi.integral(),
        q_drift: sys.q_drift(psi)?,
        extra: Vec::new(),
    })
}

/// `¼(‖Ψⁿ‖²_B + ‖2Ψⁿ − Ψⁿ⁻¹‖²_B) − A`, the quantity BDF2 dissipates.
pub fn bdf2_modified_energy(sys: &QuadSystem, psi_n: &QuadState, psi_nm1: &QuadState) -> Result<f64> {
    psi_n.check_grid(psi_nm1)?;
    let ext = QuadState::linear_combination(&[(2.0, psi_n), (-1.0, psi_nm1)]);
    Ok(0.25 * (sys.b_norm_sq(psi_n) + sys.b_norm_sq(&ext)) - sys.energy_shift())
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param("fit", "need at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::param("fit", "points must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("fit", "abscissae must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Observed order: slope of `log(error)` against `log(dt)`.
pub fn fit_order(dts: &[f64], errors: &[f64]) -> Result<f64> {
    if dts.iter().chain(errors).any(|&v| !(v > 0.0)) {
        return Err(Error::param("fit_order", "time steps and errors must be positive"));
    }
    let lx: Vec<f64> = dts.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

/// Discrete volume of the `φ ≈ 1` phase, `∫ (1 + φ)/2`.
pub fn disk_volume(phi: &Field) -> f64 {
    0.5 * (phi.integral() + phi.grid().area())
}

/// Discrete `L²` distance.
pub fn l2_error(phi: &Field, reference: &Field) -> Result<f64> {
    phi.check_grid(reference)?;
    let d = phi.zip_map(reference, |a, b| a - b);
    Ok(d.norm_h())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::models::{build_cahn_hilliard_gl, ModelParams};
    use std::f64::consts::PI;

    #[test]
    fn order_fits() {
        assert!((fit_order(&[0.1, 0.05], &[1e-2, 2.5e-3]).unwrap() - 2.0).abs() < 1e-12);
        let dts = [0.1, 0.05, 0.025, 0.0125];
        let errs: Vec<f64> = dts.iter().map(|d: &f64| 3.0 * d.powi(4)).collect();
        assert!((fit_order(&dts, &errs).unwrap() - 4.0).abs() < 1e-12);
        assert!(fit_order(&dts, &[1e-3; 4]).unwrap().abs() < 1e-12);
        assert!(fit_order(&[0.1], &[1.0]).is_err());
        assert!(fit_order(&[0.1, -0.1], &[1.0, 1.0]).is_err());
        assert!(fit_order(&[0.1, 0.05], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn volumes() {
        let g = Grid2D::square(256.0, 64).unwrap();
        assert_eq!(disk_volume(&Field::constant(g, -1.0)), 0.0);
        assert!((disk_volume(&Field::constant(g, 1.0)) - 65536.0).abs() < 1e-9);
    }

    #[test]
    fn l2_distances() {
        let g = Grid2D::square(1.0, 32).unwrap();
        let a = Field::from_fn(g, |x, y| x * y);
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v - 0.3);
        assert!((l2_error(&a, &b).unwrap() - 0.3).abs() < 1e-14);
        let c = Field::from_fn(g, |x, _| (2.0 * PI * x).sin());
        let z = Field::zeros(g);
        assert!((l2_error(&c, &z).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        let other = Field::zeros(Grid2D::square(1.0, 16).unwrap());
        assert!(l2_error(&a, &other).is_err());
    }

    #[test]
    fn record_at_pure_phase() {
        let g = Grid2D::square(1.0, 16).unwrap();
        let sys = build_cahn_hilliard_gl(g, &ModelParams::default()).unwrap();
        let psi = sys.initial_state(Field::constant(g, 1.0)).unwrap();
        let row = record(&sys, &psi, 0.0).unwrap();
        assert!(row.f_eq.abs() < 1e-12 && row.f_orig.abs() < 1e-12);
        assert_eq!(row.q_drift, 0.0);
        assert!((row.mass - psi.phi.inner_h(&Field::constant(g, 1.0)).unwrap()).abs() < 1e-15);
        let row = row.with_extra("v", 2.0);
        assert!(row.is_finite() && row.extra[0].0 == "v");
    }

    #[test]
    fn modified_energy_with_equal_levels_is_energy() {
        let g = Grid2D::square(1.0, 16).unwrap();
        let sys = build_cahn_hilliard_gl(g, &ModelParams::default()).unwrap();
        let psi = sys
            .initial_state(Field::from_fn(g, |x, y| (2.0 * PI * x).cos() * (2.0 * PI * y).sin()))
            .unwrap();
        let m = bdf2_modified_energy(&sys, &psi, &psi).unwrap();
        assert!((m - sys.energy(&psi).unwrap()).abs() < 1e-12);
    }
}
