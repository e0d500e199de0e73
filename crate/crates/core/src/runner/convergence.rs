//! Time-step refinement against a cached fine-step reference.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::diagnostics::{fit_order, l2_error};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::integrators::{Scheme, StepperConfig};
use crate::io::{read_snapshot, write_snapshot};

use super::RunSpec;

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub dt: f64,
    /// `L²` error at `T`, or why the run failed.
    pub error: std::result::Result<f64, String>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted order over the successful rows; `None` with fewer than two.
    pub slope: Option<f64>,
    pub reference: PathBuf,
    /// Whether the reference came from the cache.
    pub reference_cached: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,dt,l2_error,status\n");
        for r in &self.rows {
            match &r.error {
                Ok(e) => {
                    let _ = writeln!(out, "{},{:e},{:e},ok", r.scheme, r.dt, e);
                }
                Err(why) => {
                    let _ = writeln!(out, "{},{:e},,\"failed: {}\"", r.scheme, r.dt, why.replace('"', "'"));
                }
            }
        }
        if let (Some(s), Some(r)) = (self.slope, self.rows.first()) {
            let _ = writeln!(out, "# slope {} = {s:.4}", r.scheme);
        }
        out
    }
}

/// Runs `base` to `T` at each step in `dts` and compares with Gauss `s = 3`
/// at `ref_dt`. The reference is stored in `cache_dir` under a hash of
/// everything that determines it and reused when present.
pub fn convergence_study(base: &RunSpec, dts: &[f64], ref_dt: f64, cache_dir: &Path) -> Result<ConvergenceReport> {
    let invalid = |key: &str, message: String| Error::Validation {
        key: key.into(),
        message,
    };
    if dts.len() < 2 {
        return Err(invalid("dts", "need at least two time steps to fit an order".into()));
    }
    if !(ref_dt.is_finite() && ref_dt > 0.0) {
        return Err(invalid("ref_dt", "must be positive".into()));
    }
    for &dt in dts {
        if !(dt > ref_dt) {
            return Err(invalid("dts", format!("{dt} is not larger than ref_dt = {ref_dt}")));
        }
    }
    for &dt in dts.iter().chain([ref_dt].iter()) {
        let n = base.t_end / dt;
        if (n - n.round()).abs() > 1e-9 * n {
            return Err(invalid("dts", format!("T = {} is not a multiple of {dt}", base.t_end)));
        }
    }

    let mut reference_spec = base.clone();
    reference_spec.stepper = StepperConfig {
        scheme: Scheme::Gauss(3),
        dt: ref_dt,
        ..base.stepper
    };
    let key = reference_key(&reference_spec);
    let path = cache_dir.join(format!("reference-{key}.field"));
    let (reference, cached) = match read_snapshot(&path) {
        Ok((phi, t)) if phi.grid() == &base.grid && t == base.t_end => (phi, true),
        _ => {
            let phi = final_field(&reference_spec)?;
            fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;
            write_snapshot(&path, &phi, base.t_end)?;
            (phi, false)
        }
    };

    let mut rows = Vec::new();
    for &dt in dts {
        let mut spec = base.clone();
        spec.stepper.dt = dt;
        let error = match final_field(&spec) {
            Ok(phi) => Ok(l2_error(&phi, &reference)?),
            Err(e) if e.is_solver_failure() => Err(e.to_string()),
            Err(e) => return Err(e),
        };
        rows.push(ConvergenceRow {
            scheme: base.stepper.scheme,
            dt,
            error,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.error.as_ref().ok().map(|e| (r.dt, *e)))
        .unzip();
    let slope = if xs.len() >= 2 { fit_order(&xs, &ys).ok() } else { None };
    Ok(ConvergenceReport {
        rows,
        slope,
        reference: path,
        reference_cached: cached,
    })
}

/// `φ` at `T`.
fn final_field(spec: &RunSpec) -> Result<Field> {
    let mut st = spec.stepper()?;
    for _ in 0..spec.steps() {
        st.step()?;
    }
    Ok(st.state().phi.clone())
}

/// Hex digest of the resolved spec minus the output settings.
fn reference_key(spec: &RunSpec) -> String {
    let text: String = spec
        .to_text()
        .lines()
        .filter(|l| {
            !l.starts_with('#')
                && !["output_dir", "record_every", "snapshot_times", "volume"]
                    .iter()
                    .any(|k| l.starts_with(&format!("{k} =")))
        })
        .map(|l| l.split('#').next().unwrap_or("").trim_end().to_string() + "\n")
        .collect();
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::parse_runspec;

    fn base() -> RunSpec {
        parse_runspec(
            "model = allen-cahn\nepsilon = 0.1\nLx = 1\nNx = 8\nic = sine\nscheme = gauss\nstages = 1\ndt = 0.1\nT = 0.2\n",
        )
        .unwrap()
    }

    #[test]
    fn needs_two_steps() {
        let dir = tempfile::tempdir().unwrap();
        assert!(convergence_study(&base(), &[0.1], 0.01, dir.path()).is_err());
        assert!(convergence_study(&base(), &[0.1, 0.005], 0.01, dir.path()).is_err());
        assert!(convergence_study(&base(), &[0.1, 0.03], 0.01, dir.path()).is_err());
    }

    #[test]
    fn midpoint_order_and_cache() {
        let dir = tempfile::tempdir().unwrap();
        let r = convergence_study(&base(), &[0.04, 0.02, 0.01], 0.001, dir.path()).unwrap();
        assert!(!r.reference_cached);
        let slope = r.slope.unwrap();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
        let again = convergence_study(&base(), &[0.04, 0.02], 0.001, dir.path()).unwrap();
        assert!(again.reference_cached);
        assert_eq!(again.reference, r.reference);
        let csv = r.to_csv();
        assert!(csv.starts_with("scheme,dt,l2_error,status\ngauss1,4e-2,"));
        assert!(csv.contains("# slope gauss1 = "));
        let mut other = base();
        other.params.epsilon = 0.2;
        let moved = convergence_study(&other, &[0.04, 0.02], 0.001, dir.path()).unwrap();
        assert_ne!(moved.reference, r.reference);
    }
}
