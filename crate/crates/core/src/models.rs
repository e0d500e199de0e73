//! The four benchmark models and their initial conditions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::eq::{BulkTerm, Mobility, QuadSystem};
use crate::error::{Error, Result};
use crate::grid::{random_field, Field, Grid2D};
use crate::spectral::SpectralSymbol;

/// Physical and stabilization parameters. Not every model reads every field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Interface width; MBE uses `epsilon²` as the surface-diffusion weight.
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            epsilon: 1.0,
            lambda: 1.0,
            gamma0: 1.0,
            a: 1.0,
            b: 0.0,
            c: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("epsilon", self.epsilon),
            ("lambda", self.lambda),
            ("gamma0", self.gamma0),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.lambda <= 0.0 {
            return Err(Error::param("lambda", "must be > 0"));
        }
        if self.gamma0 < 0.0 {
            return Err(Error::param("gamma0", "must be >= 0"));
        }
        if self.epsilon < 0.0 {
            return Err(Error::param("epsilon", "must be >= 0"));
        }
        Ok(())
    }
}

/// Which model a system implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    CahnHilliard,
    AllenCahn,
    Pfc,
    Mbe,
    /// `φ_t = −λ γ0 φ`: linear relaxation with no bulk term.
    Linear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::CahnHilliard,
        ModelKind::AllenCahn,
        ModelKind::Pfc,
        ModelKind::Mbe,
        ModelKind::Linear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::CahnHilliard => "cahn-hilliard",
            ModelKind::AllenCahn => "allen-cahn",
            ModelKind::Pfc => "pfc",
            ModelKind::Mbe => "mbe",
            ModelKind::Linear => "linear",
        }
    }

    pub fn build(&self, grid: Grid2D, params: &ModelParams) -> Result<QuadSystem> {
        match self {
            ModelKind::CahnHilliard => build_cahn_hilliard_gl(grid, params),
            ModelKind::AllenCahn => build_allen_cahn(grid, params),
            ModelKind::Pfc => build_pfc(grid, params),
            ModelKind::Mbe => build_mbe(grid, params),
            ModelKind::Linear => build_linear_relaxation(grid, params),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "model",
                name: s.to_string(),
            })
    }
}

fn gl_system(grid: Grid2D, p: &ModelParams, mobility: Mobility) -> Result<QuadSystem> {
    p.validate()?;
    let e2 = p.epsilon * p.epsilon;
    let quad = SpectralSymbol::laplacian(grid).scale(-e2);
    let l = quad.shift(p.gamma0)?;
    QuadSystem::new(
        grid,
        l,
        mobility,
        BulkTerm::DoubleWell { a: 1.0, offset: 0.0 },
        p.gamma0,
        quad,
    )
}

/// Cahn-Hilliard with the Ginzburg-Landau double well:
/// `F = ε²/2 ‖∇φ‖² + ¼‖φ² − 1‖²`, `G = λΔ`.
pub fn build_cahn_hilliard_gl(grid: Grid2D, params: &ModelParams) -> Result<QuadSystem> {
    gl_system(grid, params, Mobility::Conserved { lambda: params.lambda })
}

/// Allen-Cahn with the same energy and `G = −λ`.
pub fn build_allen_cahn(grid: Grid2D, params: &ModelParams) -> Result<QuadSystem> {
    gl_system(grid, params, Mobility::Relaxation { lambda: params.lambda })
}

/// Phase field crystal:
/// `F = (¼φ⁴ − a/2 φ², 1) + ½(φ, (−bΔ + c(1+Δ)²)φ)`, `G = λΔ`.
pub fn build_pfc(grid: Grid2D, params: &ModelParams) -> Result<QuadSystem> {
    params.validate()?;
    let p = *params;
    let quad =
        SpectralSymbol::from_wavenumbers(grid, |kx, ky| {
            let k2 = kx * kx + ky * ky;
            p.b * k2 + p.c * (1.0 - k2).powi(2)
        });
    let l = quad.shift(p.gamma0)?;
    QuadSystem::new(
        grid,
        l,
        Mobility::Conserved { lambda: p.lambda },
        BulkTerm::DoubleWell {
            a: p.a,
            offset: -0.25 * p.a * p.a,
        },
        p.gamma0,
        quad,
    )
}

/// Thin-film epitaxy with slope selection:
/// `F = ε²/2 ‖Δφ‖² + ¼‖|∇φ|² − 1‖²`, `G = −λ`.
///
/// The `−γ0Δ` part of `L` is built from the same first-derivative operators
/// used for `∇φ`, so the stabilization cancels exactly against the coupling
/// (both drop the Nyquist mode). `L` vanishes on the mean mode.
pub fn build_mbe(grid: Grid2D, params: &ModelParams) -> Result<QuadSystem> {
    params.validate()?;
    let e2 = params.epsilon * params.epsilon;
    let lap = SpectralSymbol::laplacian(grid);
    let quad = lap.compose(&lap)?.scale(e2);
    let l = quad.add(&gradient_laplacian(grid)?.scale(-params.gamma0))?;
    QuadSystem::new(
        grid,
        l,
        Mobility::Relaxation {
            lambda: params.lambda,
        },
        BulkTerm::SlopeSelection,
        params.gamma0,
        quad,
    )
}

/// `φ_t = −λ γ0 φ`: `L = γ0`, `G = −λ`, no auxiliary coupling. With
/// `λ = γ0 = 1` every pointwise value follows `ψ' = −ψ`.
pub fn build_linear_relaxation(grid: Grid2D, params: &ModelParams) -> Result<QuadSystem> {
    params.validate()?;
    if params.gamma0 <= 0.0 {
        return Err(Error::param("gamma0", "linear relaxation needs gamma0 > 0"));
    }
    let l = SpectralSymbol::constant(grid, params.gamma0);
    QuadSystem::new(
        grid,
        l.clone(),
        Mobility::Relaxation {
            lambda: params.lambda,
        },
        BulkTerm::None,
        params.gamma0,
        l,
    )
}

/// `D_x² + D_y²` with first derivatives that drop the Nyquist mode.
fn gradient_laplacian(grid: Grid2D) -> Result<SpectralSymbol> {
    let dx = SpectralSymbol::derivative(grid, 1, 0);
    let dy = SpectralSymbol::derivative(grid, 0, 1);
    dx.compose(&dx)?.add(&dy.compose(&dy)?)
}

/// Benchmark initial conditions for `φ`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `sin(2πx/Lx) sin(2πy/Ly)`.
    Sine,
    /// `amplitude (2u − 1)` with `u` uniform on `[0, 1)`.
    Random { amplitude: f64, seed: u64 },
    /// `1` strictly inside the disk, `−1` elsewhere.
    Disk { radius: f64, center: (f64, f64) },
    /// Localized crystallite `φ̄ + ω(x) A φ_s(x)` with the smooth window
    /// `ω = (1 − (|x − x0|/d0)²)²` inside `|x − x0| ≤ d0`.
    PfcSeed {
        phi_bar: f64,
        amplitude: f64,
        d0: f64,
        k: f64,
        x0: (f64, f64),
    },
    /// `0.1 (sin 2x sin 2y + sin 5x sin 5y)`.
    MbeWaves,
}

impl InitialCondition {
    pub const NAMES: [&'static str; 5] = ["sine", "random", "disk", "pfc-seed", "mbe-waves"];

    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::Sine => "sine",
            InitialCondition::Random { .. } => "random",
            InitialCondition::Disk { .. } => "disk",
            InitialCondition::PfcSeed { .. } => "pfc-seed",
            InitialCondition::MbeWaves => "mbe-waves",
        }
    }

    /// Standard crystallite for bulk parameter `a`, centred in the domain:
    /// `φ̄ = √a/2`, `A = 4/5 (φ̄ + √(15a − 36φ̄²)/3)`, `d0 = 25`, `k = √3/2`.
    pub fn pfc_default(grid: &Grid2D, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::param("a", "pfc seed needs a > 0"));
        }
        let phi_bar = a.sqrt() / 2.0;
        let disc = 15.0 * a - 36.0 * phi_bar * phi_bar;
        if disc < 0.0 {
            return Err(Error::param("a", "seed amplitude radicand is negative"));
        }
        Ok(InitialCondition::PfcSeed {
            phi_bar,
            amplitude: 0.8 * (phi_bar + disc.sqrt() / 3.0),
            d0: 25.0,
            k: 3f64.sqrt() / 2.0,
            x0: (grid.lx() / 2.0, grid.ly() / 2.0),
        })
    }

    pub fn sample(&self, grid: Grid2D) -> Result<Field> {
        let f = match *self {
            InitialCondition::Sine => {
                let (wx, wy) = (2.0 * PI / grid.lx(), 2.0 * PI / grid.ly());
                Field::from_fn(grid, |x, y| (wx * x).sin() * (wy * y).sin())
            }
            InitialCondition::Random { amplitude, seed } => {
                return random_field(grid, amplitude, seed);
            }
            InitialCondition::Disk { radius, center } => {
                if !(radius > 0.0) {
                    return Err(Error::param("radius", "must be > 0"));
                }
                let r2 = radius * radius;
                Field::from_fn(grid, |x, y| {
                    let d2 = (x - center.0).powi(2) + (y - center.1).powi(2);
                    if d2 < r2 {
                        1.0
                    } else {
                        -1.0
                    }
                })
            }
            InitialCondition::PfcSeed {
                phi_bar,
                amplitude,
                d0,
                k,
                x0,
            } => {
                if !(d0 > 0.0) {
                    return Err(Error::param("d0", "must be > 0"));
                }
                let s3 = 3f64.sqrt();
                Field::from_fn(grid, |x, y| {
                    let r = ((x - x0.0).powi(2) + (y - x0.1).powi(2)).sqrt();
                    let w = if r <= d0 {
                        (1.0 - (r / d0).powi(2)).powi(2)
                    } else {
                        0.0
                    };
                    let phi_s = (k / s3 * y).cos() * (k * x).cos() - 0.5 * (2.0 * k / s3 * y).cos();
                    phi_bar + w * amplitude * phi_s
                })
            }
            InitialCondition::MbeWaves => Field::from_fn(grid, |x, y| {
                0.1 * ((2.0 * x).sin() * (2.0 * y).sin() + (5.0 * x).sin() * (5.0 * y).sin())
            }),
        };
        f.ensure_finite("initial condition")?;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eq::QuadState;
    use std::f64::consts::SQRT_2;

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("ch".parse::<ModelKind>().is_err());
    }

    #[test]
    fn ch_steady_state_has_zero_rhs() {
        let g = Grid2D::square(1.0, 16).unwrap();
        let p = ModelParams {
            epsilon: 0.01,
            lambda: 1e-3,
            ..Default::default()
        };
        for sys in [build_cahn_hilliard_gl(g, &p).unwrap(), build_allen_cahn(g, &p).unwrap()] {
            for v in [1.0, -1.0] {
                let psi = sys.initial_state(Field::constant(g, v)).unwrap();
                let rhs = sys.rhs(&psi).unwrap();
                assert!(rhs.max_abs() < 1e-10, "{}", rhs.max_abs());
            }
        }
    }

    #[test]
    fn pfc_energy_shift_and_l_mean() {
        let g = Grid2D::square(10.0, 8).unwrap();
        let p = ModelParams {
            a: 0.325,
            ..Default::default()
        };
        let sys = build_pfc(g, &p).unwrap();
        assert!((sys.l_symbol().mean_value() - 2.0).abs() < 1e-15);
        let expected = 0.25 * (0.325f64 + 1.0).powi(2) * 100.0;
        assert!((sys.energy_shift() - expected).abs() < 1e-12);
        let q = sys.init_q(&Field::constant(g, 1.0)).unwrap();
        assert!((q.values()[3] + 0.325 / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn mbe_flat_film_is_steady() {
        let g = Grid2D::square(2.0 * PI, 16).unwrap();
        let p = ModelParams {
            epsilon: 0.1f64.sqrt(),
            ..Default::default()
        };
        let sys = build_mbe(g, &p).unwrap();
        assert_eq!(sys.l_symbol().mean_value(), 0.0);
        let psi = sys.initial_state(Field::constant(g, 0.3)).unwrap();
        assert!((psi.q.values()[0] + SQRT_2).abs() < 1e-15);
        assert!(sys.rhs(&psi).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn energies_agree_with_exact_q() {
        let g = Grid2D::square(2.0 * PI, 32).unwrap();
        let phi = InitialCondition::MbeWaves.sample(g).unwrap();
        let p = ModelParams {
            epsilon: 0.3,
            a: 0.325,
            ..Default::default()
        };
        for kind in [ModelKind::CahnHilliard, ModelKind::Pfc, ModelKind::Mbe] {
            let sys = kind.build(g, &p).unwrap();
            let psi = sys.initial_state(phi.clone()).unwrap();
            let e = sys.energy(&psi).unwrap();
            let f = sys.original_energy(&phi).unwrap();
            assert!((e - f).abs() <= 1e-10 * f.abs().max(1.0), "{kind}: {e} vs {f}");
        }
    }

    #[test]
    fn linear_model_relaxes_pointwise() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let sys = build_linear_relaxation(g, &ModelParams::default()).unwrap();
        let phi = random_field(g, 1.0, 9).unwrap();
        let psi = QuadState::new(phi.clone(), Field::zeros(g)).unwrap();
        assert_eq!(sys.init_q(&phi).unwrap().max_abs(), 0.0);
        let rhs = sys.rhs(&psi).unwrap();
        assert!(rhs.phi.max_abs_diff(&phi.scale(-1.0)) < 1e-14);
    }

    #[test]
    fn sine_at_quarter_point() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let f = InitialCondition::Sine.sample(g).unwrap();
        assert!((f.at(2, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disk_center_and_corner() {
        let g = Grid2D::square(256.0, 256).unwrap();
        let ic = InitialCondition::Disk {
            radius: 100.0,
            center: (128.0, 128.0),
        };
        let f = ic.sample(g).unwrap();
        assert_eq!(f.at(128, 128), 1.0);
        assert_eq!(f.at(0, 0), -1.0);
    }

    #[test]
    fn pfc_seed_is_flat_outside_window() {
        let g = Grid2D::square(150.0, 64).unwrap();
        let ic = InitialCondition::pfc_default(&g, 0.325).unwrap();
        let phi_bar = 0.325f64.sqrt() / 2.0;
        let f = ic.sample(g).unwrap();
        assert!((f.at(0, 0) - phi_bar).abs() < 1e-15);
        assert!((f.at(63, 5) - phi_bar).abs() < 1e-15);
        assert!((f.at(32, 32) - phi_bar).abs() > 1e-3);
    }

    #[test]
    fn rejects_bad_params() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let bad = ModelParams {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(build_cahn_hilliard_gl(g, &bad).is_err());
        let bad = ModelParams {
            gamma0: -1.0,
            ..Default::default()
        };
        assert!(build_mbe(g, &bad).is_err());
    }
}
