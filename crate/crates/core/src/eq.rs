//! Quadratized gradient-flow systems.
//!
//! A model with free energy `F = ½(φ, Lφ) + (f(φ), 1)` is rewritten with an
//! auxiliary field `q` so that the energy becomes the quadratic functional
//! `½‖Ψ‖²_B − A` of the augmented state `Ψ = (φ, q)`, with `B = diag(L, 1)`.
//! The dynamics take the form `Ψ_t = N(Ψ) B Ψ` with
//! `N(Ψ) = C*(Ψ) G C(Ψ)`, where `G` is the (negative semi-definite) mobility
//! and the row operator `C(Ψ) v = v_φ + g v_q − ∇·(p v_q)` couples `q` back
//! into the chemical potential. Here `g = ∂g/∂φ` and `p = ∂g/∂∇φ` are frozen
//! at the state the operator is evaluated at.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use crate::spectral::{divergence, gradient, SpectralSymbol};

/// Augmented state `Ψ = (φ, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadState {
    pub phi: Field,
    pub q: Field,
}

impl QuadState {
    pub fn new(phi: Field, q: Field) -> Result<Self> {
        phi.check_grid(&q)?;
        Ok(QuadState { phi, q })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        QuadState {
            phi: Field::zeros(grid),
            q: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.phi.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.q.is_finite()
    }

    pub(crate) fn ensure_finite(&self, context: &str) -> Result<()> {
        self.phi.ensure_finite(context)?;
        self.q.ensure_finite(context)
    }

    pub(crate) fn check_grid(&self, other: &QuadState) -> Result<()> {
        self.phi.check_grid(&other.phi)
    }

    /// Sum of the component inner products.
    pub fn inner(&self, other: &QuadState) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.phi.inner_unchecked(&other.phi) + self.q.inner_unchecked(&other.q))
    }

    pub fn add(&self, other: &QuadState) -> QuadState {
        QuadState {
            phi: &self.phi + &other.phi,
            q: &self.q + &other.q,
        }
    }

    pub fn sub(&self, other: &QuadState) -> QuadState {
        QuadState {
            phi: &self.phi - &other.phi,
            q: &self.q - &other.q,
        }
    }

    pub fn scale(&self, s: f64) -> QuadState {
        QuadState {
            phi: self.phi.scale(s),
            q: self.q.scale(s),
        }
    }

    /// `self += a * x`.
    pub(crate) fn axpy(&mut self, a: f64, x: &QuadState) {
        self.phi.axpy(a, &x.phi);
        self.q.axpy(a, &x.q);
    }

    /// `Σ w_i s_i`. Panics on an empty list.
    pub fn linear_combination(terms: &[(f64, &QuadState)]) -> QuadState {
        let (w0, s0) = terms[0];
        let mut out = s0.scale(w0);
        for &(w, s) in &terms[1..] {
            out.axpy(w, s);
        }
        out
    }

    /// `max(‖Δφ‖∞, ‖Δq‖∞)`.
    pub fn max_abs_diff(&self, other: &QuadState) -> f64 {
        self.phi
            .max_abs_diff(&other.phi)
            .max(self.q.max_abs_diff(&other.q))
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.max_abs().max(self.q.max_abs())
    }
}

/// The mobility operator `G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mobility {
    /// Non-conserved relaxation, `G = −λ`.
    Relaxation { lambda: f64 },
    /// Conserved dynamics, `G = λΔ`.
    Conserved { lambda: f64 },
}

impl Mobility {
    pub fn lambda(&self) -> f64 {
        match *self {
            Mobility::Relaxation { lambda } | Mobility::Conserved { lambda } => lambda,
        }
    }

    pub fn symbol(&self, grid: Grid2D) -> SpectralSymbol {
        match *self {
            Mobility::Relaxation { lambda } => SpectralSymbol::constant(grid, -lambda),
            Mobility::Conserved { lambda } => SpectralSymbol::laplacian(grid).scale(lambda),
        }
    }

    pub fn conserves_mass(&self) -> bool {
        matches!(self, Mobility::Conserved { .. })
    }
}

/// The non-quadratic part of the free energy and how `q` encodes it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BulkTerm {
    /// Density `¼(φ² − a)² + offset`, quadratized by
    /// `q = (φ² − a − γ0)/√2`, so that `∂g/∂φ = √2 φ`.
    DoubleWell { a: f64, offset: f64 },
    /// Density `¼(|∇φ|² − 1)²`, quadratized by
    /// `q = (|∇φ|² − 1 − γ0)/√2`, so that `∂g/∂∇φ = √2 ∇φ`.
    SlopeSelection,
    /// No bulk term: `q ≡ 0` and the flow is linear.
    None,
}

/// Coupling coefficients of `C(Ψ̄)` frozen at a state `Ψ̄`.
#[derive(Clone, Debug)]
pub struct Coupling {
    /// Pointwise coefficient `∂g/∂φ`.
    pub g: Option<Field>,
    /// Gradient coefficient `∂g/∂∇φ`.
    pub p: Option<[Field; 2]>,
}

impl Coupling {
    pub fn none() -> Self {
        Coupling { g: None, p: None }
    }

    /// `c(u) = g u − ∇·(p u)`: the q-column of `C`.
    pub fn apply(&self, u: &Field) -> Field {
        let mut out = match &self.g {
            Some(g) => g.mul_pointwise(u),
            None => Field::zeros(*u.grid()),
        };
        if let Some([px, py]) = &self.p {
            let div = divergence(&px.mul_pointwise(u), &py.mul_pointwise(u));
            out.axpy(-1.0, &div);
        }
        out
    }

    /// `c*(w) = g w + p·∇w`: adjoint of [`Coupling::apply`].
    pub fn apply_adjoint(&self, w: &Field) -> Field {
        let mut out = match &self.g {
            Some(g) => g.mul_pointwise(w),
            None => Field::zeros(*w.grid()),
        };
        if let Some([px, py]) = &self.p {
            let [wx, wy] = gradient(w);
            out.axpy(1.0, &px.mul_pointwise(&wx));
            out.axpy(1.0, &py.mul_pointwise(&wy));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.g.is_none() && self.p.is_none()
    }
}

/// A quadratized model on a fixed grid. Immutable after construction.
#[derive(Clone, Debug)]
pub struct QuadSystem {
    grid: Grid2D,
    l_symbol: SpectralSymbol,
    mobility: Mobility,
    g_symbol: SpectralSymbol,
    energy_shift: f64,
    gamma0: f64,
    bulk: BulkTerm,
    energy_symbol: SpectralSymbol,
}

impl QuadSystem {
    /// Assembles a system.
    ///
    /// `l_symbol` is `L` (positive on every mode except possibly the mean,
    /// where it may vanish); `energy_symbol` is the quadratic part of the
    /// untransformed energy, `F = ½(φ, Qφ) + (f, 1)`.
    pub fn new(
        grid: Grid2D,
        l_symbol: SpectralSymbol,
        mobility: Mobility,
        bulk: BulkTerm,
        gamma0: f64,
        energy_symbol: SpectralSymbol,
    ) -> Result<Self> {
        if *l_symbol.grid() != grid || *energy_symbol.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if l_symbol.is_imaginary() || energy_symbol.is_imaginary() {
            return Err(Error::param("L", "must be a real (even-order) symbol"));
        }
        let lambda = mobility.lambda();
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("lambda", "must be positive"));
        }
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return Err(Error::param("gamma0", "must be finite and >= 0"));
        }
        let l = l_symbol.values();
        if l[0] < 0.0 || l[1..].iter().any(|&v| !(v > 0.0)) {
            return Err(Error::param(
                "L",
                "symbol must be positive on every non-mean mode and >= 0 on the mean",
            ));
        }
        let g_symbol = mobility.symbol(grid);
        if g_symbol.max_value() > 0.0 {
            return Err(Error::param("G", "mobility must be negative semi-definite"));
        }
        let area = grid.area();
        let energy_shift = match bulk {
            BulkTerm::DoubleWell { a, offset } => {
                (0.25 * (a + gamma0).powi(2) - 0.25 * a * a - offset) * area
            }
            BulkTerm::SlopeSelection => 0.25 * (2.0 * gamma0 + gamma0 * gamma0) * area,
            BulkTerm::None => 0.0,
        };
        if !energy_shift.is_finite() {
            return Err(Error::param("A", "energy shift is not finite"));
        }
        Ok(QuadSystem {
            grid,
            l_symbol,
            mobility,
            g_symbol,
            energy_shift,
            gamma0,
            bulk,
            energy_symbol,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn l_symbol(&self) -> &SpectralSymbol {
        &self.l_symbol
    }
    pub fn g_symbol(&self) -> &SpectralSymbol {
        &self.g_symbol
    }
    pub fn mobility(&self) -> Mobility {
        self.mobility
    }
    /// The constant `A` in `F = ½‖Ψ‖²_B − A`.
    pub fn energy_shift(&self) -> f64 {
        self.energy_shift
    }
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
    pub fn bulk(&self) -> BulkTerm {
        self.bulk
    }

    fn check(&self, f: &Field) -> Result<()> {
        if *f.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn check_state(&self, v: &QuadState) -> Result<()> {
        self.check(&v.phi)?;
        self.check(&v.q)
    }

    /// `q = g(φ)` in closed polynomial form.
    pub fn init_q(&self, phi: &Field) -> Result<Field> {
        self.check(phi)?;
        let s = 1.0 / SQRT_2;
        let g0 = self.gamma0;
        Ok(match self.bulk {
            BulkTerm::DoubleWell { a, .. } => phi.map(|v| s * (v * v - a - g0)),
            BulkTerm::SlopeSelection => {
                let [dx, dy] = gradient(phi);
                dx.zip_map(&dy, |u, w| s * (u * u + w * w - 1.0 - g0))
            }
            BulkTerm::None => Field::zeros(self.grid),
        })
    }

    /// Initial augmented state `(φ, g(φ))`.
    pub fn initial_state(&self, phi: Field) -> Result<QuadState> {
        phi.ensure_finite("initial condition")?;
        let q = self.init_q(&phi)?;
        Ok(QuadState { phi, q })
    }

    /// Coupling coefficients frozen at `phi`.
    pub fn coupling_at(&self, phi: &Field) -> Coupling {
        match self.bulk {
            BulkTerm::DoubleWell { .. } => Coupling {
                g: Some(phi.scale(SQRT_2)),
                p: None,
            },
            BulkTerm::SlopeSelection => {
                let [dx, dy] = gradient(phi);
                Coupling {
                    g: None,
                    p: Some([dx.scale(SQRT_2), dy.scale(SQRT_2)]),
                }
            }
            BulkTerm::None => Coupling::none(),
        }
    }

    /// The coupling is linear in `φ`: `g = slope φ` or `p = slope ∇φ`.
    pub(crate) fn coupling_slope(&self) -> f64 {
        match self.bulk {
            BulkTerm::None => 0.0,
            _ => SQRT_2,
        }
    }

    /// `B v = (L v_φ, v_q)`.
    pub fn apply_b(&self, v: &QuadState) -> Result<QuadState> {
        self.check_state(v)?;
        Ok(QuadState {
            phi: self.l_symbol.apply_unchecked(&v.phi),
            q: v.q.clone(),
        })
    }

    /// `G w`.
    pub fn apply_g(&self, w: &Field) -> Field {
        self.g_symbol.apply_unchecked(w)
    }

    /// Row operator `C(Ψ̄) v = v_φ + c(v_q)`.
    pub fn apply_c(&self, coupling: &Coupling, v: &QuadState) -> Field {
        let mut out = v.phi.clone();
        if !coupling.is_zero() {
            out.axpy(1.0, &coupling.apply(&v.q));
        }
        out
    }

    /// Adjoint `C*(Ψ̄) w = (w, c*(w))`.
    pub fn apply_c_adjoint(&self, coupling: &Coupling, w: &Field) -> QuadState {
        let q = if coupling.is_zero() {
            Field::zeros(self.grid)
        } else {
            coupling.apply_adjoint(w)
        };
        QuadState { phi: w.clone(), q }
    }

    /// `N(frozen) v = C* G C v`.
    pub fn apply_n(&self, frozen: &QuadState, v: &QuadState) -> Result<QuadState> {
        self.check_state(frozen)?;
        self.check_state(v)?;
        let c = self.coupling_at(&frozen.phi);
        Ok(self.apply_n_with(&c, v))
    }

    pub(crate) fn apply_n_with(&self, coupling: &Coupling, v: &QuadState) -> QuadState {
        let w = self.apply_g(&self.apply_c(coupling, v));
        self.apply_c_adjoint(coupling, &w)
    }

    /// Constant-coefficient part `N1 v = (G v_φ, 0)`.
    pub fn apply_n1(&self, v: &QuadState) -> Result<QuadState> {
        self.check_state(v)?;
        Ok(QuadState {
            phi: self.apply_g(&v.phi),
            q: Field::zeros(self.grid),
        })
    }

    /// State-dependent remainder `N2(frozen) = N(frozen) − N1`, computed from
    /// its own expansion `N2 v = (G c(v_q), c*(G v_φ + G c(v_q)))`.
    pub fn apply_n2(&self, frozen: &QuadState, v: &QuadState) -> Result<QuadState> {
        self.check_state(frozen)?;
        self.check_state(v)?;
        let c = self.coupling_at(&frozen.phi);
        Ok(self.apply_n2_with(&c, v))
    }

    pub(crate) fn apply_n2_with(&self, coupling: &Coupling, v: &QuadState) -> QuadState {
        if coupling.is_zero() {
            return QuadState::zeros(self.grid);
        }
        let gcq = self.apply_g(&coupling.apply(&v.q));
        let full = &self.apply_g(&v.phi) + &gcq;
        QuadState {
            phi: gcq,
            q: coupling.apply_adjoint(&full),
        }
    }

    /// Right-hand side `N(Ψ) B Ψ` of the semi-discrete flow.
    pub fn rhs(&self, psi: &QuadState) -> Result<QuadState> {
        let b = self.apply_b(psi)?;
        self.apply_n(psi, &b)
    }

    /// Quadratized energy `½(Ψ, BΨ)_h − A`.
    pub fn energy(&self, psi: &QuadState) -> Result<f64> {
        self.check_state(psi)?;
        Ok(0.5 * self.b_norm_sq(psi) - self.energy_shift)
    }

    /// `‖v‖²_B = (v_φ, L v_φ) + (v_q, v_q)`.
    pub fn b_norm_sq(&self, v: &QuadState) -> f64 {
        let lphi = self.l_symbol.apply_unchecked(&v.phi);
        v.phi.inner_unchecked(&lphi) + v.q.inner_unchecked(&v.q)
    }

    /// Untransformed energy `½(φ, Qφ)_h + (f(φ), 1)_h`.
    pub fn original_energy(&self, phi: &Field) -> Result<f64> {
        self.check(phi)?;
        let quad = 0.5 * phi.inner_unchecked(&self.energy_symbol.apply_unchecked(phi));
        let bulk = match self.bulk {
            BulkTerm::DoubleWell { a, offset } => phi
                .map(|v| 0.25 * (v * v - a).powi(2) + offset)
                .integral(),
            BulkTerm::SlopeSelection => {
                let [dx, dy] = gradient(phi);
                dx.zip_map(&dy, |u, w| 0.25 * (u * u + w * w - 1.0).powi(2))
                    .integral()
            }
            BulkTerm::None => 0.0,
        };
        Ok(quad + bulk)
    }

    /// `‖q − g(φ)‖∞`.
    pub fn q_drift(&self, psi: &QuadState) -> Result<f64> {
        Ok(psi.q.max_abs_diff(&self.init_q(&psi.phi)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_field;

    fn gl_system(grid: Grid2D, eps: f64, gamma0: f64, mobility: Mobility) -> QuadSystem {
        let lap = SpectralSymbol::laplacian(grid);
        let l = lap.scale(-eps * eps).shift(gamma0).unwrap();
        let e = lap.scale(-eps * eps);
        QuadSystem::new(
            grid,
            l,
            mobility,
            BulkTerm::DoubleWell { a: 1.0, offset: 0.0 },
            gamma0,
            e,
        )
        .unwrap()
    }

    #[test]
    fn energy_shift_matches_closed_form() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let sys = gl_system(g, 0.1, 1.0, Mobility::Conserved { lambda: 1.0 });
        assert!((sys.energy_shift() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn b_leaves_q_alone() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let sys = gl_system(g, 0.1, 1.0, Mobility::Conserved { lambda: 1.0 });
        let q = random_field(g, 1.0, 3).unwrap();
        let v = QuadState::new(Field::zeros(g), q.clone()).unwrap();
        let bv = sys.apply_b(&v).unwrap();
        assert_eq!(bv.q, q);
        assert!(bv.phi.max_abs() < 1e-15);
    }

    #[test]
    fn rejects_positive_mobility_and_bad_l() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let lap = SpectralSymbol::laplacian(g);
        // L = Δ is negative: rejected
        let r = QuadSystem::new(
            g,
            lap.clone(),
            Mobility::Relaxation { lambda: 1.0 },
            BulkTerm::None,
            0.0,
            lap.clone(),
        );
        assert!(r.is_err());
        let r = QuadSystem::new(
            g,
            SpectralSymbol::identity(g),
            Mobility::Relaxation { lambda: -1.0 },
            BulkTerm::None,
            0.0,
            lap,
        );
        assert!(r.is_err());
    }

    #[test]
    fn relaxation_at_zero_state_is_minus_lambda() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let lambda = 0.7;
        let sys = gl_system(g, 1.0, 1.0, Mobility::Relaxation { lambda });
        let frozen = QuadState::zeros(g);
        let v = QuadState::new(random_field(g, 1.0, 1).unwrap(), random_field(g, 1.0, 2).unwrap())
            .unwrap();
        let nv = sys.apply_n(&frozen, &v).unwrap();
        assert!(nv.phi.max_abs_diff(&v.phi.scale(-lambda)) < 1e-14);
        assert!(nv.q.max_abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_means_n_equals_n1() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let sys = gl_system(g, 0.1, 1.0, Mobility::Conserved { lambda: 2.0 });
        let frozen = QuadState::zeros(g);
        let v = QuadState::new(random_field(g, 1.0, 5).unwrap(), random_field(g, 1.0, 6).unwrap())
            .unwrap();
        let n2 = sys.apply_n2(&frozen, &v).unwrap();
        assert_eq!(n2.phi.max_abs(), 0.0);
        assert_eq!(n2.q.max_abs(), 0.0);
    }

    #[test]
    fn gl_energy_vanishes_at_unit_state() {
        let g = Grid2D::square(1.0, 8).unwrap();
        let sys = gl_system(g, 0.1, 1.0, Mobility::Conserved { lambda: 1.0 });
        let psi = sys.initial_state(Field::constant(g, 1.0)).unwrap();
        assert!((psi.q.values()[0] + 1.0 / SQRT_2).abs() < 1e-15);
        assert!(sys.energy(&psi).unwrap().abs() < 1e-14);
        assert!(sys.original_energy(&psi.phi).unwrap().abs() < 1e-14);
    }

    #[test]
    fn init_q_double_well_at_zero() {
        let g = Grid2D::square(1.0, 4).unwrap();
        let sys = gl_system(g, 0.1, 1.0, Mobility::Conserved { lambda: 1.0 });
        let q = sys.init_q(&Field::zeros(g)).unwrap();
        assert!((q.values()[5] + SQRT_2).abs() < 1e-15);
    }
}
