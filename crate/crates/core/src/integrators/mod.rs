//! Time integrators for quadratized gradient flows.

pub mod bdf;
pub mod linear;
pub mod stepper;
pub mod tableau;

pub use bdf::{bdf_coeffs, BdfCoeffs};
pub use linear::{solve_implicit, LinearTolerance};
pub use tableau::{gauss_tableau, ButcherTableau};
pub use stepper::{EnergyLaw, Predictor, Scheme, StepStats, Stepper, StepperConfig};
