//! Energy-stable time stepping for gradient-flow PDEs on periodic 2D grids.

pub mod diagnostics;
pub mod eq;
pub mod error;
mod fft;
pub mod grid;
pub mod integrators;
pub mod io;
pub mod models;
pub mod runner;
pub mod spectral;

pub use diagnostics::TraceRow;
pub use eq::{BulkTerm, Coupling, Mobility, QuadState, QuadSystem};
pub use error::{Error, Result};
pub use grid::{random_field, Field, Grid2D};
pub use models::{InitialCondition, ModelKind, ModelParams};
pub use runner::{parse_runspec, run, RunSpec};
pub use spectral::{NullMode, SpectralSymbol};
