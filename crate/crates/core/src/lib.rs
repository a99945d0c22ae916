//! Numerical workbench for a subsonic flow-plate system with Kutta-Joukowski
//! flow conditions.
//!
//! Modules follow the structure of the analysis: [`hilbert`] (finite Hilbert
//! transform on (-1,1)), [`symbols`] (Fourier-Laplace multipliers),
//! [`possio`] (per-frequency Possio solver), [`flowmap`] (flow operator,
//! Zaremba problem, Neumann-flow map), [`plate`] (clamped plate and its
//! nonlinearities), [`coupled`] (time evolution and diagnostics)
//! and [`verify`] (the numbered acceptance checks).

pub mod error;
pub mod tolerances;
pub mod hilbert;
pub mod symbols;
pub mod possio;
pub mod sparse;
pub mod flowmap;
pub mod plate;
pub mod coupled;
pub mod verify;

pub use error::{Error, Result};
pub use hilbert::{ChebFunction, WeightClass};
pub use symbols::{Case, SymbolPoint};
pub use possio::{PossioProblem, SolvePath, TraceDiagnostic};
pub use flowmap::{FlowField, HalfPlaneGrid};
pub use plate::{Nonlinearity, PlateGrid, PlateState};
pub use coupled::{CoupledState, EnergyReport};
pub use num_complex::Complex64;
