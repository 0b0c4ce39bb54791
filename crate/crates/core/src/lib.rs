pub mod advection;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod diffusion;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod mms;
pub mod params;
pub mod snapshot;
pub mod spectral;
pub mod stencil;
pub mod stepper;
pub mod velocity;

pub use error::{Error, Result};
pub use field::{ScalarField2, ScalarField3, VelocityField};
pub use grid::{Grid, LateralMode};
pub use params::{HMatrix, PhysParams};
