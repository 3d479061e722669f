//! Edge-preserving image segmentation by alternating minimization of
//! phase-field energies with a first-order or a Laplacian edge penalty.

pub mod altmin;
pub mod cli;
pub mod edges;
pub mod energy;
pub mod error;
pub mod grid;
pub mod imgio;
pub mod linsolve;
pub mod models;
pub mod params;
pub mod profile1d;
pub mod registry;
pub mod synth;

pub use altmin::{run, IterationReport, RunOptions, SegmentationResult};
pub use energy::{total_energy, EnergyBreakdown};
pub use error::{Error, Result};
pub use grid::{Grid2D, ScalarField, VectorField2};
pub use params::{BoundaryCondition, ModelKind, ModelParams};
