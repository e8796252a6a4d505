//! Numerical simulator for a free-boundary MEMS model: a quasilinear
//! parabolic membrane equation coupled to an anisotropic elliptic potential
//! equation on the moving gap region. Every trajectory carries
//! machine-checked certificates of the model's proven inequality chain and
//! its finite-time blow-up bound.

pub mod certificates;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod potential;
pub mod small_gap;
pub mod state;
pub mod stepper;
pub mod sweep;
pub mod verify;

pub use certificates::{blowup_time_bound, energy_e, f_lambda, BlowupBounds, CertName, CertificateEntry};
pub use config::{InitialProfile, SimulationConfig};
pub use error::{Error, Result};
pub use grid::{build_grid, TransformedGrid};
pub use small_gap::{pullin_threshold, run_small_gap, shooting_lambda_star};
pub use state::{physical_height, BreakdownKind, BreakdownStatus, MembraneState};
pub use stepper::{run_simulation, Snapshot, Trajectory};
