//! Simulation of a cavity-QED Toffoli gate built from resonant π-Rabi
//! rotations and a cavity-assisted atomic collision.
//!
//! The crate is layered bottom-up:
//!
//! * [`qmath`]: dense complex linear algebra on small tensor-product spaces.
//! * [`model`]: cavity and three-level-atom Hamiltonians.
//! * [`protocol`]: logical encoding, the gate schedule and ideal execution.
//! * [`trajectories`]: quantum-jump trajectories with photon loss and timing
//!   jitter, plus a Lindblad integrator used as a reference.
//! * [`analysis`]: gate fidelity, parameter sweeps and a check of the
//!   dispersive approximation.

pub mod error;
pub mod model;
pub mod protocol;
pub mod qmath;
pub mod analysis;
pub mod trajectories;

pub use analysis::{FidelityGrid, FidelityResult};
pub use error::{Error, Result};
pub use model::PhysicalParams;
pub use protocol::{encode_logical, run_ideal, toffoli_schedule, LogicalBits, Schedule, ScheduleOptions};
pub use qmath::{CompositeSpace, DensityMatrix, OperatorMatrix, StateVector, C64};
pub use trajectories::{NoiseParams, TrajectoryEngine, TrajectoryResult};
