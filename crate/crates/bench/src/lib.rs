//! Shared fixtures for the benchmarks.

use cqed_core::protocol::{encode_logical, toffoli_schedule, LogicalBits, Schedule};
use cqed_core::{NoiseParams, PhysicalParams, StateVector};

pub fn default_schedule() -> Schedule {
    toffoli_schedule(&PhysicalParams::default()).expect("default parameters are valid")
}

pub fn logical_inputs(schedule: &Schedule) -> Vec<StateVector> {
    LogicalBits::all()
        .map(|b| encode_logical(b, &schedule.space).expect("protocol space"))
        .collect()
}

/// The operating point: τ = 1 ms, ε = 3 %.
pub fn operating_noise(n_traj: usize) -> NoiseParams {
    NoiseParams::new(1e-3, 0.03, n_traj, 42).expect("valid noise")
}
