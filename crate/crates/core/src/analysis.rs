//! Gate fidelity estimates, `(τ, ε)` sweeps and a numerical check of the
//! dispersive collision Hamiltonian against the full detuned model.
//!
//! The fidelity is the average over the eight logical basis inputs of
//! `|<encode(Toffoli(b))|ψ>|²`, with ψ the trajectory output.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    collision_propagator, full_detuned_hamiltonian, rabi_propagator, rig_pulse, PhysicalParams, CONTROL_ATOM,
    TARGET_ATOM,
};
use crate::protocol::{encode_logical, LogicalBits, Schedule};
use crate::qmath::{propagator, DensityMatrix, StateVector};
use crate::trajectories::{
    derive_seed, lindblad_evolve, serialize_tau, trajectory_rng, NoiseParams, TrajectoryEngine,
};

/// Monte Carlo estimate of the gate fidelity at one noise setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityResult {
    pub mean: f64,
    pub std_error: f64,
    /// Trajectories per logical input.
    pub n_traj: usize,
    #[serde(serialize_with = "serialize_tau")]
    pub tau: f64,
    pub epsilon: f64,
}

impl FidelityResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// `cells[i][j]` is the result at `tau_values[i]`, `epsilon_values[j]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityGrid {
    #[serde(serialize_with = "serialize_taus")]
    pub tau_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub cells: Vec<Vec<FidelityResult>>,
}

fn serialize_taus<S: serde::Serializer>(taus: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Tau(#[serde(serialize_with = "serialize_tau")] f64);
    let mut seq = s.serialize_seq(Some(taus.len()))?;
    for &t in taus {
        seq.serialize_element(&Tau(t))?;
    }
    seq.end()
}

pub const CSV_HEADER: &str = "tau_s,epsilon,mean_fidelity,std_error,n_traj";

impl FidelityGrid {
    pub fn cell(&self, tau_index: usize, eps_index: usize) -> &FidelityResult {
        &self.cells[tau_index][eps_index]
    }

    /// Row-major in τ, then ε. Floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.cells {
            for r in row {
                let tau = if r.tau.is_finite() { format!("{:?}", r.tau) } else { "inf".to_string() };
                writeln!(out, "{tau},{:?},{:?},{:?},{}", r.epsilon, r.mean, r.std_error, r.n_traj)
                    .expect("writing to a String");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

/// Toffoli images of the logical basis, indexed by [`LogicalBits::index`].
fn toffoli_targets(schedule: &Schedule) -> Result<Vec<StateVector>> {
    LogicalBits::all()
        .map(|b| encode_logical(b.toffoli(), &schedule.space))
        .collect()
}

fn summarize(samples: &[f64], noise: &NoiseParams) -> FidelityResult {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    FidelityResult {
        mean,
        std_error: (var / n).sqrt(),
        n_traj: noise.n_traj,
        tau: noise.tau,
        epsilon: noise.epsilon,
    }
}

/// Per-trajectory fidelities, input-major. Trajectory `k` of input `b` uses
/// stream `b * n_traj + k` of `noise.seed`.
pub fn trajectory_fidelities(schedule: &Schedule, noise: &NoiseParams) -> Result<Vec<f64>> {
    let engine = TrajectoryEngine::new(schedule, noise)?;
    let inputs: Vec<StateVector> = LogicalBits::all()
        .map(|b| encode_logical(b, &schedule.space))
        .collect::<Result<_>>()?;
    let targets = toffoli_targets(schedule)?;
    let n = noise.n_traj;
    (0..inputs.len() * n)
        .into_par_iter()
        .map(|job| {
            let b = job / n;
            let mut rng = trajectory_rng(noise.seed, job as u64);
            let out = engine.run(&inputs[b], &mut rng)?;
            Ok(targets[b].inner(&out.final_state)?.norm_sqr())
        })
        .collect()
}

pub fn gate_fidelity(schedule: &Schedule, noise: &NoiseParams) -> Result<FidelityResult> {
    let samples = trajectory_fidelities(schedule, noise)?;
    Ok(summarize(&samples, noise))
}

/// Sampling-free fidelity at `ε = 0` from the master equation.
pub fn lindblad_gate_fidelity(schedule: &Schedule, tau: f64) -> Result<f64> {
    let targets = toffoli_targets(schedule)?;
    let per_input: Vec<f64> = LogicalBits::all()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&b| {
            let rho0 = DensityMatrix::from_pure(&encode_logical(b, &schedule.space)?);
            let rho = lindblad_evolve(schedule, &rho0, tau)?;
            rho.population(&targets[b.index()])
        })
        .collect::<Result<_>>()?;
    Ok(per_input.iter().sum::<f64>() / per_input.len() as f64)
}

/// One [`gate_fidelity`] per cell; cell `(i, j)` uses seed
/// `derive_seed(seed, i * |ε| + j)` and `dt_max = τ/100`.
pub fn sweep(
    schedule: &Schedule,
    tau_values: &[f64],
    epsilon_values: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<FidelityGrid> {
    if tau_values.is_empty() || epsilon_values.is_empty() {
        return Err(Error::InvalidParameter("sweep grids must be nonempty".into()));
    }
    let mut cells = Vec::with_capacity(tau_values.len());
    for (i, &tau) in tau_values.iter().enumerate() {
        let mut row = Vec::with_capacity(epsilon_values.len());
        for (j, &eps) in epsilon_values.iter().enumerate() {
            let noise = NoiseParams::new(tau, eps, n_traj, cell_seed(seed, i, j, epsilon_values.len()))?;
            let r = gate_fidelity(schedule, &noise)?;
            log::info!("tau {tau:e} s, epsilon {eps}: F = {:.4} ± {:.4}", r.mean, r.std_error);
            row.push(r);
        }
        cells.push(row);
    }
    Ok(FidelityGrid {
        tau_values: tau_values.to_vec(),
        epsilon_values: epsilon_values.to_vec(),
        cells,
    })
}

pub fn cell_seed(seed: u64, tau_index: usize, eps_index: usize, n_eps: usize) -> u64 {
    derive_seed(seed, (tau_index * n_eps + eps_index) as u64)
}

/// `count` log-spaced points from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            (0..count)
                .map(|k| match k {
                    0 => start,
                    k if k == count - 1 => stop,
                    k => (a + (b - a) * k as f64 / (count - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

/// 0.2 ms to 10 ms, 8 log-spaced lifetimes.
pub fn default_tau_grid() -> Vec<f64> {
    logspace(2e-4, 1e-2, 8)
}

/// 0 to 8 % in steps of 1 %.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..=8).map(|k| k as f64 / 100.0).collect()
}

/// Lifetimes at which the trajectory ensemble is checked against the
/// master equation.
pub const SMOKE_TAUS: [f64; 3] = [5e-4, 1e-3, 5e-3];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersiveOverlap {
    pub delta_over_omega: f64,
    pub lambda_rad_s: f64,
    pub collision_time_s: f64,
    /// Indexed by [`LogicalBits::index`].
    pub overlaps: Vec<f64>,
    pub min_overlap: f64,
}

/// Collision-segment inputs: each logical basis state after the encoding
/// π-Rabi rotation and the `|g>↔|i>` pulse.
pub fn collision_inputs(params: &PhysicalParams) -> Result<Vec<StateVector>> {
    let space = params.protocol_space();
    let rabi = rabi_propagator(params, CONTROL_ATOM, &space, PI, false)?.unitary;
    let encode = rig_pulse(CONTROL_ATOM, &space)?.compose(&rabi)?;
    LogicalBits::all()
        .map(|b| encode.apply(&encode_logical(b, &space)?))
        .collect()
}

/// Per ratio `δ/Ω`, the smallest `|<ψ|U_full† U_eff|ψ>|²` over the collision
/// inputs, with both evolutions run for `t_col = π/λ` at that ratio.
pub fn dispersive_validation(params: &PhysicalParams, ratios: &[f64]) -> Result<Vec<DispersiveOverlap>> {
    let inputs = collision_inputs(params)?;
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio >= 1.0 && ratio.is_finite()) {
                return Err(Error::InvalidParameter(format!("delta/omega must be >= 1, got {ratio}")));
            }
            let p = params.with_delta_over_omega(ratio)?;
            let space = p.protocol_space();
            let t = p.collision_time();
            let u_eff = collision_propagator(&p, CONTROL_ATOM, TARGET_ATOM, &space, t)?;
            let u_full = propagator(&full_detuned_hamiltonian(&p, CONTROL_ATOM, TARGET_ATOM, &space)?, t)?;
            let overlaps: Vec<f64> = inputs
                .iter()
                .map(|psi| {
                    let a = u_eff.apply(psi)?;
                    let b = u_full.apply(psi)?;
                    Ok(b.inner(&a)?.norm_sqr())
                })
                .collect::<Result<_>>()?;
            Ok(DispersiveOverlap {
                delta_over_omega: ratio,
                lambda_rad_s: p.lambda(),
                collision_time_s: t,
                min_overlap: overlaps.iter().copied().fold(f64::INFINITY, f64::min),
                overlaps,
            })
        })
        .collect()
}

pub const DISPERSIVE_RATIOS: [f64; 4] = [4.0, 8.0, 16.0, 50.0];

/// Trace distance between an `n_traj` ensemble and the master equation for
/// one input at `ε = 0`.
pub fn ensemble_vs_lindblad(schedule: &Schedule, psi0: &StateVector, tau: f64, n_traj: usize, seed: u64) -> Result<f64> {
    let noise = NoiseParams::new(tau, 0.0, n_traj, seed)?;
    let engine = TrajectoryEngine::new(schedule, &noise)?;
    let results: Vec<_> = (0..n_traj)
        .into_par_iter()
        .map(|k| engine.run(psi0, &mut trajectory_rng(seed, k as u64)))
        .collect::<Result<_>>()?;
    let ensemble = crate::trajectories::ensemble_density(&results)?;
    let reference = lindblad_evolve(schedule, &DensityMatrix::from_pure(psi0), tau)?;
    ensemble.trace_distance(&reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::toffoli_schedule;

    fn schedule() -> Schedule {
        toffoli_schedule(&PhysicalParams::default()).unwrap()
    }

    #[test]
    fn ideal_limit_is_perfect() {
        let noise = NoiseParams::new(f64::INFINITY, 0.0, 3, 1).unwrap();
        let r = gate_fidelity(&schedule(), &noise).unwrap();
        assert!(r.mean >= 1.0 - 1e-8);
        assert!(r.std_error < 1e-8);
        assert!((lindblad_gate_fidelity(&schedule(), f64::INFINITY).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn one_cell_sweep_matches_direct_call() {
        let s = schedule();
        let grid = sweep(&s, &[1e-3], &[0.02], 20, 77).unwrap();
        let noise = NoiseParams::new(1e-3, 0.02, 20, cell_seed(77, 0, 0, 1)).unwrap();
        assert_eq!(grid.cells[0][0], gate_fidelity(&s, &noise).unwrap());
    }

    #[test]
    fn csv_layout() {
        let s = schedule();
        let grid = sweep(&s, &[1e-3, f64::INFINITY], &[0.0, 0.01], 4, 1).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0.001,0.0,"));
        assert!(lines[2].starts_with("0.001,0.01,"));
        assert!(lines[3].starts_with("inf,0.0,"));
        assert!(lines[4].ends_with(",4"));
        let json: serde_json::Value = serde_json::from_str(&grid.to_json()).unwrap();
        assert_eq!(json["tau_values"][1], "inf");
        assert_eq!(json["cells"][1][0]["tau"], "inf");
    }

    #[test]
    fn default_grids() {
        let t = default_tau_grid();
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], 2e-4);
        assert_eq!(t[7], 1e-2);
        assert!(t.windows(2).all(|w| w[1] / w[0] > 1.7 && w[1] / w[0] < 1.8));
        let e = default_epsilon_grid();
        assert_eq!(e.len(), 9);
        assert_eq!(e[3], 0.03);
        assert_eq!(e[8], 0.08);
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(sweep(&schedule(), &[], &[0.0], 1, 0).is_err());
        assert!(sweep(&schedule(), &[1e-3], &[], 1, 0).is_err());
    }

    #[test]
    fn overlaps_are_bounded() {
        let report = dispersive_validation(&PhysicalParams::default(), &[1.0, 4.0]).unwrap();
        for r in &report {
            assert!(r.overlaps.iter().all(|&o| (0.0..=1.0 + 1e-12).contains(&o)));
        }
        assert!(dispersive_validation(&PhysicalParams::default(), &[0.5]).is_err());
    }

    #[test]
    fn collision_inputs_hold_at_most_one_photon() {
        for psi in collision_inputs(&PhysicalParams::default()).unwrap() {
            assert!(psi.is_normalized());
            for n in 2..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        assert!(psi.amplitude(&[n, a, b]).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
