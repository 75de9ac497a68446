//! Open-system evolution of a schedule under cavity photon loss and timing
//! jitter.
//!
//! Quantum-jump trajectories evolve the unnormalized state under
//! `K = H - (i/2) κ a†a` and collapse with `a` whenever the squared norm
//! falls below a uniformly drawn threshold. The Lindblad integrator solves
//! the corresponding master equation deterministically and is the reference
//! the ensemble average is checked against.
//!
//! Randomness: every trajectory owns a ChaCha8 stream selected by its index,
//! so results do not depend on how trajectories are scheduled across threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{annihilation, cavity_operator, number_operator};
use crate::protocol::{Schedule, Segment};
use crate::qmath::{c, BlockGenerator, DensityMatrix, OperatorMatrix, SparseOperator, StateVector, C64};

/// Relative slack allowed on the no-jump norm decay before it counts as growth.
const NORM_GROWTH_TOL: f64 = 1e-12;
/// Largest `|generator| · step` taken by the Lindblad integrator.
const LINDBLAD_ACCURACY_STEP: f64 = 0.01;

pub(crate) fn serialize_tau<S: serde::Serializer>(tau: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if tau.is_finite() {
        s.serialize_f64(*tau)
    } else {
        s.serialize_str("inf")
    }
}

/// Noise model and Monte Carlo settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseParams {
    /// Photon lifetime τ in seconds; `f64::INFINITY` disables loss.
    #[serde(serialize_with = "serialize_tau")]
    pub tau: f64,
    /// Relative standard deviation of the per-segment timing/angle error.
    pub epsilon: f64,
    /// Trajectories per input state.
    pub n_traj: usize,
    pub seed: u64,
    /// Largest substep of the no-jump evolution, in seconds.
    pub dt_max: f64,
}

impl NoiseParams {
    /// Uses `dt_max = τ/100` (unbounded when τ is infinite).
    pub fn new(tau: f64, epsilon: f64, n_traj: usize, seed: u64) -> Result<Self> {
        let noise = Self {
            tau,
            epsilon,
            n_traj,
            seed,
            dt_max: default_dt_max(tau),
        };
        noise.validate()?;
        Ok(noise)
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Result<Self> {
        self.dt_max = dt_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Loss rate `κ = 1/τ`.
    pub fn kappa(&self) -> f64 {
        if self.tau.is_finite() {
            1.0 / self.tau
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::InvalidParameter(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon must be in [0, 1), got {}", self.epsilon)));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be positive".into()));
        }
        if self.dt_max.is_nan() || self.dt_max <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt_max must be > 0, got {}", self.dt_max)));
        }
        if self.tau.is_finite() && self.dt_max > self.tau / 100.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "dt_max {} exceeds tau/100 = {}",
                self.dt_max,
                self.tau / 100.0
            )));
        }
        Ok(())
    }
}

pub fn default_dt_max(tau: f64) -> f64 {
    if tau.is_finite() {
        tau / 100.0
    } else {
        f64::INFINITY
    }
}

/// RNG for trajectory `stream` under root `seed`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for job `index` (e.g. a sweep cell) under a root seed.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root ^ 0x5eed_5eed_5eed_5eed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Per-segment multiplicative error: timed segments run for `duration`,
/// classical pulses rotate by `scale` times their nominal angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub scale: f64,
    pub duration: f64,
}

/// Draws `1 + η` per jittered segment, `η ~ N(0, ε²)` conditioned on `η > -1`.
pub fn jitter_durations<R: Rng + ?Sized>(schedule: &Schedule, epsilon: f64, rng: &mut R) -> Vec<Perturbation> {
    let normal = (epsilon > 0.0).then(|| Normal::new(0.0, epsilon).expect("finite epsilon"));
    schedule
        .segments
        .iter()
        .map(|seg| {
            let scale = match (&normal, seg.jitter_applies) {
                (Some(dist), true) => loop {
                    let eta: f64 = dist.sample(rng);
                    if eta > -1.0 {
                        break 1.0 + eta;
                    }
                },
                _ => 1.0,
            };
            Perturbation {
                scale,
                duration: seg.nominal_duration * scale,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub final_state: StateVector,
    pub jump_times: Vec<f64>,
    pub perturbed_durations: Vec<f64>,
}

/// Segment generator `-i K` with the loss rate that applies to it.
#[derive(Clone, Debug)]
struct TimedGenerator {
    blocks: BlockGenerator,
    kappa: f64,
}

/// Precomputed per-schedule data shared by all trajectories of one noise
/// setting.
#[derive(Clone, Debug)]
pub struct TrajectoryEngine {
    schedule: Schedule,
    noise: NoiseParams,
    generators: Vec<Option<TimedGenerator>>,
    nominal_pulses: Vec<Option<OperatorMatrix>>,
    jump: DMatrix<C64>,
}

impl TrajectoryEngine {
    pub fn new(schedule: &Schedule, noise: &NoiseParams) -> Result<Self> {
        noise.validate()?;
        let space = &schedule.space;
        let fock = space.dim(crate::model::CAVITY)?;
        let number = cavity_operator(space, &number_operator(fock)?)?;
        let jump = cavity_operator(space, &annihilation(fock)?)?.into_matrix();

        let mut generators = Vec::with_capacity(schedule.segments.len());
        let mut nominal_pulses = Vec::with_capacity(schedule.segments.len());
        for seg in &schedule.segments {
            match seg.hamiltonian(&schedule.params, space)? {
                Some(h) => {
                    let kappa = if seg.loss_active { noise.kappa() } else { 0.0 };
                    let k = h.matrix() - number.matrix().map(|z| z * c(0.0, 0.5 * kappa));
                    generators.push(Some(TimedGenerator {
                        blocks: BlockGenerator::new(&(k * c(0.0, -1.0))),
                        kappa,
                    }));
                    nominal_pulses.push(None);
                }
                None => {
                    generators.push(None);
                    nominal_pulses.push(Some(seg.unitary(&schedule.params, space, 1.0)?));
                }
            }
        }
        Ok(Self {
            schedule: schedule.clone(),
            noise: *noise,
            generators,
            nominal_pulses,
            jump,
        })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn noise(&self) -> &NoiseParams {
        &self.noise
    }

    /// One quantum-jump trajectory from `psi0`.
    pub fn run<R: Rng + ?Sized>(&self, psi0: &StateVector, rng: &mut R) -> Result<TrajectoryResult> {
        if psi0.space() != &self.schedule.space {
            return Err(Error::SpaceMismatch {
                left: self.schedule.space.dims().to_vec(),
                right: psi0.space().dims().to_vec(),
            });
        }
        if !psi0.is_normalized() {
            return Err(Error::NotNormalized(psi0.norm_squared()));
        }
        let perturbations = jitter_durations(&self.schedule, self.noise.epsilon, rng);
        let mut state = Walker {
            psi: psi0.amplitudes().clone(),
            threshold: rng.random::<f64>(),
            jumps: Vec::new(),
            jump: &self.jump,
            resolution: self.noise.dt_max / 100.0,
        };

        let mut clock = 0.0;
        for (k, (seg, p)) in self.schedule.segments.iter().zip(&perturbations).enumerate() {
            match &self.generators[k] {
                None => state.psi = self.pulse(k, seg, p.scale)?.matrix() * &state.psi,
                Some(generator) if p.duration > 0.0 => {
                    state.evolve(generator, p.duration, self.noise.dt_max, clock, rng)?;
                    clock += p.duration;
                }
                Some(_) => {}
            }
        }

        let norm = state.psi.norm();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::NormUnderflow);
        }
        Ok(TrajectoryResult {
            final_state: StateVector::new(self.schedule.space.clone(), state.psi.unscale(norm))?,
            jump_times: state.jumps,
            perturbed_durations: perturbations.iter().map(|p| p.duration).collect(),
        })
    }

    fn pulse(&self, k: usize, seg: &Segment, scale: f64) -> Result<std::borrow::Cow<'_, OperatorMatrix>> {
        if scale == 1.0 {
            if let Some(u) = &self.nominal_pulses[k] {
                return Ok(std::borrow::Cow::Borrowed(u));
            }
        }
        Ok(std::borrow::Cow::Owned(seg.unitary(&self.schedule.params, &self.schedule.space, scale)?))
    }
}

/// Mutable state of one trajectory.
struct Walker<'a> {
    psi: DVector<C64>,
    threshold: f64,
    jumps: Vec<f64>,
    jump: &'a DMatrix<C64>,
    resolution: f64,
}

impl Walker<'_> {
    fn evolve<R: Rng + ?Sized>(
        &mut self,
        generator: &TimedGenerator,
        duration: f64,
        dt_max: f64,
        start: f64,
        rng: &mut R,
    ) -> Result<()> {
        if generator.kappa == 0.0 {
            self.psi = generator.blocks.apply(duration, &self.psi);
            return Ok(());
        }
        let steps = (duration / dt_max).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let step = generator.blocks.propagator(h);
        for k in 0..steps {
            let before = self.psi.norm_squared();
            let next = step.apply(&self.psi);
            let after = next.norm_squared();
            if after > before * (1.0 + NORM_GROWTH_TOL) {
                return Err(Error::NormIncrease { before, after });
            }
            if after > self.threshold {
                self.psi = next;
            } else {
                self.jump_within(generator, h, start + k as f64 * h, rng)?;
            }
        }
        Ok(())
    }

    /// The squared norm crosses the threshold somewhere in `(0, h]`; locate
    /// each crossing by bisection, jump, and finish the substep.
    fn jump_within<R: Rng + ?Sized>(
        &mut self,
        generator: &TimedGenerator,
        h: f64,
        start: f64,
        rng: &mut R,
    ) -> Result<()> {
        let mut remaining = h;
        let mut t = start;
        loop {
            let (mut lo, mut hi) = (0.0, remaining);
            while hi - lo > self.resolution {
                let mid = 0.5 * (lo + hi);
                if generator.blocks.apply(mid, &self.psi).norm_squared() > self.threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let collapsed = self.jump * generator.blocks.apply(hi, &self.psi);
            let norm = collapsed.norm();
            if norm.is_nan() || norm <= 1e-150 {
                return Err(Error::NormUnderflow);
            }
            t += hi;
            remaining -= hi;
            self.jumps.push(t);
            self.psi = collapsed.unscale(norm);
            self.threshold = rng.random::<f64>();
            if remaining <= 0.0 {
                return Ok(());
            }
            let next = generator.blocks.apply(remaining, &self.psi);
            if next.norm_squared() > self.threshold {
                self.psi = next;
                return Ok(());
            }
        }
    }
}

/// One trajectory with a freshly built engine.
pub fn mcwf_trajectory<R: Rng + ?Sized>(
    schedule: &Schedule,
    psi0: &StateVector,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<TrajectoryResult> {
    TrajectoryEngine::new(schedule, noise)?.run(psi0, rng)
}

/// `(1/N) Σ |ψ_k><ψ_k|`, summed in list order.
pub fn ensemble_density(results: &[TrajectoryResult]) -> Result<DensityMatrix> {
    let first = results.first().ok_or(Error::EmptyEnsemble)?;
    let space = first.final_state.space().clone();
    let n = space.total_dim();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for r in results {
        if r.final_state.space() != &space {
            return Err(Error::SpaceMismatch {
                left: space.dims().to_vec(),
                right: r.final_state.space().dims().to_vec(),
            });
        }
        let v = r.final_state.amplitudes();
        acc += v * v.adjoint();
    }
    DensityMatrix::from_parts(space, acc.unscale(results.len() as f64))
}

/// Integrates `dρ/dt = -i[H, ρ] + κ(a ρ a† - {a†a, ρ}/2)` through the schedule
/// at nominal timings with fixed-step RK4; classical pulses act as `U ρ U†`.
pub fn lindblad_evolve(schedule: &Schedule, rho0: &DensityMatrix, tau: f64) -> Result<DensityMatrix> {
    lindblad_evolve_with(schedule, rho0, tau, default_dt_max(tau))
}

/// [`lindblad_evolve`] with an explicit upper bound on the step.
pub fn lindblad_evolve_with(
    schedule: &Schedule,
    rho0: &DensityMatrix,
    tau: f64,
    dt_max: f64,
) -> Result<DensityMatrix> {
    if rho0.space() != &schedule.space {
        return Err(Error::SpaceMismatch {
            left: schedule.space.dims().to_vec(),
            right: rho0.space().dims().to_vec(),
        });
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
    }
    let kappa = if tau.is_finite() { 1.0 / tau } else { 0.0 };
    let space = &schedule.space;
    let fock = space.dim(crate::model::CAVITY)?;
    let a = cavity_operator(space, &annihilation(fock)?)?;
    let number = cavity_operator(space, &number_operator(fock)?)?;
    let jump = SparseOperator::from_dense(a.matrix());
    let jump_dag = SparseOperator::from_dense(&a.matrix().adjoint());

    let mut rho = rho0.matrix().clone();
    for seg in &schedule.segments {
        let Some(h) = seg.hamiltonian(&schedule.params, space)? else {
            let u = seg.unitary(&schedule.params, space, 1.0)?;
            rho = u.matrix() * &rho * u.matrix().adjoint();
            continue;
        };
        if seg.nominal_duration <= 0.0 {
            continue;
        }
        let k_seg = if seg.loss_active { kappa } else { 0.0 };
        let k = h.matrix() - number.matrix().map(|z| z * c(0.0, 0.5 * k_seg));
        let rate = row_sum_norm(h.matrix()) + k_seg * (fock - 1) as f64;
        let cap = if rate > 0.0 { LINDBLAD_ACCURACY_STEP / rate } else { f64::INFINITY };
        let steps = (seg.nominal_duration / cap.min(dt_max)).ceil().max(1.0) as usize;
        let dt = seg.nominal_duration / steps as f64;
        let rhs = LindbladRhs {
            k: SparseOperator::from_dense(&k),
            k_dag: SparseOperator::from_dense(&k.adjoint()),
            jump: &jump,
            jump_dag: &jump_dag,
            kappa: k_seg,
        };
        for _ in 0..steps {
            rho = rhs.rk4_step(&rho, dt);
        }
    }
    let out = DensityMatrix::from_parts(space.clone(), rho)?;
    Ok(out)
}

fn row_sum_norm(m: &DMatrix<C64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

struct LindbladRhs<'a> {
    k: SparseOperator,
    k_dag: SparseOperator,
    jump: &'a SparseOperator,
    jump_dag: &'a SparseOperator,
    kappa: f64,
}

impl LindbladRhs<'_> {
    /// `-i K ρ + i ρ K† + κ a ρ a†` with `K = H - (i/2) κ a†a`.
    fn eval(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = rho.nrows();
        let mut out = DMatrix::zeros(n, n);
        self.k.left_mul_acc(rho, c(0.0, -1.0), &mut out);
        self.k_dag.right_mul_acc(rho, c(0.0, 1.0), &mut out);
        if self.kappa > 0.0 {
            let a_rho = self.jump.left_mul(rho);
            self.jump_dag.right_mul_acc(&a_rho, c(self.kappa, 0.0), &mut out);
        }
        out
    }

    fn rk4_step(&self, rho: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
        let k1 = self.eval(rho);
        let k2 = self.eval(&(rho + k1.scale(0.5 * dt)));
        let k3 = self.eval(&(rho + k2.scale(0.5 * dt)));
        let k4 = self.eval(&(rho + k3.scale(dt)));
        rho + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysicalParams;
    use crate::protocol::{encode_logical, run_ideal, toffoli_schedule, LogicalBits, SegmentKind};
    use crate::qmath::CompositeSpace;

    fn idle_schedule(duration: f64) -> Schedule {
        let params = PhysicalParams::default();
        Schedule {
            space: params.protocol_space(),
            segments: vec![Segment {
                kind: SegmentKind::Idle,
                nominal_duration: duration,
                jitter_applies: true,
                loss_active: true,
            }],
            params,
        }
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseParams::new(1e-3, 0.03, 10, 1).is_ok());
        assert!(NoiseParams::new(f64::INFINITY, 0.0, 10, 1).is_ok());
        assert!(NoiseParams::new(0.0, 0.0, 10, 1).is_err());
        assert!(NoiseParams::new(1e-3, 1.0, 10, 1).is_err());
        assert!(NoiseParams::new(1e-3, -0.1, 10, 1).is_err());
        assert!(NoiseParams::new(1e-3, 0.0, 0, 1).is_err());
        let n = NoiseParams::new(1e-3, 0.0, 10, 1).unwrap();
        assert!(n.with_dt_max(1e-4).is_err());
        assert!(n.with_dt_max(1e-6).is_ok());
        assert_eq!(n.kappa(), 1e3);
    }

    #[test]
    fn zero_epsilon_leaves_durations() {
        let s = toffoli_schedule(&PhysicalParams::default()).unwrap();
        let p = jitter_durations(&s, 0.0, &mut trajectory_rng(3, 0));
        for (seg, p) in s.segments.iter().zip(&p) {
            assert_eq!(p.duration, seg.nominal_duration);
            assert_eq!(p.scale, 1.0);
        }
    }

    #[test]
    fn jitter_is_positive_and_unbiased() {
        let s = idle_schedule(2e-5);
        let mut rng = trajectory_rng(11, 0);
        let eps = 0.3;
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| jitter_durations(&s, eps, &mut rng)[0].duration).collect();
        assert!(draws.iter().all(|&d| d > 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        // truncation at -100% is > 3σ away so the bias is negligible
        assert!((mean - 2e-5).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn seed_streams_are_reproducible() {
        let mut a = trajectory_rng(5, 7);
        let mut b = trajectory_rng(5, 7);
        let mut c = trajectory_rng(5, 8);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_eq!(derive_seed(1, 2), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
    }

    #[test]
    fn lossless_trajectory_is_the_ideal_run() {
        let s = toffoli_schedule(&PhysicalParams::default()).unwrap();
        let noise = NoiseParams::new(f64::INFINITY, 0.0, 1, 0).unwrap();
        let engine = TrajectoryEngine::new(&s, &noise).unwrap();
        for b in LogicalBits::all() {
            let psi = encode_logical(b, &s.space).unwrap();
            let r = engine.run(&psi, &mut trajectory_rng(0, b.index() as u64)).unwrap();
            assert!(r.jump_times.is_empty());
            let ideal = run_ideal(&s, &psi).unwrap();
            let err = (r.final_state.amplitudes() - ideal.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "{b}: {err}");
        }
    }

    #[test]
    fn jump_times_are_ordered_and_in_range() {
        let s = idle_schedule(3e-3);
        let noise = NoiseParams::new(1e-3, 0.0, 1, 0).unwrap();
        let engine = TrajectoryEngine::new(&s, &noise).unwrap();
        let psi = StateVector::basis(&s.space, &[2, 0, 0]);
        let mut seen_two = false;
        for k in 0..200 {
            let r = engine.run(&psi, &mut trajectory_rng(9, k)).unwrap();
            assert!(r.jump_times.len() <= 2);
            seen_two |= r.jump_times.len() == 2;
            assert!(r.jump_times.windows(2).all(|w| w[0] < w[1]));
            assert!(r.jump_times.iter().all(|t| (0.0..=3e-3).contains(t)));
            assert!(r.final_state.is_normalized());
        }
        assert!(seen_two);
    }

    #[test]
    fn vacuum_never_jumps() {
        let s = idle_schedule(1e-3);
        let noise = NoiseParams::new(1e-4, 0.0, 1, 0).unwrap();
        let psi = StateVector::basis(&s.space, &[0, 1, 2]);
        let r = mcwf_trajectory(&s, &psi, &noise, &mut trajectory_rng(1, 1)).unwrap();
        assert!(r.jump_times.is_empty());
        assert_eq!(r.final_state, psi);
    }

    #[test]
    fn ensemble_of_one_is_a_projector() {
        let space = CompositeSpace::new([3, 3, 3]).unwrap();
        let psi = encode_logical(LogicalBits::from_index(3), &space).unwrap();
        let r = TrajectoryResult {
            final_state: psi.clone(),
            jump_times: vec![],
            perturbed_durations: vec![],
        };
        let rho = ensemble_density(std::slice::from_ref(&r)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let twice = ensemble_density(&[r.clone(), r]).unwrap();
        assert!(rho.trace_distance(&twice).unwrap() < 1e-14);
        assert_eq!(ensemble_density(&[]), Err(Error::EmptyEnsemble));
    }

    #[test]
    fn damped_mode_population() {
        // ⟨a†a⟩(t) = e^{-t/τ} for a single photon
        let tau = 1e-3;
        let t = 7e-4;
        let s = idle_schedule(t);
        let rho0 = DensityMatrix::from_pure(&StateVector::basis(&s.space, &[1, 0, 0]));
        let rho = lindblad_evolve(&s, &rho0, tau).unwrap();
        let n = cavity_operator(&s.space, &number_operator(3).unwrap()).unwrap();
        let mean = rho.expectation(&n).unwrap().re;
        assert!((mean - (-t / tau).exp()).abs() < 1e-6);
        rho.check(1e-8, 1e-8).unwrap();
    }

    #[test]
    fn lossless_lindblad_is_unitary_conjugation() {
        let s = toffoli_schedule(&PhysicalParams::default()).unwrap();
        let psi = encode_logical(LogicalBits::from_index(2), &s.space)
            .unwrap()
            .add(&encode_logical(LogicalBits::from_index(6), &s.space).unwrap())
            .unwrap()
            .normalized()
            .unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let rho = lindblad_evolve(&s, &rho0, f64::INFINITY).unwrap();
        let expect = rho0.conjugate_by(&s.ideal_propagator().unwrap()).unwrap();
        let err = (rho.matrix() - expect.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        rho.check(1e-8, 1e-8).unwrap();
    }
}
