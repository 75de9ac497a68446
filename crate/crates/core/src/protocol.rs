//! The Toffoli protocol: logical encoding, the pulse/interaction schedule,
//! ideal execution and cavity preparation/retrieval.
//!
//! Logical qubits map onto the physical system as
//!
//! | bit | control 1 (cavity) | control 2 (`A_c`) | target (`A_t`)        |
//! |-----|--------------------|-------------------|-----------------------|
//! | 0   | `|1>`              | `|i>`             | `(|g> + |e>)/√2`      |
//! | 1   | `|0>`              | `|g>`             | `(|g> - |e>)/√2`      |
//!
//! and the gate is five segments: π-Rabi on `A_c`, `R_ig` on `A_c`, the
//! dispersive collision for `π/λ`, `R_ig` on `A_c`, inverse π-Rabi on `A_c`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    collision_propagator, dispersive_hamiltonian, jc_hamiltonian, rabi_propagator, rge_pulse, rig_pulse,
    rig_rotation, AtomLevel, PhysicalParams, ATOM_DIM, CAVITY, CONTROL_ATOM, TARGET_ATOM,
};
use crate::qmath::{c, CompositeSpace, OperatorMatrix, StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pulse", rename_all = "snake_case")]
pub enum ClassicalPulse {
    /// `|i> <-> |g>` swap.
    Rig,
    /// Rotation in the `{g, e}` block.
    Rge { theta: f64, phi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    ResonantRabi { atom: usize, angle: f64, adjoint: bool },
    ClassicalPulse {
        atom: usize,
        #[serde(flatten)]
        pulse: ClassicalPulse,
    },
    Collision { atom1: usize, atom2: usize },
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(flatten)]
    pub kind: SegmentKind,
    #[serde(rename = "nominal_duration_s")]
    pub nominal_duration: f64,
    pub jitter_applies: bool,
    pub loss_active: bool,
}

impl Segment {
    /// True for classical pulses, which take no modeled time.
    pub fn is_instantaneous(&self) -> bool {
        matches!(self.kind, SegmentKind::ClassicalPulse { .. })
    }

    /// Hamiltonian acting during a timed segment, `None` for classical pulses.
    /// An inverse Rabi segment runs under `-H_JC`.
    pub fn hamiltonian(&self, params: &PhysicalParams, space: &CompositeSpace) -> Result<Option<OperatorMatrix>> {
        Ok(match self.kind {
            SegmentKind::ResonantRabi { atom, adjoint, .. } => {
                let h = jc_hamiltonian(params, atom, space)?;
                Some(if adjoint { h.scale(-1.0) } else { h })
            }
            SegmentKind::Collision { atom1, atom2 } => Some(dispersive_hamiltonian(params, atom1, atom2, space)?),
            SegmentKind::Idle => Some(OperatorMatrix::zeros(space)),
            SegmentKind::ClassicalPulse { .. } => None,
        })
    }

    /// Unitary of the segment with its duration (timed segments) or rotation
    /// angle (classical pulses) multiplied by `scale`.
    pub fn unitary(&self, params: &PhysicalParams, space: &CompositeSpace, scale: f64) -> Result<OperatorMatrix> {
        match self.kind {
            SegmentKind::ResonantRabi { atom, angle, adjoint } => {
                Ok(rabi_propagator(params, atom, space, angle * scale, adjoint)?.unitary)
            }
            SegmentKind::ClassicalPulse { atom, pulse } => pulse_unitary(atom, pulse, space, scale),
            SegmentKind::Collision { atom1, atom2 } => {
                collision_propagator(params, atom1, atom2, space, self.nominal_duration * scale)
            }
            SegmentKind::Idle => Ok(OperatorMatrix::identity(space)),
        }
    }
}

/// Classical pulse with its rotation angle scaled by `scale`.
pub fn pulse_unitary(atom: usize, pulse: ClassicalPulse, space: &CompositeSpace, scale: f64) -> Result<OperatorMatrix> {
    match pulse {
        ClassicalPulse::Rig if scale == 1.0 => rig_pulse(atom, space),
        ClassicalPulse::Rig => rig_rotation(atom, space, PI * scale),
        ClassicalPulse::Rge { theta, phi } => rge_pulse(atom, space, theta * scale, phi),
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SegmentKind::ResonantRabi { atom, angle, adjoint } => write!(
                f,
                "resonant_rabi(atom {atom}, angle {:.4}π{})",
                angle / PI,
                if adjoint { ", adjoint" } else { "" }
            )?,
            SegmentKind::ClassicalPulse { atom, pulse } => match pulse {
                ClassicalPulse::Rig => write!(f, "classical_pulse(atom {atom}, R_ig)")?,
                ClassicalPulse::Rge { theta, phi } => write!(f, "classical_pulse(atom {atom}, R_ge({theta}, {phi}))")?,
            },
            SegmentKind::Collision { atom1, atom2 } => write!(f, "collision(atoms {atom1},{atom2})")?,
            SegmentKind::Idle => write!(f, "idle")?,
        }
        write!(f, " for {:e} s", self.nominal_duration)
    }
}

/// Where cavity loss acts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossScope {
    #[default]
    AllSegments,
    CollisionOnly,
}

/// Which segments carry timing/angle jitter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterScope {
    #[default]
    All,
    InteractionsOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    pub loss_scope: LossScope,
    pub jitter_scope: JitterScope,
    /// Decode with the inverse π-Rabi rotation. Turning this off repeats the
    /// encoding pulse and breaks the gate on the `(0, 1, t)` inputs.
    pub decode_adjoint: bool,
    /// Idle time inserted before and after the collision while the target
    /// atom enters and leaves; zero means no idle segments.
    pub transit_idle: f64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            loss_scope: LossScope::AllSegments,
            jitter_scope: JitterScope::All,
            decode_adjoint: true,
            transit_idle: 0.0,
        }
    }
}

/// An ordered list of segments on a fixed space.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub space: CompositeSpace,
    pub segments: Vec<Segment>,
    pub params: PhysicalParams,
}

#[derive(Serialize)]
struct ScheduleDocument<'a> {
    space: &'a [usize],
    omega_rad_s: f64,
    delta_rad_s: f64,
    lambda_rad_s: f64,
    total_duration_s: f64,
    segments: &'a [Segment],
}

impl Schedule {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.nominal_duration).sum()
    }

    /// Exact unitary of every segment at nominal settings.
    pub fn ideal_unitaries(&self) -> Result<Vec<OperatorMatrix>> {
        self.segments.iter().map(|s| s.unitary(&self.params, &self.space, 1.0)).collect()
    }

    /// Product of all segment unitaries (last segment leftmost).
    pub fn ideal_propagator(&self) -> Result<OperatorMatrix> {
        self.ideal_unitaries()?
            .iter()
            .try_fold(OperatorMatrix::identity(&self.space), |acc, u| u.compose(&acc))
    }

    pub fn to_json(&self) -> String {
        let doc = ScheduleDocument {
            space: self.space.dims(),
            omega_rad_s: self.params.omega,
            delta_rad_s: self.params.delta,
            lambda_rad_s: self.params.lambda(),
            total_duration_s: self.total_duration(),
            segments: &self.segments,
        };
        serde_json::to_string_pretty(&doc).expect("schedule serializes")
    }
}

/// The five-segment Toffoli schedule with default options.
pub fn toffoli_schedule(params: &PhysicalParams) -> Result<Schedule> {
    toffoli_schedule_with(params, &ScheduleOptions::default())
}

pub fn toffoli_schedule_with(params: &PhysicalParams, options: &ScheduleOptions) -> Result<Schedule> {
    params.check_dispersive()?;
    if !(options.transit_idle >= 0.0 && options.transit_idle.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "transit idle time must be finite and >= 0, got {}",
            options.transit_idle
        )));
    }
    let loss_outside_collision = options.loss_scope == LossScope::AllSegments;
    let jitter_pulses = options.jitter_scope == JitterScope::All;
    let rabi = |adjoint| Segment {
        kind: SegmentKind::ResonantRabi {
            atom: CONTROL_ATOM,
            angle: PI,
            adjoint,
        },
        nominal_duration: params.rabi_time(PI),
        jitter_applies: true,
        loss_active: loss_outside_collision,
    };
    let rig = Segment {
        kind: SegmentKind::ClassicalPulse {
            atom: CONTROL_ATOM,
            pulse: ClassicalPulse::Rig,
        },
        nominal_duration: 0.0,
        jitter_applies: jitter_pulses,
        loss_active: loss_outside_collision,
    };
    let collision = Segment {
        kind: SegmentKind::Collision {
            atom1: CONTROL_ATOM,
            atom2: TARGET_ATOM,
        },
        nominal_duration: params.collision_time(),
        jitter_applies: true,
        loss_active: true,
    };
    let idle = Segment {
        kind: SegmentKind::Idle,
        nominal_duration: options.transit_idle,
        jitter_applies: false,
        loss_active: loss_outside_collision,
    };

    let mut segments = vec![rabi(false), rig];
    if options.transit_idle > 0.0 {
        segments.push(idle);
    }
    segments.push(collision);
    if options.transit_idle > 0.0 {
        segments.push(idle);
    }
    segments.extend([rig, rabi(options.decode_adjoint)]);
    Ok(Schedule {
        space: params.protocol_space(),
        segments,
        params: *params,
    })
}

/// A computational basis label `(c1, c2, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalBits {
    pub c1: bool,
    pub c2: bool,
    pub t: bool,
}

impl LogicalBits {
    pub const fn new(c1: bool, c2: bool, t: bool) -> Self {
        Self { c1, c2, t }
    }

    /// Index `4 c1 + 2 c2 + t`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < 8, "logical index {index} out of range");
        Self::new(index & 4 != 0, index & 2 != 0, index & 1 != 0)
    }

    pub fn index(self) -> usize {
        4 * self.c1 as usize + 2 * self.c2 as usize + self.t as usize
    }

    pub fn all() -> impl Iterator<Item = LogicalBits> {
        (0..8).map(Self::from_index)
    }

    /// Flips the target iff both controls are 1.
    pub fn toffoli(self) -> Self {
        Self {
            t: self.t ^ (self.c1 && self.c2),
            ..self
        }
    }
}

impl fmt::Display for LogicalBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.c1 as u8, self.c2 as u8, self.t as u8)
    }
}

fn check_protocol_space(space: &CompositeSpace) -> Result<()> {
    let d = space.dims();
    if d.len() != 3 || d[1] != ATOM_DIM || d[2] != ATOM_DIM {
        return Err(Error::InvalidSpace(format!(
            "expected (fock_dim, 3, 3), got {d:?}"
        )));
    }
    Ok(())
}

/// Physical ket of a logical basis state.
pub fn encode_logical(bits: LogicalBits, space: &CompositeSpace) -> Result<StateVector> {
    check_protocol_space(space)?;
    let photons = if bits.c1 { 0 } else { 1 };
    let control = if bits.c2 { AtomLevel::G } else { AtomLevel::I };
    let sign = if bits.t { -1.0 } else { 1.0 };
    let g = StateVector::basis(space, &[photons, control.index(), AtomLevel::G.index()]);
    let e = StateVector::basis(space, &[photons, control.index(), AtomLevel::E.index()]);
    Ok(g.add(&e.scaled(c(sign, 0.0)))?.scaled(c(FRAC_1_SQRT_2, 0.0)))
}

/// Applies each segment's exact unitary in order.
pub fn run_ideal(schedule: &Schedule, psi0: &StateVector) -> Result<StateVector> {
    Ok(ideal_states(schedule, psi0)?.pop().expect("at least the input state"))
}

/// The input followed by the state after each segment.
pub fn ideal_states(schedule: &Schedule, psi0: &StateVector) -> Result<Vec<StateVector>> {
    if psi0.space() != &schedule.space {
        return Err(Error::SpaceMismatch {
            left: schedule.space.dims().to_vec(),
            right: psi0.space().dims().to_vec(),
        });
    }
    if !psi0.is_normalized() {
        return Err(Error::NotNormalized(psi0.norm_squared()));
    }
    let mut states = vec![psi0.clone()];
    for u in schedule.ideal_unitaries()? {
        let next = u.apply(states.last().expect("nonempty"))?;
        states.push(next);
    }
    Ok(states)
}

/// `M[b', b] = <encode(b')| run_ideal |encode(b)>`, indexed by [`LogicalBits::index`].
pub fn logical_process_matrix(schedule: &Schedule) -> Result<DMatrix<C64>> {
    let u = schedule.ideal_propagator()?;
    let basis: Vec<StateVector> = LogicalBits::all()
        .map(|b| encode_logical(b, &schedule.space))
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(8, 8);
    for (col, input) in basis.iter().enumerate() {
        let out = u.apply(input)?;
        for (row, bra) in basis.iter().enumerate() {
            m[(row, col)] = bra.inner(&out)?;
        }
    }
    Ok(m)
}

/// How far a logical process matrix is from the Toffoli permutation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToffoliComparison {
    /// `max | |M_ij| - P_ij |`.
    pub modulus_error: f64,
    /// Largest deviation (rad) of a permutation entry's phase from the first one.
    pub phase_spread: f64,
    /// Phase of the `(0,0,0)` diagonal entry.
    pub global_phase: f64,
}

pub fn compare_with_toffoli(m: &DMatrix<C64>) -> ToffoliComparison {
    let mut modulus_error: f64 = 0.0;
    let mut phases = Vec::with_capacity(8);
    for b in LogicalBits::all() {
        let row = b.toffoli().index();
        for r in 0..8 {
            let expect = if r == row { 1.0 } else { 0.0 };
            modulus_error = modulus_error.max((m[(r, b.index())].norm() - expect).abs());
        }
        phases.push(m[(row, b.index())].arg());
    }
    let reference = phases[0];
    let phase_spread = phases
        .iter()
        .map(|p| {
            let d = (p - reference).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        })
        .fold(0.0, f64::max);
    ToffoliComparison {
        modulus_error,
        phase_spread,
        global_phase: reference,
    }
}

fn check_transfer_space(params: &PhysicalParams, psi: &StateVector) -> Result<()> {
    let expect = params.transfer_space();
    if psi.space() != &expect {
        return Err(Error::SpaceMismatch {
            left: expect.dims().to_vec(),
            right: psi.space().dims().to_vec(),
        });
    }
    Ok(())
}

fn forbid(psi: &StateVector, what: &str, pred: impl Fn(&[usize]) -> bool) -> Result<()> {
    let space = psi.space();
    let weight: f64 = (0..space.total_dim())
        .filter(|&k| pred(&space.digits_of(k)))
        .map(|k| psi.amplitudes()[k].norm_sqr())
        .sum();
    if weight.sqrt() > 1e-12 {
        return Err(Error::ForbiddenAmplitude {
            what: what.into(),
            amplitude: weight.sqrt(),
        });
    }
    Ok(())
}

/// Loads an ancilla atom's `{g, e}` state into the empty cavity with a
/// π-Rabi rotation: `(α|g> + β|e>)|0> -> |g>(α|0> + β|1>)`.
///
/// `psi` lives on cavity ⊗ atom.
pub fn prepare_cavity(params: &PhysicalParams, psi: &StateVector) -> Result<StateVector> {
    check_transfer_space(params, psi)?;
    forbid(psi, "atom level i", |d| d[1] == AtomLevel::I.index())?;
    forbid(psi, "photons in the cavity before preparation", |d| d[CAVITY] != 0)?;
    let u = rabi_propagator(params, 1, psi.space(), PI, false)?;
    u.unitary.apply(psi)
}

/// Transfers the cavity field into a fresh atom in `|g>`; inverse of
/// [`prepare_cavity`].
pub fn retrieve_cavity(params: &PhysicalParams, psi: &StateVector) -> Result<StateVector> {
    check_transfer_space(params, psi)?;
    forbid(psi, "retrieval atom not in g", |d| d[1] != AtomLevel::G.index())?;
    let u = rabi_propagator(params, 1, psi.space(), PI, true)?;
    u.unitary.apply(psi)
}
