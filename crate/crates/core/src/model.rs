//! Physical model: cavity mode, three-level atoms and their Hamiltonians.
//!
//! Every composite space used here has the cavity as subsystem 0 followed by
//! three-level atoms with levels ordered `g = 0`, `e = 1`, `i = 2`. The `i`
//! level never couples to the quantized field.
//!
//! Resonant coupling uses `H = (iΩ/2)(a† |g><e| - a |e><g|)`, which makes the
//! π-Rabi map real: `|g,1> -> -|e,0>` and `|e,0> -> |g,1>`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{c, embed_operator, propagator, CompositeSpace, OperatorMatrix, C64};

/// Subsystem index of the cavity mode.
pub const CAVITY: usize = 0;
/// Subsystem index of the control atom `A_c` in the protocol space.
pub const CONTROL_ATOM: usize = 1;
/// Subsystem index of the target atom `A_t` in the protocol space.
pub const TARGET_ATOM: usize = 2;
/// Dimension of each atomic subsystem.
pub const ATOM_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomLevel {
    G,
    E,
    I,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::G, AtomLevel::E, AtomLevel::I];

    pub const fn index(self) -> usize {
        match self {
            AtomLevel::G => 0,
            AtomLevel::E => 1,
            AtomLevel::I => 2,
        }
    }
}

/// Coupling constants and cavity truncation.
///
/// `lambda` is always recomputed from `omega` and `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Vacuum coupling Ω in rad/s.
    pub omega: f64,
    /// Cavity detuning δ in rad/s used during the collision.
    pub delta: f64,
    /// Number of Fock levels kept for the cavity.
    pub fock_dim: usize,
}

impl PhysicalParams {
    pub fn new(omega: f64, delta: f64, fock_dim: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if fock_dim < 3 {
            return Err(Error::InvalidParameter(format!("fock_dim must be >= 3, got {fock_dim}")));
        }
        Ok(Self {
            omega,
            delta,
            fock_dim,
        })
    }

    /// Parameters from laboratory units: `Ω/2π` in Hz and `δ` as a multiple of Ω.
    pub fn from_lab(omega_hz: f64, delta_over_omega: f64, fock_dim: usize) -> Result<Self> {
        let omega = 2.0 * PI * omega_hz;
        Self::new(omega, delta_over_omega * omega, fock_dim)
    }

    /// Dispersive rate `λ = Ω² / 4δ`.
    pub fn lambda(&self) -> f64 {
        self.omega * self.omega / (4.0 * self.delta)
    }

    pub fn delta_over_omega(&self) -> f64 {
        self.delta / self.omega
    }

    /// Duration of a resonant rotation by `angle` (π gives the π-Rabi pulse).
    pub fn rabi_time(&self, angle: f64) -> f64 {
        angle / self.omega
    }

    /// `t_col = π / λ`.
    pub fn collision_time(&self) -> f64 {
        PI / self.lambda()
    }

    pub fn with_delta_over_omega(&self, ratio: f64) -> Result<Self> {
        Self::new(self.omega, ratio * self.omega, self.fock_dim)
    }

    /// Refuses `δ < 2Ω` for collision segments and warns below `4Ω`.
    pub fn check_dispersive(&self) -> Result<()> {
        let r = self.delta_over_omega();
        if r < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "delta/omega = {r} is too small for the dispersive collision (need >= 2)"
            )));
        }
        if r < 4.0 {
            log::warn!("delta/omega = {r} < 4: dispersive approximation is marginal");
        }
        Ok(())
    }

    /// Cavity ⊗ control atom ⊗ target atom.
    pub fn protocol_space(&self) -> CompositeSpace {
        CompositeSpace::new([self.fock_dim, ATOM_DIM, ATOM_DIM]).expect("valid dims")
    }

    /// Cavity ⊗ one atom, used for preparation and retrieval.
    pub fn transfer_space(&self) -> CompositeSpace {
        CompositeSpace::new([self.fock_dim, ATOM_DIM]).expect("valid dims")
    }
}

impl Default for PhysicalParams {
    /// Ω/2π = 50 kHz, δ = 4Ω, three Fock levels.
    fn default() -> Self {
        Self::from_lab(50e3, 4.0, 3).expect("default parameters are valid")
    }
}

/// A unitary together with the time it takes to apply.
#[derive(Clone, Debug)]
pub struct TimedUnitary {
    pub unitary: OperatorMatrix,
    pub duration: f64,
}

/// Truncated annihilation operator: `a|n> = sqrt(n) |n-1>`.
pub fn annihilation(fock_dim: usize) -> Result<OperatorMatrix> {
    let space = CompositeSpace::new([fock_dim])?;
    let mut m = DMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        m[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new(space, m)
}

/// `a† a` on a single mode.
pub fn number_operator(fock_dim: usize) -> Result<OperatorMatrix> {
    let a = annihilation(fock_dim)?;
    a.adjoint().compose(&a)?.into_hermitian()
}

/// `|ket><bra|` on one three-level atom.
pub fn atom_outer(ket: AtomLevel, bra: AtomLevel) -> OperatorMatrix {
    OperatorMatrix::outer(ATOM_DIM, ket.index(), bra.index()).expect("atom dimension is valid")
}

fn check_atom(space: &CompositeSpace, atom: usize) -> Result<()> {
    if atom == CAVITY {
        return Err(Error::InvalidParameter("subsystem 0 is the cavity, not an atom".into()));
    }
    let d = space.dim(atom)?;
    if d != ATOM_DIM {
        return Err(Error::DimensionMismatch {
            expected: ATOM_DIM,
            found: d,
        });
    }
    Ok(())
}

/// `a ⊗ 1` style mode operator lifted to the full space.
pub fn cavity_operator(space: &CompositeSpace, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    embed_operator(space, &[CAVITY], op)
}

/// `(iΩ/2)(a† |g><e| - a |e><g|)` on cavity ⊗ atom.
fn jc_local(omega: f64, fock_dim: usize) -> Result<OperatorMatrix> {
    let a = annihilation(fock_dim)?;
    let lower = a.adjoint().kron(&atom_outer(AtomLevel::G, AtomLevel::E));
    let raise = a.kron(&atom_outer(AtomLevel::E, AtomLevel::G));
    let diff = lower.matrix() - raise.matrix();
    OperatorMatrix::new(lower.space().clone(), diff * c(0.0, omega / 2.0))?.into_hermitian()
}

/// Resonant Jaynes–Cummings coupling of `atom` to the cavity.
pub fn jc_hamiltonian(params: &PhysicalParams, atom: usize, space: &CompositeSpace) -> Result<OperatorMatrix> {
    check_atom(space, atom)?;
    let local = jc_local(params.omega, space.dim(CAVITY)?)?;
    embed_operator(space, &[CAVITY, atom], &local)
}

/// Resonant rotation by `angle` (`Ωt = angle`); the adjoint flag gives the
/// inverse rotation, realized physically by a π shift of the coupling phase.
pub fn rabi_propagator(
    params: &PhysicalParams,
    atom: usize,
    space: &CompositeSpace,
    angle: f64,
    adjoint: bool,
) -> Result<TimedUnitary> {
    if angle.is_nan() || angle <= 0.0 {
        return Err(Error::InvalidParameter(format!("rotation angle must be positive, got {angle}")));
    }
    let h = jc_hamiltonian(params, atom, space)?;
    let duration = params.rabi_time(angle);
    let u = propagator(&h, duration)?;
    Ok(TimedUnitary {
        unitary: if adjoint { u.adjoint() } else { u },
        duration,
    })
}

/// Effective dispersive Hamiltonian of two atoms sharing the detuned mode:
///
/// `λ(|e1><e1| aa† - |g1><g1| a†a + |e2><e2| aa† - |g2><g2| a†a
///    + |e1><g1| ⊗ |g2><e2| + |g1><e1| ⊗ |e2><g2|)`.
pub fn dispersive_hamiltonian(
    params: &PhysicalParams,
    atom1: usize,
    atom2: usize,
    space: &CompositeSpace,
) -> Result<OperatorMatrix> {
    check_atom(space, atom1)?;
    check_atom(space, atom2)?;
    let fock = space.dim(CAVITY)?;
    let a = annihilation(fock)?;
    let aad = a.compose(&a.adjoint())?;
    let ada = a.adjoint().compose(&a)?;
    let id_mode = OperatorMatrix::identity(&CompositeSpace::new([fock])?);
    let id_atom = OperatorMatrix::identity(&CompositeSpace::new([ATOM_DIM])?);
    let pe = atom_outer(AtomLevel::E, AtomLevel::E);
    let pg = atom_outer(AtomLevel::G, AtomLevel::G);
    let up = atom_outer(AtomLevel::E, AtomLevel::G);
    let down = atom_outer(AtomLevel::G, AtomLevel::E);

    let terms = [
        (1.0, aad.kron(&pe).kron(&id_atom)),
        (-1.0, ada.kron(&pg).kron(&id_atom)),
        (1.0, aad.kron(&id_atom).kron(&pe)),
        (-1.0, ada.kron(&id_atom).kron(&pg)),
        (1.0, id_mode.kron(&up).kron(&down)),
        (1.0, id_mode.kron(&down).kron(&up)),
    ];
    let dim = fock * ATOM_DIM * ATOM_DIM;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (sign, term) in &terms {
        m += term.matrix().scale(*sign);
    }
    let local = OperatorMatrix::new(CompositeSpace::new([fock, ATOM_DIM, ATOM_DIM])?, m.scale(params.lambda()))?
        .into_hermitian()?;
    embed_operator(space, &[CAVITY, atom1, atom2], &local)
}

/// `exp(-i H_e t)`.
pub fn collision_propagator(
    params: &PhysicalParams,
    atom1: usize,
    atom2: usize,
    space: &CompositeSpace,
    t: f64,
) -> Result<OperatorMatrix> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!("collision time must be positive, got {t}")));
    }
    propagator(&dispersive_hamiltonian(params, atom1, atom2, space)?, t)
}

fn atom_unitary(space: &CompositeSpace, atom: usize, block: DMatrix<C64>) -> Result<OperatorMatrix> {
    check_atom(space, atom)?;
    let local = OperatorMatrix::new(CompositeSpace::new([ATOM_DIM])?, block)?.into_unitary()?;
    embed_operator(space, &[atom], &local)
}

/// Ramsey pulse exchanging `|i>` and `|g>`: a real swap, identity on `|e>`.
pub fn rig_pulse(atom: usize, space: &CompositeSpace) -> Result<OperatorMatrix> {
    let (g, i) = (AtomLevel::G.index(), AtomLevel::I.index());
    let mut m = DMatrix::<C64>::zeros(ATOM_DIM, ATOM_DIM);
    m[(g, i)] = c(1.0, 0.0);
    m[(i, g)] = c(1.0, 0.0);
    m[(AtomLevel::E.index(), AtomLevel::E.index())] = c(1.0, 0.0);
    atom_unitary(space, atom, m)
}

/// The `g <-> i` rotation family `P+ + e^{iθ} P-`, with `P±` projecting on
/// `(|g> ± |i>)/√2`. Equals the identity at `θ = 0` and the real swap at `θ = π`.
pub fn rig_rotation(atom: usize, space: &CompositeSpace, theta: f64) -> Result<OperatorMatrix> {
    let (g, i) = (AtomLevel::G.index(), AtomLevel::I.index());
    let phase = C64::from_polar(1.0, theta);
    let diag = (c(1.0, 0.0) + phase) * 0.5;
    let off = (c(1.0, 0.0) - phase) * 0.5;
    let mut m = DMatrix::<C64>::zeros(ATOM_DIM, ATOM_DIM);
    m[(g, g)] = diag;
    m[(i, i)] = diag;
    m[(g, i)] = off;
    m[(i, g)] = off;
    m[(AtomLevel::E.index(), AtomLevel::E.index())] = c(1.0, 0.0);
    atom_unitary(space, atom, m)
}

/// Rotation on the `{g, e}` block: `|g> -> cos(θ/2)|g> + e^{iφ} sin(θ/2)|e>`,
/// `|e> -> -e^{-iφ} sin(θ/2)|g> + cos(θ/2)|e>`; identity on `|i>`.
pub fn rge_pulse(atom: usize, space: &CompositeSpace, theta: f64, phi: f64) -> Result<OperatorMatrix> {
    let (g, e) = (AtomLevel::G.index(), AtomLevel::E.index());
    let (s, co) = (0.5 * theta).sin_cos();
    let mut m = DMatrix::<C64>::zeros(ATOM_DIM, ATOM_DIM);
    m[(g, g)] = c(co, 0.0);
    m[(e, e)] = c(co, 0.0);
    m[(e, g)] = C64::from_polar(s, phi);
    m[(g, e)] = -C64::from_polar(s, -phi);
    m[(AtomLevel::I.index(), AtomLevel::I.index())] = c(1.0, 0.0);
    atom_unitary(space, atom, m)
}

/// Two atoms resonantly coupled to a cavity detuned by δ, in the atomic
/// frame: `-δ a†a + Σ_j (iΩ/2)(a† |g_j><e_j| - a |e_j><g_j|)`.
///
/// The mode sits δ below the atomic transition, the sign for which second
/// order perturbation theory reproduces [`dispersive_hamiltonian`] with `+λ`.
pub fn full_detuned_hamiltonian(
    params: &PhysicalParams,
    atom1: usize,
    atom2: usize,
    space: &CompositeSpace,
) -> Result<OperatorMatrix> {
    let n = cavity_operator(space, &number_operator(space.dim(CAVITY)?)?)?;
    jc_hamiltonian(params, atom1, space)?
        .add(&jc_hamiltonian(params, atom2, space)?)?
        .add(&n.scale(-params.delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{HermitianSpectrum, StateVector};
    use AtomLevel::{E, G, I};

    fn params() -> PhysicalParams {
        PhysicalParams::default()
    }

    fn space() -> CompositeSpace {
        params().protocol_space()
    }

    fn ket(n: usize, ac: AtomLevel, at: AtomLevel) -> StateVector {
        StateVector::basis(&space(), &[n, ac.index(), at.index()])
    }

    fn close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        (a.amplitudes() - b.amplitudes()).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn default_parameters() {
        let p = params();
        assert!((p.omega - 2.0 * PI * 50e3).abs() < 1e-9);
        assert!((p.delta - 4.0 * p.omega).abs() < 1e-9);
        assert!((p.lambda() - p.omega / 16.0).abs() < 1e-9);
        assert!(PhysicalParams::new(1.0, 1.0, 2).is_err());
        assert!(p.with_delta_over_omega(1.5).unwrap().check_dispersive().is_err());
        assert!(p.check_dispersive().is_ok());
    }

    #[test]
    fn annihilation_action() {
        let s = CompositeSpace::new([4]).unwrap();
        let a = annihilation(4).unwrap();
        assert_eq!(a.apply(&StateVector::basis(&s, &[1])).unwrap(), StateVector::basis(&s, &[0]));
        assert_eq!(a.apply(&StateVector::basis(&s, &[0])).unwrap(), StateVector::zeros(&s));
        let n = number_operator(4).unwrap();
        for k in 0..4 {
            let v = n.apply(&StateVector::basis(&s, &[k])).unwrap();
            assert!(close(&v, &StateVector::basis(&s, &[k]).scaled(c(k as f64, 0.0)), 1e-14));
        }
    }

    #[test]
    fn embedded_annihilation_lowers_cavity() {
        let s = CompositeSpace::new([3, 3, 3]).unwrap();
        let a = cavity_operator(&s, &annihilation(3).unwrap()).unwrap();
        let out = a.apply(&StateVector::basis(&s, &[1, 0, 0])).unwrap();
        assert_eq!(out, StateVector::basis(&s, &[0, 0, 0]));
    }

    #[test]
    fn jc_matrix_elements() {
        let p = params();
        let h = jc_hamiltonian(&p, CONTROL_ATOM, &space()).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12);
        let z = h.entry(&[1, G.index(), 0], &[0, E.index(), 0]);
        assert!((z - c(0.0, p.omega / 2.0)).norm() < 1e-9);
        for n in 0..3 {
            for at in AtomLevel::ALL {
                let v = h.apply(&ket(n, I, at)).unwrap();
                assert_eq!(v.norm_squared(), 0.0);
            }
        }
    }

    #[test]
    fn pi_rabi_matches_encoding_map() {
        let u = rabi_propagator(&params(), CONTROL_ATOM, &space(), PI, false).unwrap();
        assert!((u.duration - 1e-5).abs() < 1e-12);
        let out = u.unitary.apply(&ket(1, G, G)).unwrap();
        assert!(close(&out, &ket(0, E, G).scaled(c(-1.0, 0.0)), 1e-10));
        let out = u.unitary.apply(&ket(0, E, G)).unwrap();
        assert!(close(&out, &ket(1, G, G), 1e-10));
    }

    #[test]
    fn two_pi_rabi_flips_sign() {
        let u = rabi_propagator(&params(), CONTROL_ATOM, &space(), 2.0 * PI, false).unwrap();
        let out = u.unitary.apply(&ket(1, G, E)).unwrap();
        assert!(close(&out, &ket(1, G, E).scaled(c(-1.0, 0.0)), 1e-10));
    }

    #[test]
    fn adjoint_rabi_inverts() {
        let p = params();
        let fwd = rabi_propagator(&p, CONTROL_ATOM, &space(), PI, false).unwrap();
        let back = rabi_propagator(&p, CONTROL_ATOM, &space(), PI, true).unwrap();
        let prod = back.unitary.compose(&fwd.unitary).unwrap();
        let id = OperatorMatrix::identity(&space());
        assert!(prod.add(&id.scale(-1.0)).unwrap().matrix().iter().all(|z| z.norm() < 1e-10));
        assert!(rabi_propagator(&p, CONTROL_ATOM, &space(), 0.0, false).is_err());
    }

    #[test]
    fn dispersive_matrix_elements() {
        let p = params();
        let l = p.lambda();
        let h = dispersive_hamiltonian(&p, CONTROL_ATOM, TARGET_ATOM, &space()).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12);
        let z = h.entry(&[0, I.index(), E.index()], &[0, I.index(), E.index()]);
        assert!((z - c(l, 0.0)).norm() < 1e-9 * l);
        let z = h.entry(&[1, G.index(), G.index()], &[1, G.index(), G.index()]);
        assert!((z - c(-2.0 * l, 0.0)).norm() < 1e-9 * l);
        for n in 0..3 {
            let z = h.entry(&[n, E.index(), G.index()], &[n, G.index(), E.index()]);
            assert!((z - c(l, 0.0)).norm() < 1e-9 * l);
        }
    }

    #[test]
    fn exchange_block_eigenphases() {
        // Oracle: the {|e_c g_t,0>, |g_c e_t,0>} block of H_e is λ[[1,1],[1,1]],
        // eigenvalues 0 and 2λ, so exp(-i H_e π/λ) is the identity on it.
        let p = params();
        let s = space();
        let h = dispersive_hamiltonian(&p, CONTROL_ATOM, TARGET_ATOM, &s).unwrap();
        let idx = [s.index_of(&[0, 1, 0]), s.index_of(&[0, 0, 1])];
        let block = nalgebra::DMatrix::from_fn(2, 2, |r, cc| h.matrix()[(idx[r], idx[cc])]);
        let eig = block.symmetric_eigenvalues();
        let mut vals: Vec<f64> = eig.iter().map(|v| v / p.lambda()).collect();
        vals.sort_by(f64::total_cmp);
        assert!(vals[0].abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);

        let u = collision_propagator(&p, CONTROL_ATOM, TARGET_ATOM, &s, p.collision_time()).unwrap();
        let out = u.apply(&ket(0, E, G)).unwrap();
        assert!(close(&out, &ket(0, E, G), 1e-9));
    }

    #[test]
    fn collision_flips_target_when_cavity_empty() {
        let p = params();
        let s = space();
        let u = collision_propagator(&p, CONTROL_ATOM, TARGET_ATOM, &s, p.collision_time()).unwrap();
        let plus = ket(0, I, G).add(&ket(0, I, E)).unwrap();
        let minus = ket(0, I, G).add(&ket(0, I, E).scaled(c(-1.0, 0.0))).unwrap();
        assert!(close(&u.apply(&plus).unwrap(), &minus, 1e-9));
        assert!(close(&u.apply(&minus).unwrap(), &plus, 1e-9));
    }

    #[test]
    fn collision_leaves_uncoupled_atoms_alone() {
        let p = params();
        let s = space();
        for t in [1e-6, 3.3e-5, p.collision_time()] {
            let u = collision_propagator(&p, CONTROL_ATOM, TARGET_ATOM, &s, t).unwrap();
            for n in 0..3 {
                assert!(close(&u.apply(&ket(n, I, I)).unwrap(), &ket(n, I, I), 1e-12));
            }
        }
        assert!(collision_propagator(&p, CONTROL_ATOM, TARGET_ATOM, &s, 0.0).is_err());
    }

    #[test]
    fn rig_swaps_g_and_i() {
        let s = space();
        let r = rig_pulse(CONTROL_ATOM, &s).unwrap();
        assert_eq!(r.apply(&ket(0, I, G)).unwrap(), ket(0, G, G));
        assert_eq!(r.apply(&ket(1, G, E)).unwrap(), ket(1, I, E));
        assert_eq!(r.apply(&ket(1, E, E)).unwrap(), ket(1, E, E));
        let twice = r.compose(&r).unwrap();
        assert_eq!(twice.matrix(), OperatorMatrix::identity(&s).matrix());
        let rot = rig_rotation(CONTROL_ATOM, &s, PI).unwrap();
        assert!(rot.add(&r.scale(-1.0)).unwrap().matrix().iter().all(|z| z.norm() < 1e-15));
        let id = rig_rotation(CONTROL_ATOM, &s, 0.0).unwrap();
        assert_eq!(id.matrix(), OperatorMatrix::identity(&s).matrix());
    }

    #[test]
    fn rge_prepares_superposition() {
        let s = space();
        let r = rge_pulse(TARGET_ATOM, &s, PI / 2.0, 0.0).unwrap();
        let out = r.apply(&ket(0, G, G)).unwrap();
        let expect = ket(0, G, G).add(&ket(0, G, E)).unwrap().scaled(c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(close(&out, &expect, 1e-15));
        assert_eq!(rge_pulse(TARGET_ATOM, &s, 0.0, 0.3).unwrap().matrix(), OperatorMatrix::identity(&s).matrix());
        for (th, ph) in [(0.3, 1.1), (2.9, -0.4), (PI, PI / 3.0)] {
            assert!(rge_pulse(TARGET_ATOM, &s, th, ph).unwrap().unitarity_defect() < 1e-10);
        }
    }

    #[test]
    fn full_model_at_zero_detuning_is_sum_of_jc() {
        let p = params();
        let s = space();
        let p0 = PhysicalParams { delta: 0.0, ..p };
        let full = full_detuned_hamiltonian(&p0, CONTROL_ATOM, TARGET_ATOM, &s).unwrap();
        let sum = jc_hamiltonian(&p, CONTROL_ATOM, &s)
            .unwrap()
            .add(&jc_hamiltonian(&p, TARGET_ATOM, &s).unwrap())
            .unwrap();
        assert!(full.add(&sum.scale(-1.0)).unwrap().matrix().iter().all(|z| z.norm() < 1e-9));
        assert!(full_detuned_hamiltonian(&p, CONTROL_ATOM, TARGET_ATOM, &s).unwrap().hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn second_order_shift_of_excited_control() {
        // |e_c i_t, 0> only couples to |g_c i_t, 1>; its dressed energy is the
        // eigenvalue of the full model closest to the bare value 0.
        let p = params();
        let s = space();
        let h = full_detuned_hamiltonian(&p, CONTROL_ATOM, TARGET_ATOM, &s).unwrap();
        let spec = HermitianSpectrum::new(&h).unwrap();
        let idx = s.index_of(&[0, E.index(), I.index()]);
        let (k, _) = spec
            .eigenvectors()
            .row(idx)
            .iter()
            .enumerate()
            .map(|(k, z)| (k, z.norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let shift = spec.eigenvalues()[k];
        let lambda = p.lambda();
        assert!((shift - lambda).abs() <= 0.1 * lambda, "shift {shift} vs {lambda}");
    }
}
