//! Dense complex linear algebra on small composite Hilbert spaces.
//!
//! Units follow ħ = 1: Hamiltonians are in rad/s and times in seconds, so a
//! propagator is `exp(-i H t)`.

mod density;
mod expm;
mod operator;
mod space;
mod state;

pub use density::{partial_trace, DensityMatrix};
pub use expm::{expm, BlockGenerator, BlockPropagator};
pub use operator::{
    embed_operator, propagator, HermitianSpectrum, OpTags, OperatorMatrix, SparseOperator,
};
pub use space::CompositeSpace;
pub use state::{state_fidelity, tensor_state, StateVector};

pub use num_complex::Complex64 as C64;

/// Tolerance on `|sum |amp|^2 - 1|` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-12;
/// Relative tolerance for the hermitian tag.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `max |U U† - I|` for the unitary tag.
pub const UNITARY_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    #[test]
    fn sigma_y_rotation_closed_form() {
        // H = (Ω/2) σy, t = π/Ω  =>  U = cos(π/2) I - i sin(π/2) σy = [[0, -1], [1, 0]]
        let omega = 2.0 * PI * 50e3;
        let space = CompositeSpace::new([2]).unwrap();
        let h = OperatorMatrix::new(
            space,
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -omega / 2.0), c(0.0, omega / 2.0), c(0.0, 0.0)]),
        )
        .unwrap()
        .into_hermitian()
        .unwrap();
        let u = propagator(&h, PI / omega).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(operator::max_abs_diff(u.matrix(), &expect) < 1e-12);
        assert!(u.tags().unitary);
    }
}
