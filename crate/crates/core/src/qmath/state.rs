use nalgebra::DVector;

use super::{CompositeSpace, C64, NORM_TOL};
use crate::error::{Error, Result};

/// A ket on a composite space. Amplitudes are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: CompositeSpace,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(space: CompositeSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, amplitudes })
    }

    pub fn from_slice(space: CompositeSpace, amplitudes: &[C64]) -> Result<Self> {
        Self::new(space, DVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|digits>`.
    pub fn basis(space: &CompositeSpace, digits: &[usize]) -> Self {
        let mut amplitudes = DVector::zeros(space.total_dim());
        amplitudes[space.index_of(digits)] = C64::new(1.0, 0.0);
        Self {
            space: space.clone(),
            amplitudes,
        }
    }

    pub fn zeros(space: &CompositeSpace) -> Self {
        Self {
            space: space.clone(),
            amplitudes: DVector::zeros(space.total_dim()),
        }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> C64 {
        self.amplitudes[self.space.index_of(digits)]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// True when the squared norm is 1 within `1e-12`.
    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        self.amplitudes.unscale_mut(n);
        Ok(self)
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.amplitudes *= factor;
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.same_space(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        tensor_state(self, other)
    }

    pub(crate) fn same_space(&self, other: &StateVector) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.dims().to_vec(),
                right: other.space.dims().to_vec(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(space: CompositeSpace, amplitudes: DVector<C64>) -> Self {
        debug_assert_eq!(space.total_dim(), amplitudes.len());
        Self { space, amplitudes }
    }
}

/// `a ⊗ b` with `a`'s subsystems first.
pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    let nb = b.amplitudes.len();
    let amplitudes = DVector::from_fn(a.amplitudes.len() * nb, |i, _| {
        a.amplitudes[i / nb] * b.amplitudes[i % nb]
    });
    StateVector {
        space: a.space.tensor(&b.space),
        amplitudes,
    }
}

/// `|<psi|phi>|^2`, clamped to `[0, 1]`.
pub fn state_fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    if !psi.is_normalized() {
        return Err(Error::NotNormalized(psi.norm_squared()));
    }
    if !phi.is_normalized() {
        return Err(Error::NotNormalized(phi.norm_squared()));
    }
    Ok(psi.inner(phi)?.norm_sqr().clamp(0.0, 1.0))
}
