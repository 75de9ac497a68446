use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor-product Hilbert space described by its subsystem dimensions.
///
/// The leftmost subsystem varies slowest in the flat index, so for dims
/// `(d0, d1, d2)` the basis state `|i0, i1, i2>` sits at
/// `i0 * d1 * d2 + i1 * d2 + i2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct CompositeSpace {
    dims: Vec<usize>,
}

impl CompositeSpace {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::InvalidSpace("no subsystems".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("subsystem dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim(&self, subsystem: usize) -> Result<usize> {
        self.dims.get(subsystem).copied().ok_or(Error::SubsystemIndex {
            index: subsystem,
            count: self.dims.len(),
        })
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &CompositeSpace) -> CompositeSpace {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        CompositeSpace { dims }
    }

    /// The space spanned by the listed subsystems, in the listed order.
    pub fn subspace(&self, subsystems: &[usize]) -> Result<CompositeSpace> {
        self.check_targets(subsystems)?;
        CompositeSpace::new(subsystems.iter().map(|&s| self.dims[s]).collect::<Vec<_>>())
    }

    /// Flat index of a multi-index. Panics if `digits` is out of range.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.dims.len(), "multi-index length");
        digits.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "digit {i} out of range for dimension {d}");
            acc * d + i
        })
    }

    /// Multi-index of a flat index.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (slot, &d) in digits.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    pub(crate) fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (k, &t) in targets.iter().enumerate() {
            if t >= self.dims.len() {
                return Err(Error::SubsystemIndex {
                    index: t,
                    count: self.dims.len(),
                });
            }
            if targets[..k].contains(&t) {
                return Err(Error::DuplicateSubsystem(t));
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for CompositeSpace {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        CompositeSpace::new(dims)
    }
}

impl From<CompositeSpace> for Vec<usize> {
    fn from(space: CompositeSpace) -> Self {
        space.dims
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let s = CompositeSpace::new([3, 3, 3]).unwrap();
        assert_eq!(s.total_dim(), 27);
        let s = CompositeSpace::new([4, 2]).unwrap();
        assert_eq!(s.total_dim(), 8);
    }

    #[test]
    fn rejects_small_or_empty() {
        assert!(CompositeSpace::new(Vec::<usize>::new()).is_err());
        assert!(CompositeSpace::new([3, 1]).is_err());
    }

    #[test]
    fn leftmost_varies_slowest() {
        let s = CompositeSpace::new([3, 3, 2]).unwrap();
        assert_eq!(s.index_of(&[0, 0, 1]), 1);
        assert_eq!(s.index_of(&[1, 0, 0]), 6);
        assert_eq!(s.index_of(&[2, 1, 1]), 2 * 6 + 2 + 1);
        for i in 0..s.total_dim() {
            assert_eq!(s.index_of(&s.digits_of(i)), i);
        }
    }

    #[test]
    fn targets_are_validated() {
        let s = CompositeSpace::new([2, 2]).unwrap();
        assert!(s.check_targets(&[0, 1]).is_ok());
        assert_eq!(s.check_targets(&[1, 1]), Err(Error::DuplicateSubsystem(1)));
        assert!(matches!(s.check_targets(&[2]), Err(Error::SubsystemIndex { .. })));
    }
}
