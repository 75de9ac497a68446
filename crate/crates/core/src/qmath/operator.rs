use nalgebra::{DMatrix, DVector};

use super::{CompositeSpace, StateVector, C64, HERMITIAN_TOL, UNITARY_TOL};
use crate::error::{Error, Result};

/// Properties asserted on an operator at construction time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpTags {
    pub hermitian: bool,
    pub unitary: bool,
}

/// Dense square operator on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: CompositeSpace,
    entries: DMatrix<C64>,
    tags: OpTags,
}

impl OperatorMatrix {
    pub fn new(space: CompositeSpace, entries: DMatrix<C64>) -> Result<Self> {
        let n = space.total_dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            space,
            entries,
            tags: OpTags::default(),
        })
    }

    pub fn identity(space: &CompositeSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            entries: DMatrix::identity(n, n),
            tags: OpTags {
                hermitian: true,
                unitary: true,
            },
        }
    }

    pub fn zeros(space: &CompositeSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            entries: DMatrix::zeros(n, n),
            tags: OpTags {
                hermitian: true,
                unitary: false,
            },
        }
    }

    /// `|ket><bra|` on a single subsystem of dimension `dim`.
    pub fn outer(dim: usize, ket: usize, bra: usize) -> Result<Self> {
        let space = CompositeSpace::new([dim])?;
        let mut entries = DMatrix::zeros(dim, dim);
        entries[(ket, bra)] = C64::new(1.0, 0.0);
        Self::new(space, entries)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn tags(&self) -> OpTags {
        self.tags
    }

    pub fn entry(&self, row: &[usize], col: &[usize]) -> C64 {
        self.entries[(self.space.index_of(row), self.space.index_of(col))]
    }

    /// Largest entrywise deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.entries, &self.entries.adjoint())
    }

    /// Largest entrywise deviation of `U U†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.entries.nrows();
        max_abs_diff(&(&self.entries * self.entries.adjoint()), &DMatrix::identity(n, n))
    }

    /// Verifies hermiticity (relative to the largest entry) and tags the operator.
    /// The stored matrix is replaced by its hermitian part so the tag holds exactly.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let scale = self.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        self.entries = (&self.entries + self.entries.adjoint()).scale(0.5);
        self.tags.hermitian = true;
        Ok(self)
    }

    pub fn into_unitary(mut self) -> Result<Self> {
        let defect = self.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        self.tags.unitary = true;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            entries: self.entries.adjoint(),
            tags: self.tags,
        }
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.same_space(&rhs.space)?;
        Ok(Self {
            space: self.space.clone(),
            entries: &self.entries * &rhs.entries,
            tags: OpTags {
                hermitian: false,
                unitary: self.tags.unitary && rhs.tags.unitary,
            },
        })
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.same_space(&rhs.space)?;
        Ok(Self {
            space: self.space.clone(),
            entries: &self.entries + &rhs.entries,
            tags: OpTags {
                hermitian: self.tags.hermitian && rhs.tags.hermitian,
                unitary: false,
            },
        })
    }

    /// Multiplies by a real factor; hermiticity survives, unitarity does not.
    pub fn scale(&self, factor: f64) -> Self {
        Self {
            space: self.space.clone(),
            entries: self.entries.scale(factor),
            tags: OpTags {
                hermitian: self.tags.hermitian,
                unitary: false,
            },
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.same_space(psi.space())?;
        Ok(StateVector::from_parts_unchecked(
            self.space.clone(),
            &self.entries * psi.amplitudes(),
        ))
    }

    /// `self ⊗ rhs` with `self`'s subsystems first.
    pub fn kron(&self, rhs: &OperatorMatrix) -> Self {
        Self {
            space: self.space.tensor(&rhs.space),
            entries: self.entries.kronecker(&rhs.entries),
            tags: OpTags {
                hermitian: self.tags.hermitian && rhs.tags.hermitian,
                unitary: self.tags.unitary && rhs.tags.unitary,
            },
        }
    }

    /// `<psi| self |psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        self.same_space(psi.space())?;
        Ok(psi.amplitudes().dotc(&(&self.entries * psi.amplitudes())))
    }

    fn same_space(&self, other: &CompositeSpace) -> Result<()> {
        if &self.space != other {
            return Err(Error::SpaceMismatch {
                left: self.space.dims().to_vec(),
                right: other.dims().to_vec(),
            });
        }
        Ok(())
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Lifts `op` (acting on `targets`, in the listed order) to the full space,
/// acting as the identity on every other subsystem.
pub fn embed_operator(
    space: &CompositeSpace,
    targets: &[usize],
    op: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    space.check_targets(targets)?;
    let local = space.subspace(targets)?;
    if local.total_dim() != op.space().total_dim() {
        return Err(Error::DimensionMismatch {
            expected: local.total_dim(),
            found: op.space().total_dim(),
        });
    }
    let n = space.total_dim();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| space.digits_of(i)).collect();
    let local_index = |d: &[usize]| targets.iter().fold(0, |acc, &t| acc * space.dims()[t] + d[t]);
    let rest: Vec<usize> = (0..space.num_subsystems()).filter(|s| !targets.contains(s)).collect();
    let locals: Vec<usize> = digits.iter().map(|d| local_index(d)).collect();

    let mut entries = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            if rest.iter().all(|&s| digits[r][s] == digits[c][s]) {
                entries[(r, c)] = op.matrix()[(locals[r], locals[c])];
            }
        }
    }
    Ok(OperatorMatrix {
        space: space.clone(),
        entries,
        tags: op.tags(),
    })
}

/// Eigendecomposition `H = V diag(E) V†` of a hermitian operator, cached so
/// that `exp(-iHt)` can be produced or applied for any `t`.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    space: CompositeSpace,
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianSpectrum {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if !h.tags().hermitian {
            return Err(Error::NotHermitian(h.hermiticity_defect()));
        }
        let eig = h.matrix().clone().symmetric_eigen();
        Ok(Self {
            space: h.space().clone(),
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn propagator(&self, t: f64) -> OperatorMatrix {
        let phases = self.values.map(|e| C64::from_polar(1.0, -e * t));
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        OperatorMatrix {
            space: self.space.clone(),
            entries: scaled * self.vectors.adjoint(),
            tags: OpTags {
                hermitian: false,
                unitary: true,
            },
        }
    }

    /// `exp(-iHt) psi` without forming the propagator.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.space() != &self.space {
            return Err(Error::SpaceMismatch {
                left: self.space.dims().to_vec(),
                right: psi.space().dims().to_vec(),
            });
        }
        let mut coeffs = self.vectors.ad_mul(psi.amplitudes());
        for (c, &e) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        Ok(StateVector::from_parts_unchecked(
            self.space.clone(),
            &self.vectors * coeffs,
        ))
    }
}

/// `exp(-iHt)` for a hermitian-tagged `H` (ħ = 1, `H` in rad/s, `t` in s).
pub fn propagator(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    Ok(HermitianSpectrum::new(h)?.propagator(t))
}

/// Operator stored as its nonzero entries, for repeated products with dense
/// density matrices.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let z = m[(r, c)];
                if z != C64::new(0.0, 0.0) {
                    entries.push((r, c, z));
                }
            }
        }
        Self {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Accumulates `factor · self · rho` into `out`.
    pub fn left_mul_acc(&self, rho: &DMatrix<C64>, factor: C64, out: &mut DMatrix<C64>) {
        for &(r, k, z) in &self.entries {
            let zf = z * factor;
            for c in 0..self.dim {
                out[(r, c)] += zf * rho[(k, c)];
            }
        }
    }

    /// Accumulates `factor · rho · self` into `out`.
    pub fn right_mul_acc(&self, rho: &DMatrix<C64>, factor: C64, out: &mut DMatrix<C64>) {
        for &(k, c, z) in &self.entries {
            let zf = z * factor;
            for r in 0..self.dim {
                out[(r, c)] += rho[(r, k)] * zf;
            }
        }
    }

    pub fn left_mul(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, rho.ncols());
        self.left_mul_acc(rho, C64::new(1.0, 0.0), &mut out);
        out
    }
}
