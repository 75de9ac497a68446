use nalgebra::DMatrix;

use super::operator::max_abs_diff;
use super::{CompositeSpace, OperatorMatrix, StateVector, C64};
use crate::error::{Error, Result};

const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
const DENSITY_TRACE_TOL: f64 = 1e-10;
const DENSITY_PSD_TOL: f64 = 1e-10;

/// Mixed state on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: CompositeSpace,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(space: CompositeSpace, entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_parts(space, entries)?;
        rho.check(DENSITY_TRACE_TOL, DENSITY_PSD_TOL)?;
        Ok(rho)
    }

    /// Shape and finiteness checks only.
    pub(crate) fn from_parts(space: CompositeSpace, entries: DMatrix<C64>) -> Result<Self> {
        let n = space.total_dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.nrows(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, entries })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        Self {
            space: psi.space().clone(),
            entries: v * v.adjoint(),
        }
    }

    /// Checks the density-matrix invariants with the given trace and
    /// positivity tolerances.
    pub fn check(&self, trace_tol: f64, psd_tol: f64) -> Result<()> {
        let herm = max_abs_diff(&self.entries, &self.entries.adjoint());
        if herm > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("hermiticity defect {herm:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -psd_tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_part(&self.entries).symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `<psi| rho |psi>`.
    pub fn population(&self, psi: &StateVector) -> Result<f64> {
        self.same_space(psi.space())?;
        Ok(psi.amplitudes().dotc(&(&self.entries * psi.amplitudes())).re)
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        self.same_space(op.space())?;
        Ok((&self.entries * op.matrix()).trace())
    }

    /// `U rho U†`.
    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Result<Self> {
        self.same_space(u.space())?;
        Ok(Self {
            space: self.space.clone(),
            entries: u.matrix() * &self.entries * u.matrix().adjoint(),
        })
    }

    /// Half the trace norm of `self - other`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_space(&other.space)?;
        let diff = hermitian_part(&(&self.entries - &other.entries));
        Ok(0.5 * diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
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

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Reduced state on the `keep` subsystems (in the listed order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    space.check_targets(keep)?;
    let reduced = space.subspace(keep)?;
    let traced: Vec<usize> = (0..space.num_subsystems()).filter(|s| !keep.contains(s)).collect();
    let n = space.total_dim();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| space.digits_of(i)).collect();
    let kept_index: Vec<usize> = digits
        .iter()
        .map(|d| keep.iter().fold(0, |acc, &s| acc * space.dims()[s] + d[s]))
        .collect();

    let m = reduced.total_dim();
    let mut out = DMatrix::zeros(m, m);
    for r in 0..n {
        for c in 0..n {
            if traced.iter().all(|&s| digits[r][s] == digits[c][s]) {
                out[(kept_index[r], kept_index[c])] += rho.matrix()[(r, c)];
            }
        }
    }
    DensityMatrix::from_parts(reduced, out)
}

impl StateVector {
    /// Reduced density matrix of a pure state.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(&DensityMatrix::from_pure(self), keep)
    }
}
