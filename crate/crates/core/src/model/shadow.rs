use nalgebra::{DMatrix, DVector};

use crate::error::{dim_check, Error, Result};

/// Full-row-rank linear map from ξ-space to the observed (shadow) space.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowMatrix {
    entries: DMatrix<f64>,
}

impl ShadowMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid(
                "shadow matrix needs at least one row and one column".into(),
            ));
        }
        if rows > cols {
            return Err(Error::Invalid(format!(
                "shadow matrix {rows}x{cols} cannot have full row rank"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid(
                "shadow matrix has non-finite entries".into(),
            ));
        }
        let sv = entries.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > 1e-10 * smax.max(1.0)).count();
        if rank < rows {
            return Err(Error::Invalid(format!(
                "shadow matrix has rank {rank}, needs {rows}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    /// Observes the first `n0` coordinates of a `dim`-vector.
    pub fn coordinate_projection(n0: usize, dim: usize) -> Result<Self> {
        if n0 == 0 || n0 > dim {
            return Err(Error::Invalid(format!(
                "coordinate projection needs 1 <= n0 <= {dim}, got {n0}"
            )));
        }
        Ok(Self {
            entries: DMatrix::identity(n0, dim),
        })
    }

    /// Observed dimension `n₀`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Uncertainty dimension.
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.rows() == self.cols() && self.entries == DMatrix::identity(self.rows(), self.cols())
    }

    pub fn apply(&self, xi: &DVector<f64>) -> Result<DVector<f64>> {
        dim_check("shadow input", self.cols(), xi.len())?;
        Ok(&self.entries * xi)
    }

    /// `Pᵀ·a`, the pull-back of a shadow-space direction.
    pub fn pull_back(&self, a: &DVector<f64>) -> Result<DVector<f64>> {
        dim_check("shadow direction", self.rows(), a.len())?;
        Ok(self.entries.tr_mul(a))
    }
}
