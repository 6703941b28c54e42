use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One uncertain constraint row
/// `(lhs_nominal + lhs_uncertain·ξ)·u + V_i·v <= rhs_nominal + rhs_uncertain·ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub lhs_nominal: DVector<f64>,
    /// `n_u × uncertainty_dim`.
    pub lhs_uncertain: DMatrix<f64>,
    pub rhs_nominal: f64,
    pub rhs_uncertain: DVector<f64>,
}

impl ConstraintRow {
    /// Row with no dependence on ξ.
    pub fn certain(lhs: DVector<f64>, rhs: f64, uncertainty_dim: usize) -> Self {
        let n_u = lhs.len();
        Self {
            lhs_nominal: lhs,
            lhs_uncertain: DMatrix::zeros(n_u, uncertainty_dim),
            rhs_nominal: rhs,
            rhs_uncertain: DVector::zeros(uncertainty_dim),
        }
    }

    pub fn lhs_at(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.lhs_nominal + &self.lhs_uncertain * xi
    }

    pub fn rhs_at(&self, xi: &DVector<f64>) -> f64 {
        self.rhs_nominal + self.rhs_uncertain.dot(xi)
    }

    /// Coefficient vector of ξ in `lhs(ξ)·u − rhs(ξ)`, i.e. `lhs_uncertainᵀ·u − rhs_uncertain`.
    pub fn xi_gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        self.lhs_uncertain.tr_mul(u) - &self.rhs_uncertain
    }

    /// Part of `lhs(ξ)·u − rhs(ξ)` that does not depend on ξ.
    pub fn offset(&self, u: &DVector<f64>) -> f64 {
        self.lhs_nominal.dot(u) - self.rhs_nominal
    }

    pub fn is_certain(&self) -> bool {
        self.lhs_uncertain.iter().all(|&x| x == 0.0) && self.rhs_uncertain.iter().all(|&x| x == 0.0)
    }
}

/// Two-stage LP `min c·u` subject to every [`ConstraintRow`] for all ξ in the
/// uncertainty set, with recourse `v` entering through the certain matrix `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustProblem {
    pub first_stage_cost: DVector<f64>,
    /// `m × n_v`.
    pub recourse_matrix: DMatrix<f64>,
    pub rows: Vec<ConstraintRow>,
    pub uncertainty_dim: usize,
}

impl RobustProblem {
    pub fn new(
        first_stage_cost: DVector<f64>,
        recourse_matrix: DMatrix<f64>,
        rows: Vec<ConstraintRow>,
        uncertainty_dim: usize,
    ) -> Result<Self> {
        let p = Self {
            first_stage_cost,
            recourse_matrix,
            rows,
            uncertainty_dim,
        };
        validate_problem(&p).map_err(Error::Validation)?;
        Ok(p)
    }

    /// Builds the block layout in which ξ stacks, per row, an additive
    /// perturbation of `[U_i, b_i]` (block size `n_u + 1`).
    pub fn with_block_uncertainty(
        first_stage_cost: DVector<f64>,
        recourse_matrix: DMatrix<f64>,
        nominal_lhs: &DMatrix<f64>,
        nominal_rhs: &DVector<f64>,
    ) -> Result<Self> {
        let m = nominal_lhs.nrows();
        let n_u = nominal_lhs.ncols();
        if nominal_rhs.len() != m {
            return Err(Error::Dimension(format!(
                "nominal rhs has {} entries for {m} rows",
                nominal_rhs.len()
            )));
        }
        let block = n_u + 1;
        let dim = m * block;
        let rows = (0..m)
            .map(|i| {
                let mut lhs_uncertain = DMatrix::zeros(n_u, dim);
                for j in 0..n_u {
                    lhs_uncertain[(j, i * block + j)] = 1.0;
                }
                let mut rhs_uncertain = DVector::zeros(dim);
                rhs_uncertain[i * block + n_u] = 1.0;
                ConstraintRow {
                    lhs_nominal: nominal_lhs.row(i).transpose(),
                    lhs_uncertain,
                    rhs_nominal: nominal_rhs[i],
                    rhs_uncertain,
                }
            })
            .collect();
        Self::new(first_stage_cost, recourse_matrix, rows, dim)
    }

    pub fn first_stage_dim(&self) -> usize {
        self.first_stage_cost.len()
    }

    pub fn recourse_dim(&self) -> usize {
        self.recourse_matrix.ncols()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// `lhs_i(ξ)·u + V_i·v − rhs_i(ξ)`; positive means violated.
    pub fn row_slack(
        &self,
        i: usize,
        u: &DVector<f64>,
        v: &DVector<f64>,
        xi: &DVector<f64>,
    ) -> f64 {
        let row = &self.rows[i];
        row.lhs_at(xi).dot(u) + self.recourse_matrix.row(i).transpose().dot(v) - row.rhs_at(xi)
    }

    pub fn max_violation(&self, u: &DVector<f64>, v: &DVector<f64>, xi: &DVector<f64>) -> f64 {
        (0..self.row_count())
            .map(|i| self.row_slack(i, u, v, xi))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Collects every dimension mismatch in `p`; `Ok` when all invariants hold.
pub fn validate_problem(p: &RobustProblem) -> std::result::Result<(), Vec<String>> {
    let mut errs = Vec::new();
    let n_u = p.first_stage_cost.len();
    let dim = p.uncertainty_dim;
    if p.rows.is_empty() {
        errs.push("problem has no constraint rows".to_string());
    }
    if p.recourse_matrix.nrows() != p.rows.len() {
        errs.push(format!(
            "recourse rows: matrix has {} rows but problem has {} constraint rows",
            p.recourse_matrix.nrows(),
            p.rows.len()
        ));
    }
    for (i, row) in p.rows.iter().enumerate() {
        if row.lhs_nominal.len() != n_u {
            errs.push(format!(
                "row {i}: lhs_nominal has length {} (first-stage dim {n_u})",
                row.lhs_nominal.len()
            ));
        }
        if row.lhs_uncertain.nrows() != n_u {
            errs.push(format!(
                "row {i}: lhs_uncertain has {} rows (first-stage dim {n_u})",
                row.lhs_uncertain.nrows()
            ));
        }
        if row.lhs_uncertain.ncols() != dim {
            errs.push(format!(
                "row {i}: uncertainty dim of lhs_uncertain is {} (expected {dim})",
                row.lhs_uncertain.ncols()
            ));
        }
        if row.rhs_uncertain.len() != dim {
            errs.push(format!(
                "row {i}: uncertainty dim of rhs_uncertain is {} (expected {dim})",
                row.rhs_uncertain.len()
            ));
        }
        let finite = row
            .lhs_nominal
            .iter()
            .chain(row.lhs_uncertain.iter())
            .chain(row.rhs_uncertain.iter())
            .all(|x| x.is_finite())
            && row.rhs_nominal.is_finite();
        if !finite {
            errs.push(format!("row {i}: non-finite coefficient"));
        }
    }
    if p.first_stage_cost
        .iter()
        .chain(p.recourse_matrix.iter())
        .any(|x| !x.is_finite())
    {
        errs.push("non-finite cost or recourse coefficient".to_string());
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}
