//! JSON documents for problem instances and pole-sets. Matrices are row-major
//! arrays of arrays.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ConstraintRow, PoleSet, RobustProblem, ShadowMatrix, UncertaintySet};
use crate::error::{Error, Result};

type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RowDoc {
    lhs_nominal: Vec<f64>,
    lhs_uncertain: Rows,
    rhs_nominal: f64,
    rhs_uncertain: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum UncertaintyDoc {
    Polytope {
        c: Rows,
        d: Vec<f64>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ellipsoid {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<Rows>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceDoc {
    first_stage_cost: Vec<f64>,
    recourse_matrix: Rows,
    rows: Vec<RowDoc>,
    uncertainty: UncertaintyDoc,
    shadow: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poles: Option<Rows>,
}

/// A problem with its uncertainty set, shadow matrix and optional poles.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub problem: RobustProblem,
    pub uncertainty: UncertaintySet,
    pub shadow: ShadowMatrix,
    pub poles: Option<PoleSet>,
}

/// `rows × cols` matrix from row-major nested arrays; `cols` is needed when
/// there are no rows to infer it from.
pub fn matrix_from_rows(rows: &[Vec<f64>], cols: Option<usize>) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map(|r| r.len()).or(cols).unwrap_or(0);
    if let Some(r) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!(
            "matrix row {r} has {} entries, expected {ncols}",
            rows[r].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        let uncertainty = match doc.uncertainty {
            UncertaintyDoc::Polytope { c, d } => {
                UncertaintySet::polytope(matrix_from_rows(&c, None)?, DVector::from_vec(d))?
            }
            UncertaintyDoc::Box { lower, upper } => {
                UncertaintySet::boxed(DVector::from_vec(lower), DVector::from_vec(upper))?
            }
            UncertaintyDoc::Ellipsoid {
                center,
                radius,
                shape,
            } => {
                let n = center.len();
                let shape = match shape {
                    Some(s) => matrix_from_rows(&s, Some(n))?,
                    None => DMatrix::identity(n, n),
                };
                UncertaintySet::ellipsoid(DVector::from_vec(center), radius, shape)?
            }
        };
        let dim = uncertainty.dim();
        let rows = doc
            .rows
            .into_iter()
            .map(|r| {
                Ok(ConstraintRow {
                    lhs_nominal: DVector::from_vec(r.lhs_nominal),
                    lhs_uncertain: if r.lhs_uncertain.is_empty() {
                        DMatrix::zeros(0, dim)
                    } else {
                        matrix_from_rows(&r.lhs_uncertain, Some(dim))?
                    },
                    rhs_nominal: r.rhs_nominal,
                    rhs_uncertain: DVector::from_vec(r.rhs_uncertain),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let recourse = matrix_from_rows(&doc.recourse_matrix, Some(0))?;
        let problem =
            RobustProblem::new(DVector::from_vec(doc.first_stage_cost), recourse, rows, dim)?;
        let shadow = ShadowMatrix::new(matrix_from_rows(&doc.shadow, None)?)?;
        if shadow.cols() != dim {
            return Err(Error::Dimension(format!(
                "shadow has {} columns, uncertainty dim is {dim}",
                shadow.cols()
            )));
        }
        let poles = doc.poles.map(PoleSet::from_rows).transpose()?;
        if let Some(p) = &poles {
            if p.dim() != shadow.rows() {
                return Err(Error::Dimension(format!(
                    "poles have dimension {}, shadow has {} rows",
                    p.dim(),
                    shadow.rows()
                )));
            }
        }
        Ok(Self {
            problem,
            uncertainty,
            shadow,
            poles,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let uncertainty = match &self.uncertainty {
            UncertaintySet::Polytope(p) => UncertaintyDoc::Polytope {
                c: matrix_to_rows(p.constraint_matrix()),
                d: vec_of(p.rhs()),
            },
            UncertaintySet::Box(b) => UncertaintyDoc::Box {
                lower: vec_of(b.lower()),
                upper: vec_of(b.upper()),
            },
            UncertaintySet::Ellipsoid(e) => UncertaintyDoc::Ellipsoid {
                center: vec_of(e.center()),
                radius: e.radius(),
                shape: (!e.is_ball()).then(|| matrix_to_rows(e.shape())),
            },
        };
        let doc = InstanceDoc {
            first_stage_cost: vec_of(&self.problem.first_stage_cost),
            recourse_matrix: matrix_to_rows(&self.problem.recourse_matrix),
            rows: self
                .problem
                .rows
                .iter()
                .map(|r| RowDoc {
                    lhs_nominal: vec_of(&r.lhs_nominal),
                    lhs_uncertain: matrix_to_rows(&r.lhs_uncertain),
                    rhs_nominal: r.rhs_nominal,
                    rhs_uncertain: vec_of(&r.rhs_uncertain),
                })
                .collect(),
            uncertainty,
            shadow: matrix_to_rows(self.shadow.matrix()),
            poles: self.poles.as_ref().map(PoleSet::to_rows),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

pub fn poles_from_json(text: &str) -> Result<PoleSet> {
    PoleSet::from_rows(serde_json::from_str(text)?)
}

pub fn poles_to_json(p: &PoleSet) -> Result<String> {
    Ok(serde_json::to_string(&p.to_rows())?)
}

pub fn load_poles(path: impl AsRef<Path>) -> Result<PoleSet> {
    poles_from_json(&fs::read_to_string(path)?)
}

pub fn save_poles(p: &PoleSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, poles_to_json(p)?)?;
    Ok(())
}
