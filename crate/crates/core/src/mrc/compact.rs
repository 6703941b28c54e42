use std::ops::Range;

use nalgebra::DVector;

use super::{MrcSpec, Structure};
use crate::conic::{self, Affine, ConicProgram, Terms};
use crate::error::{Error, Result};
use crate::model::{ConstraintRow, CoverageStrategy, MrcSolution, RobustProblem, UncertaintySet};

/// Where each block of the compact program lives in its variable vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactLayout {
    pub u: Range<usize>,
    /// One recourse block per pole.
    pub v: Vec<Range<usize>>,
    /// Per-row multipliers of the set description (polytope rows, or the
    /// scaled norm vector for ellipsoids).
    pub eta: Vec<Range<usize>>,
    /// Per-row multipliers of the shadow coupling `Σλω = Pξ`.
    pub sigma: Vec<Range<usize>>,
}

impl CompactLayout {
    fn new(
        p: &mut ConicProgram,
        problem: &RobustProblem,
        poles: usize,
        eta_len: usize,
        n0: usize,
    ) -> Self {
        let u = p.add_vars(problem.first_stage_dim());
        let v = (0..poles)
            .map(|_| p.add_vars(problem.recourse_dim()))
            .collect();
        let mut eta = Vec::new();
        let mut sigma = Vec::new();
        for _ in 0..problem.row_count() {
            eta.push(p.add_vars(eta_len));
            sigma.push(p.add_vars(n0));
        }
        Self { u, v, eta, sigma }
    }

    pub fn extract(
        &self,
        x: &[f64],
        problem: &RobustProblem,
        iterations: usize,
        coverage: CoverageStrategy,
    ) -> MrcSolution {
        let first_stage = DVector::from_column_slice(&x[self.u.clone()]);
        MrcSolution {
            objective: problem.first_stage_cost.dot(&first_stage),
            first_stage,
            pole_recourses: self
                .v
                .iter()
                .map(|r| DVector::from_column_slice(&x[r.clone()]))
                .collect(),
            iterations,
            coverage,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompactProgram {
    pub program: ConicProgram,
    pub layout: CompactLayout,
}

fn objective(problem: &RobustProblem, layout: &CompactLayout) -> Terms {
    layout
        .u
        .clone()
        .zip(problem.first_stage_cost.iter())
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect()
}

fn push(terms: &mut Terms, j: usize, a: f64) {
    if a != 0.0 {
        terms.push((j, a));
    }
}

/// `V_i·v_k` terms.
fn recourse_terms(problem: &RobustProblem, i: usize, v: &Range<usize>, terms: &mut Terms) {
    for (j, col) in v.clone().enumerate() {
        push(terms, col, problem.recourse_matrix[(i, j)]);
    }
}

/// Terms of `coef·lhs_nominal·u`.
fn nominal_terms(row: &ConstraintRow, u: &Range<usize>, coef: f64, terms: &mut Terms) {
    for (j, col) in u.clone().enumerate() {
        push(terms, col, coef * row.lhs_nominal[j]);
    }
}

pub(crate) fn compact_polytope(st: &Structure<'_>) -> Result<CompactProgram> {
    let poly = st
        .set
        .as_polytope()
        .ok_or_else(|| Error::Invalid("polytope compact form needs a polytope or box".into()))?;
    let (c, d) = (poly.constraint_matrix(), poly.rhs());
    let problem = st.problem;
    let (dim, n0, n_d) = (st.set.dim(), st.n0(), c.nrows());
    let mut p = ConicProgram::new();
    let layout = CompactLayout::new(&mut p, problem, st.poles.len(), n_d, n0);
    p.set_objective(objective(problem, &layout));

    for (i, row) in problem.rows.iter().enumerate() {
        let (eta, sigma) = (&layout.eta[i], &layout.sigma[i]);
        for e in eta.clone() {
            p.add_ge(vec![(e, 1.0)], 0.0);
        }
        // Cᵀη − Pᵀσ = lhs_uncertainᵀ·u − rhs_uncertain
        for k in 0..dim {
            let mut t = Terms::new();
            for (r, e) in eta.clone().enumerate() {
                push(&mut t, e, c[(r, k)]);
            }
            for (l, s) in sigma.clone().enumerate() {
                push(&mut t, s, -st.shadow[(l, k)]);
            }
            for (j, col) in layout.u.clone().enumerate() {
                push(&mut t, col, -row.lhs_uncertain[(j, k)]);
            }
            p.add_eq(t, -row.rhs_uncertain[k]);
        }
        // d·η + lhs_nominal·u + V_i·v_ω − ω·σ <= rhs_nominal
        for (w, v) in st.poles.iter().zip(&layout.v) {
            let mut t = Terms::new();
            for (r, e) in eta.clone().enumerate() {
                push(&mut t, e, d[r]);
            }
            nominal_terms(row, &layout.u, 1.0, &mut t);
            recourse_terms(problem, i, v, &mut t);
            for (l, s) in sigma.clone().enumerate() {
                push(&mut t, s, -w[l]);
            }
            p.add_le(t, row.rhs_nominal);
        }
    }
    Ok(CompactProgram { program: p, layout })
}

pub(crate) fn compact_ellipsoid(st: &Structure<'_>) -> Result<CompactProgram> {
    let UncertaintySet::Ellipsoid(e) = st.set else {
        return Err(Error::Invalid(
            "ellipsoid compact form needs an ellipsoid".into(),
        ));
    };
    let problem = st.problem;
    let (dim, n0) = (e.dim(), st.n0());
    let (center, rho, m) = (e.center(), e.radius(), e.shape());
    let p_center = &st.shadow * center;
    let mut p = ConicProgram::new();
    let layout = CompactLayout::new(&mut p, problem, st.poles.len(), dim, n0);
    p.set_objective(objective(problem, &layout));

    for (i, row) in problem.rows.iter().enumerate() {
        let (eta, sigma) = (&layout.eta[i], &layout.sigma[i]);
        // η = ρ·Mᵀ(lhs_uncertainᵀ·u − rhs_uncertain + Pᵀσ)
        for r in 0..dim {
            let mut t = vec![(eta.start + r, 1.0)];
            // (ρMᵀ)_{r,k} = ρ·M_{k,r}
            for (j, col) in layout.u.clone().enumerate() {
                let a: f64 = (0..dim)
                    .map(|k| m[(k, r)] * row.lhs_uncertain[(j, k)])
                    .sum();
                push(&mut t, col, -rho * a);
            }
            for (l, s) in sigma.clone().enumerate() {
                let a: f64 = (0..dim).map(|k| m[(k, r)] * st.shadow[(l, k)]).sum();
                push(&mut t, s, -rho * a);
            }
            let b: f64 = (0..dim).map(|k| m[(k, r)] * row.rhs_uncertain[k]).sum();
            p.add_eq(t, -rho * b);
        }
        let norm: Vec<Affine> = eta
            .clone()
            .map(|e| Affine::new(vec![(e, 1.0)], 0.0))
            .collect();
        // rhs_nominal − lhs_nominal·u − g(u)·ξ̄ − σ·Pξ̄ − V_i·v_ω + ω·σ
        let lhs_c = &row.lhs_uncertain * center;
        let base_const = row.rhs_nominal + row.rhs_uncertain.dot(center);
        for (w, v) in st.poles.iter().zip(&layout.v) {
            let mut t = Terms::new();
            for (j, col) in layout.u.clone().enumerate() {
                push(&mut t, col, -row.lhs_nominal[j] - lhs_c[j]);
            }
            for (l, s) in sigma.clone().enumerate() {
                push(&mut t, s, w[l] - p_center[l]);
            }
            for (j, col) in v.clone().enumerate() {
                push(&mut t, col, -problem.recourse_matrix[(i, j)]);
            }
            p.add_soc(norm.clone(), Affine::new(t, base_const));
        }
    }
    Ok(CompactProgram { program: p, layout })
}

/// Compact dual of the counterpart over a polytope (boxes are lowered to
/// `[I; −I]·ξ <= [u; −l]`).
pub fn build_compact_polytope(spec: &MrcSpec) -> Result<CompactProgram> {
    compact_polytope(&spec.structure())
}

/// Compact second-order-cone dual of the counterpart over an ellipsoid.
pub fn build_compact_ellipsoid(spec: &MrcSpec) -> Result<CompactProgram> {
    compact_ellipsoid(&spec.structure())
}

pub fn build_compact(spec: &MrcSpec) -> Result<CompactProgram> {
    build_for(&spec.structure())
}

pub(crate) fn build_for(st: &Structure<'_>) -> Result<CompactProgram> {
    match st.set {
        UncertaintySet::Ellipsoid(_) => compact_ellipsoid(st),
        _ => compact_polytope(st),
    }
}

pub(crate) fn solve_structure(st: &Structure<'_>, accuracy: f64) -> Result<MrcSolution> {
    let cp = build_for(st)?;
    let r = conic::solve_optimal(&cp.program, accuracy, "robust counterpart")?;
    Ok(cp.layout.extract(r.primal()?, st.problem, 1, st.coverage))
}

pub fn solve_compact(spec: &MrcSpec, accuracy: f64) -> Result<MrcSolution> {
    solve_structure(&spec.structure(), accuracy)
}
