use std::ops::Range;

use nalgebra::DVector;
use rayon::prelude::*;

use super::{MrcSpec, SolveOptions, Structure};
use crate::conic::{self, Affine, ConicProgram, Status, Terms};
use crate::error::{dim_check, Error, Result};
use crate::model::{convex_weights, MrcSolution, UncertaintySet};

/// Worst scenario and weights found for one constraint row.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationResult {
    pub row_index: usize,
    /// `lhs(ξ*)·u + V_i·Σλ*v − rhs(ξ*)`; positive means the candidate is cut off.
    pub violation: f64,
    pub scenario: DVector<f64>,
    pub weights: DVector<f64>,
}

/// Feasible region `{(ξ, λ) : ξ ∈ Ξ, λ ∈ Δ, Σλω = Pξ}` as a conic program.
/// Ellipsoids are parametrized by `s` with `ξ = ξ̄ + ρ·M·s`.
struct JointRegion {
    program: ConicProgram,
    x: Range<usize>,
    lambda: Range<usize>,
}

impl JointRegion {
    fn new(st: &Structure<'_>) -> Self {
        let dim = st.set.dim();
        let k = st.poles.len();
        let mut p = ConicProgram::new();
        let x = p.add_vars(dim);
        let lambda = p.add_vars(k);
        p.add_eq(lambda.clone().map(|j| (j, 1.0)).collect(), 1.0);
        for j in lambda.clone() {
            p.add_ge(vec![(j, 1.0)], 0.0);
        }
        // P·ξ in terms of the x variables: P·ξ = P·x, or P·ξ̄ + ρ·P·M·s
        let (map, offset) = match st.set {
            UncertaintySet::Ellipsoid(e) => {
                (&st.shadow * e.shape() * e.radius(), &st.shadow * e.center())
            }
            _ => (st.shadow.clone(), DVector::zeros(st.n0())),
        };
        for l in 0..st.n0() {
            let mut t: Terms = lambda
                .clone()
                .zip(&st.poles)
                .filter(|(_, w)| w[l] != 0.0)
                .map(|(j, w)| (j, w[l]))
                .collect();
            t.extend(
                (0..dim)
                    .filter(|&c| map[(l, c)] != 0.0)
                    .map(|c| (x.start + c, -map[(l, c)])),
            );
            p.add_eq(t, offset[l]);
        }
        match st.set {
            UncertaintySet::Ellipsoid(_) => {
                p.add_soc(
                    x.clone()
                        .map(|j| Affine::new(vec![(j, 1.0)], 0.0))
                        .collect(),
                    Affine::new(vec![], 1.0),
                );
            }
            _ => {
                let poly = st.set.as_polytope().expect("box or polytope");
                let c = poly.constraint_matrix();
                for r in 0..c.nrows() {
                    let t = (0..dim)
                        .filter(|&j| c[(r, j)] != 0.0)
                        .map(|j| (x.start + j, c[(r, j)]))
                        .collect();
                    p.add_le(t, poly.rhs()[r]);
                }
            }
        }
        Self {
            program: p,
            x,
            lambda,
        }
    }

    /// Objective `a·ξ + b·λ` expressed in program variables, plus its constant.
    fn objective(&self, st: &Structure<'_>, a: &DVector<f64>, b: &[f64]) -> (Terms, f64) {
        let (coef, constant) = match st.set {
            UncertaintySet::Ellipsoid(e) => (e.shape().tr_mul(a) * e.radius(), a.dot(e.center())),
            _ => (a.clone(), 0.0),
        };
        let mut t: Terms = self
            .x
            .clone()
            .zip(coef.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect();
        t.extend(
            self.lambda
                .clone()
                .zip(b)
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| (j, c)),
        );
        (t, constant)
    }

    /// Scenario and cleaned weights from a primal point.
    fn recover(&self, st: &Structure<'_>, x: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let raw = DVector::from_column_slice(&x[self.x.clone()]);
        let xi = match st.set {
            UncertaintySet::Ellipsoid(e) => {
                let n = raw.norm();
                e.point(&if n > 1.0 { raw / n } else { raw })
            }
            UncertaintySet::Box(b) => b.clamp(&raw),
            UncertaintySet::Polytope(_) => raw,
        };
        let mut lam = DVector::from_fn(self.lambda.len(), |j, _| x[self.lambda.start + j].max(0.0));
        let s = lam.sum();
        if s > 0.0 {
            lam /= s;
        }
        (xi, lam)
    }
}

pub(crate) fn separate_structure(
    st: &Structure<'_>,
    u: &DVector<f64>,
    recourses: &[DVector<f64>],
    row: usize,
    accuracy: f64,
) -> Result<SeparationResult> {
    let problem = st.problem;
    let r = problem
        .rows
        .get(row)
        .ok_or_else(|| Error::Invalid(format!("row {row} out of range")))?;
    let vi = problem.recourse_matrix.row(row).transpose();
    let a: Vec<f64> = recourses.iter().map(|v| vi.dot(v)).collect();
    let g = r.xi_gradient(u);
    let mut region = JointRegion::new(st);
    let (terms, _) = region.objective(st, &g, &a);
    region
        .program
        .set_objective(terms.into_iter().map(|(j, c)| (j, -c)).collect());
    let res = conic::solve_optimal(&region.program, accuracy, "row separation")?;
    let (scenario, weights) = region.recover(st, res.primal()?);
    let violation =
        r.offset(u) + g.dot(&scenario) + weights.iter().zip(&a).map(|(l, a)| l * a).sum::<f64>();
    Ok(SeparationResult {
        row_index: row,
        violation,
        scenario,
        weights,
    })
}

fn check_candidate(spec: &MrcSpec, candidate: &MrcSolution) -> Result<()> {
    let p = spec.problem();
    dim_check(
        "candidate first stage",
        p.first_stage_dim(),
        candidate.first_stage.len(),
    )?;
    dim_check(
        "candidate pole count",
        spec.poles().len(),
        candidate.pole_recourses.len(),
    )?;
    for v in &candidate.pole_recourses {
        dim_check("candidate recourse", p.recourse_dim(), v.len())?;
    }
    Ok(())
}

/// Maximizes the violation of `row` jointly over scenarios and weights.
pub fn separate(spec: &MrcSpec, candidate: &MrcSolution, row: usize) -> Result<SeparationResult> {
    check_candidate(spec, candidate)?;
    separate_structure(
        &spec.structure(),
        &candidate.first_stage,
        &candidate.pole_recourses,
        row,
        crate::conic::default_accuracy(),
    )
}

struct Cut {
    row: usize,
    xi: DVector<f64>,
    weights: DVector<f64>,
}

struct Master<'a> {
    st: &'a Structure<'a>,
    program: ConicProgram,
    u: Range<usize>,
    v: Vec<Range<usize>>,
}

/// Bound applied only while the plain master is unbounded.
const MASTER_BOX: f64 = 1e6;

impl<'a> Master<'a> {
    fn new(st: &'a Structure<'a>) -> Self {
        let problem = st.problem;
        let mut program = ConicProgram::new();
        let u = program.add_vars(problem.first_stage_dim());
        let v: Vec<Range<usize>> = st
            .poles
            .iter()
            .map(|_| program.add_vars(problem.recourse_dim()))
            .collect();
        program.set_objective(
            u.clone()
                .zip(problem.first_stage_cost.iter())
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| (j, c))
                .collect(),
        );
        Self { st, program, u, v }
    }

    fn add(&mut self, cut: &Cut) {
        let problem = self.st.problem;
        let row = &problem.rows[cut.row];
        let lhs = row.lhs_at(&cut.xi);
        let mut t: Terms = self
            .u
            .clone()
            .zip(lhs.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect();
        for (k, v) in self.v.iter().enumerate() {
            let w = cut.weights[k];
            if w == 0.0 {
                continue;
            }
            for (j, col) in v.clone().enumerate() {
                let a = w * problem.recourse_matrix[(cut.row, j)];
                if a != 0.0 {
                    t.push((col, a));
                }
            }
        }
        self.program.add_le(t, row.rhs_at(&cut.xi));
    }

    /// Optimal point and whether the artificial box was needed.
    fn solve(&self, accuracy: f64) -> Result<(Vec<f64>, bool)> {
        let r = conic::solve(&self.program, accuracy)?;
        match r.status {
            Status::Optimal => Ok((r.primal.expect("optimal"), false)),
            Status::Infeasible => Err(Error::Infeasible("cutting-plane master".into())),
            Status::Unbounded => {
                let mut boxed = self.program.clone();
                for j in 0..boxed.variable_count() {
                    boxed.add_le(vec![(j, 1.0)], MASTER_BOX);
                    boxed.add_ge(vec![(j, 1.0)], -MASTER_BOX);
                }
                let r = conic::solve_optimal(&boxed, accuracy, "bounded cutting-plane master")?;
                Ok((r.primal.expect("optimal"), true))
            }
            Status::NumericalFailure => Err(Error::Solver(format!(
                "cutting-plane master: {}",
                r.diagnostic.unwrap_or_else(|| "numerical failure".into())
            ))),
        }
    }
}

/// Scenarios that put the most weight on each pole, plus a central one.
fn seed_scenarios(st: &Structure<'_>, accuracy: f64) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let k = st.poles.len();
    let mut out: Vec<(DVector<f64>, DVector<f64>)> = (0..k)
        .into_par_iter()
        .map(|pole| {
            let mut region = JointRegion::new(st);
            region
                .program
                .set_objective(vec![(region.lambda.start + pole, -1.0)]);
            let r = conic::solve_optimal(&region.program, accuracy, "pole seeding")?;
            Ok(region.recover(st, r.primal()?))
        })
        .collect::<Result<_>>()?;
    let center = st.set.interior_point()?;
    let image = &st.shadow * &center;
    if let Some(w) = convex_weights(&st.poles, &image, 1e-7 * (1.0 + image.amax()))? {
        out.push((center, w));
    }
    Ok(out)
}

pub(crate) fn cutting_plane_structure(
    st: &Structure<'_>,
    options: &SolveOptions,
) -> Result<MrcSolution> {
    let problem = st.problem;
    let mut master = Master::new(st);
    for (xi, weights) in seed_scenarios(st, options.accuracy)? {
        for row in 0..problem.row_count() {
            master.add(&Cut {
                row,
                xi: xi.clone(),
                weights: weights.clone(),
            });
        }
    }
    for iteration in 1..=options.max_iterations {
        let (x, boxed) = master.solve(options.accuracy)?;
        let u = DVector::from_column_slice(&x[master.u.clone()]);
        let vs: Vec<DVector<f64>> = master
            .v
            .iter()
            .map(|r| DVector::from_column_slice(&x[r.clone()]))
            .collect();
        let seps = (0..problem.row_count())
            .into_par_iter()
            .map(|row| separate_structure(st, &u, &vs, row, options.accuracy))
            .collect::<Result<Vec<_>>>()?;
        let violated: Vec<&SeparationResult> =
            seps.iter().filter(|s| s.violation > options.tol).collect();
        if violated.is_empty() {
            if boxed {
                return Err(Error::Unbounded(
                    "robust counterpart has no finite optimum".into(),
                ));
            }
            log::debug!("cutting planes converged after {iteration} master solves");
            return Ok(MrcSolution {
                objective: problem.first_stage_cost.dot(&u),
                first_stage: u,
                pole_recourses: vs,
                iterations: iteration,
                coverage: st.coverage,
            });
        }
        for s in violated {
            master.add(&Cut {
                row: s.row_index,
                xi: s.scenario.clone(),
                weights: s.weights.clone(),
            });
        }
    }
    Err(Error::IterationLimit(format!(
        "cutting planes did not converge in {} iterations",
        options.max_iterations
    )))
}

/// Cutting-plane solve with default options and the given violation tolerance.
pub fn solve_cutting_plane(spec: &MrcSpec, tol: f64) -> Result<MrcSolution> {
    solve_cutting_plane_with(
        spec,
        &SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_cutting_plane_with(spec: &MrcSpec, options: &SolveOptions) -> Result<MrcSolution> {
    if !(options.tol > 0.0) {
        return Err(Error::Invalid(format!(
            "cutting-plane tolerance must be positive, got {}",
            options.tol
        )));
    }
    cutting_plane_structure(&spec.structure(), options)
}
