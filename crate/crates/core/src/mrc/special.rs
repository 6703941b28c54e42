use nalgebra::DVector;
use rand::Rng;

use super::compact::solve_structure;
use super::cuts::cutting_plane_structure;
use super::{Method, MrcSpec, SolveOptions, Structure};
use crate::conic::{self, default_accuracy, ConicProgram, Terms};
use crate::error::{dim_check, Error, Result};
use crate::model::{
    box_vertices, convex_weights, tol, BoxSet, CoverageStrategy, MrcSolution, RobustProblem,
    ShadowMatrix, UncertaintySet,
};
use crate::polegen::{
    circumscribe, random_affine_basis, HomothetyResult, ShadowImage, SimplexBasis,
};

/// Vertex enumeration for the fully adjustable box counterpart stops here.
pub const FARC_BOX_CAP: usize = 20;
const FARC_BOX_WARN: usize = 16;

/// Static robust counterpart: one recourse vector for every scenario.
pub fn solve_src(problem: &RobustProblem, uncertainty: &UncertaintySet) -> Result<MrcSolution> {
    dim_check(
        "uncertainty dimension",
        problem.uncertainty_dim,
        uncertainty.dim(),
    )?;
    solve_structure(
        &Structure::static_recourse(problem, uncertainty),
        default_accuracy(),
    )
}

/// [`solve_src`] through the chosen method.
pub fn solve_src_with(
    problem: &RobustProblem,
    uncertainty: &UncertaintySet,
    method: Method,
    options: &SolveOptions,
) -> Result<MrcSolution> {
    dim_check(
        "uncertainty dimension",
        problem.uncertainty_dim,
        uncertainty.dim(),
    )?;
    let st = Structure::static_recourse(problem, uncertainty);
    match method {
        Method::Compact => solve_structure(&st, options.accuracy),
        Method::Cuts => cutting_plane_structure(&st, options),
    }
}

#[derive(Clone, Debug)]
pub struct AarcResult {
    pub solution: MrcSolution,
    pub homothety: HomothetyResult,
}

impl AarcResult {
    pub fn value(&self) -> f64 {
        self.solution.objective
    }
}

/// Affinely adjustable counterpart in `P·ξ`, solved as the counterpart over a
/// random simplex circumscribing `P·Ξ`.
pub fn solve_aarc<R: Rng + ?Sized>(
    problem: &RobustProblem,
    uncertainty: &UncertaintySet,
    shadow: &ShadowMatrix,
    rng: &mut R,
) -> Result<AarcResult> {
    let basis = random_affine_basis(shadow.rows(), rng)?;
    solve_aarc_with_basis(problem, uncertainty, shadow, &basis)
}

pub fn solve_aarc_with_basis(
    problem: &RobustProblem,
    uncertainty: &UncertaintySet,
    shadow: &ShadowMatrix,
    basis: &SimplexBasis,
) -> Result<AarcResult> {
    let homothety = circumscribe(
        basis,
        &ShadowImage {
            set: uncertainty,
            shadow,
        },
    )?;
    let spec = MrcSpec::with_coverage(
        problem.clone(),
        uncertainty.clone(),
        shadow.clone(),
        homothety.poles.clone(),
        CoverageStrategy::Construction,
    )?;
    let solution = super::solve_compact(&spec, default_accuracy())?;
    Ok(AarcResult {
        solution,
        homothety,
    })
}

/// Optimal first stage and one recourse per scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSolution {
    pub first_stage: DVector<f64>,
    pub recourses: Vec<DVector<f64>>,
    pub objective: f64,
}

/// `min c·u` with an independent recourse per listed scenario.
pub fn scenario_lp(
    problem: &RobustProblem,
    scenarios: &[DVector<f64>],
    accuracy: f64,
) -> Result<ScenarioSolution> {
    if scenarios.is_empty() {
        return Err(Error::Invalid(
            "scenario LP needs at least one scenario".into(),
        ));
    }
    for s in scenarios {
        dim_check("scenario dimension", problem.uncertainty_dim, s.len())?;
    }
    let mut p = ConicProgram::new();
    let u = p.add_vars(problem.first_stage_dim());
    let vs: Vec<_> = scenarios
        .iter()
        .map(|_| p.add_vars(problem.recourse_dim()))
        .collect();
    p.set_objective(
        u.clone()
            .zip(problem.first_stage_cost.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect(),
    );
    for (xi, v) in scenarios.iter().zip(&vs) {
        for (i, row) in problem.rows.iter().enumerate() {
            let lhs = row.lhs_at(xi);
            let mut t: Terms = u
                .clone()
                .zip(lhs.iter())
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| (j, c))
                .collect();
            for (j, col) in v.clone().enumerate() {
                let a = problem.recourse_matrix[(i, j)];
                if a != 0.0 {
                    t.push((col, a));
                }
            }
            p.add_le(t, row.rhs_at(xi));
        }
    }
    let r = conic::solve_optimal(&p, accuracy, "scenario LP")?;
    let x = r.primal()?;
    let first_stage = DVector::from_column_slice(&x[u]);
    Ok(ScenarioSolution {
        objective: problem.first_stage_cost.dot(&first_stage),
        first_stage,
        recourses: vs
            .into_iter()
            .map(|r| DVector::from_column_slice(&x[r]))
            .collect(),
    })
}

/// Fully adjustable counterpart over a box: protection at every vertex.
pub fn solve_farc_box(problem: &RobustProblem, b: &BoxSet) -> Result<ScenarioSolution> {
    dim_check("box dimension", problem.uncertainty_dim, b.dim())?;
    if b.dim() >= FARC_BOX_WARN && b.dim() <= FARC_BOX_CAP {
        log::warn!(
            "enumerating {} box vertices for the fully adjustable counterpart",
            1u64 << b.dim()
        );
    }
    let vertices = box_vertices(b, FARC_BOX_CAP)?;
    scenario_lp(problem, &vertices, default_accuracy())
}

/// Fully adjustable counterpart over a set given by finitely many vertices:
/// boxes up to [`FARC_BOX_CAP`] and polytopes whose vertices enumerate.
pub fn solve_farc(
    problem: &RobustProblem,
    uncertainty: &UncertaintySet,
) -> Result<ScenarioSolution> {
    match uncertainty {
        UncertaintySet::Box(b) => solve_farc_box(problem, b),
        UncertaintySet::Polytope(p) => {
            dim_check("polytope dimension", problem.uncertainty_dim, p.dim())?;
            let vertices = p.vertices().ok_or(Error::CapExceeded {
                what: "polytope vertex enumeration",
                dim: p.dim(),
                cap: crate::model::uncertainty::POLYTOPE_VERTEX_CAP,
            })?;
            scenario_lp(problem, &vertices, default_accuracy())
        }
        UncertaintySet::Ellipsoid(_) => Err(Error::Invalid(
            "the fully adjustable counterpart needs a finite vertex set; ellipsoids have none"
                .into(),
        )),
    }
}

/// Weights `λ` with `Σλω = P·ξ` and the recourse `Σλ v_ω` they select.
pub fn recourse_for_scenario(
    spec: &MrcSpec,
    solution: &MrcSolution,
    xi: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    dim_check(
        "scenario dimension",
        spec.problem().uncertainty_dim,
        xi.len(),
    )?;
    dim_check(
        "solution pole count",
        spec.poles().len(),
        solution.pole_count(),
    )?;
    let image = spec.shadow().apply(xi)?;
    let t = tol::MEMBERSHIP * (1.0 + image.amax());
    let weights = convex_weights(spec.poles().poles(), &image, t)?.ok_or_else(|| {
        Error::NotCovering(format!(
            "P·ξ = {:?} is outside the pole hull",
            image.as_slice()
        ))
    })?;
    let v = solution.combined_recourse(&weights);
    Ok((weights, v))
}
