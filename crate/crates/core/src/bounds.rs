//! Lower bounds from projected poles and the upper/lower convergence driver.

use std::time::Instant;

use crate::conic::default_accuracy;
use crate::error::{Error, Result};
use crate::model::{tol, CoverageStrategy, PoleSet, RobustProblem, ShadowMatrix, UncertaintySet};
use crate::mrc::{scenario_lp, solve_compact, MrcSpec};
use crate::polegen::{hausdorff, project, tighten_once};

/// Slack allowed when comparing bounds.
const BOUND_SLACK: f64 = 1e-5;

/// `{project(s, ω) : ω ∈ Ω}`.
pub fn project_poleset(omega: &PoleSet, s: &UncertaintySet) -> Result<PoleSet> {
    PoleSet::new(
        omega
            .iter()
            .map(|w| project(s, w))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Counterpart restricted to the listed scenarios, with a recourse per point.
/// For points of `Ξ` this bounds the fully adjustable value from below.
pub fn lower_bound(problem: &RobustProblem, gamma: &PoleSet) -> Result<f64> {
    Ok(scenario_lp(problem, gamma.poles(), default_accuracy())?.objective)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub iteration: usize,
    pub pole_count: usize,
    pub hausdorff: f64,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub wall_ms: f64,
}

impl BoundsRow {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundsTrace {
    pub rows: Vec<BoundsRow>,
    /// Set when the budget ended the run before the stopping rule did.
    pub truncated: bool,
}

/// Limits for [`converge`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub max_iterations: usize,
    pub max_seconds: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            max_seconds: None,
        }
    }
}

fn upper_bound(
    problem: &RobustProblem,
    s: &UncertaintySet,
    omega: &PoleSet,
    coverage: Option<CoverageStrategy>,
) -> Result<f64> {
    let shadow = ShadowMatrix::identity(s.dim());
    let spec = match coverage {
        Some(c) => MrcSpec::with_coverage(problem.clone(), s.clone(), shadow, omega.clone(), c)?,
        None => MrcSpec::new(problem.clone(), s.clone(), shadow, omega.clone())?,
    };
    Ok(solve_compact(&spec, default_accuracy())?.objective)
}

/// Tightens `initial` toward `s` and records both bounds at every step.
pub fn converge(
    problem: &RobustProblem,
    s: &UncertaintySet,
    initial: &PoleSet,
    max_poles: usize,
    budget: &Budget,
) -> Result<BoundsTrace> {
    let start = Instant::now();
    let mut trace = BoundsTrace::default();
    let mut omega = initial.clone();
    for iteration in 0.. {
        let t0 = Instant::now();
        // the first set is certified, later ones cover by construction
        let coverage = (iteration > 0).then_some(CoverageStrategy::Construction);
        let (ub, lb) = rayon::join(
            || upper_bound(problem, s, &omega, coverage),
            || project_poleset(&omega, s).and_then(|g| lower_bound(problem, &g)),
        );
        let row = BoundsRow {
            iteration,
            pole_count: omega.len(),
            hausdorff: hausdorff(&omega, s)?,
            upper_bound: ub?,
            lower_bound: lb?,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        };
        let slack = BOUND_SLACK * (1.0 + row.upper_bound.abs());
        if row.upper_bound < row.lower_bound - slack {
            return Err(Error::BoundViolation(format!(
                "iteration {iteration}: upper bound {} below lower bound {}",
                row.upper_bound, row.lower_bound
            )));
        }
        if let Some(prev) = trace.rows.last() {
            if row.upper_bound > prev.upper_bound + slack {
                return Err(Error::BoundViolation(format!(
                    "iteration {iteration}: upper bound rose from {} to {}",
                    prev.upper_bound, row.upper_bound
                )));
            }
        }
        trace.rows.push(row);

        if omega.len() >= max_poles || hausdorff(&omega, s)? <= tol::MEMBERSHIP {
            break;
        }
        let out_of_time = budget
            .max_seconds
            .is_some_and(|m| start.elapsed().as_secs_f64() >= m);
        if iteration + 1 >= budget.max_iterations || out_of_time {
            trace.truncated = true;
            break;
        }
        let next = tighten_once(&omega, s)?;
        if next == omega {
            break;
        }
        omega = next;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{build_lobbying, generate_lobbying, AdaptabilitySpec};
    use crate::model::{box_vertices, BoxSet};
    use crate::mrc::solve_farc_box;
    use crate::polegen::{circumscribe, random_affine_basis};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn projection_clamps_outside_poles() {
        let omega = PoleSet::new(vec![v(&[2.0, 0.0]), v(&[0.0, 2.0]), v(&[0.0, 0.0])]).unwrap();
        let g = project_poleset(&omega, &UncertaintySet::unit_cube(2)).unwrap();
        assert_eq!(
            g.to_rows(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]
        );
        let inside = PoleSet::new(vec![v(&[0.5, 0.5])]).unwrap();
        assert_eq!(
            project_poleset(&inside, &UncertaintySet::unit_cube(2)).unwrap(),
            inside
        );
    }

    #[test]
    fn vertex_lower_bound_is_farc() {
        let inst = generate_lobbying(4, 3, 2).unwrap();
        let cube = BoxSet::unit(3);
        let problem = build_lobbying(
            &inst,
            &UncertaintySet::Box(cube.clone()),
            &AdaptabilitySpec::full(4),
        )
        .unwrap();
        let gamma = PoleSet::new(box_vertices(&cube, 20).unwrap()).unwrap();
        let farc = solve_farc_box(&problem, &cube).unwrap().objective;
        assert_abs_diff_eq!(lower_bound(&problem, &gamma).unwrap(), farc, epsilon = 1e-9);
        let xi = v(&[0.2, 0.9, 0.4]);
        let single = PoleSet::new(vec![xi.clone()]).unwrap();
        assert_abs_diff_eq!(
            lower_bound(&problem, &single).unwrap(),
            inst.effort_at(&xi),
            epsilon = 1e-6
        );
    }

    #[test]
    fn converge_keeps_bounds_ordered() {
        let inst = generate_lobbying(4, 3, 3).unwrap();
        let cube = UncertaintySet::unit_cube(3);
        let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(4)).unwrap();
        let basis = random_affine_basis(3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let start = circumscribe(&basis, &cube).unwrap().poles;
        let trace = converge(&problem, &cube, &start, 20, &Budget::default()).unwrap();
        assert!(trace.rows.len() >= 2);
        for r in &trace.rows {
            assert!(r.upper_bound >= r.lower_bound - 1e-5);
        }
        for w in trace.rows.windows(2) {
            assert!(w[1].upper_bound <= w[0].upper_bound + 1e-5);
        }
        let short = converge(
            &problem,
            &cube,
            &start,
            20,
            &Budget {
                max_iterations: 1,
                max_seconds: None,
            },
        )
        .unwrap();
        assert!(short.truncated && short.rows.len() == 1);
    }
}
