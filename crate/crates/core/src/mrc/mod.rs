//! Multipolar robust counterparts.
//!
//! Each pole `ω` carries its own recourse `v_ω`; at scenario ξ the recourse is
//! `Σ λ_ω v_ω` for weights with `Σ λ_ω ω = P·ξ`, and every constraint row must
//! hold for all such weights. The counterpart is solved either through a
//! compact dual ([`build_compact_polytope`], [`build_compact_ellipsoid`]) or by
//! cutting planes ([`solve_cutting_plane`]).

mod compact;
mod cuts;
mod special;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conic::default_accuracy;
use crate::error::{Error, Result};
use crate::model::{
    convex_weights, tol, CoverageStrategy, PoleSet, RobustProblem, ShadowMatrix, UncertaintySet,
};

pub use compact::{
    build_compact, build_compact_ellipsoid, build_compact_polytope, solve_compact, CompactLayout,
    CompactProgram,
};
pub use cuts::{separate, solve_cutting_plane, solve_cutting_plane_with, SeparationResult};
pub use special::{
    recourse_for_scenario, scenario_lp, solve_aarc, solve_aarc_with_basis, solve_farc,
    solve_farc_box, solve_src, solve_src_with, AarcResult, ScenarioSolution, FARC_BOX_CAP,
};

/// Boxes up to this dimension are certified on every vertex.
pub const COVERAGE_VERTEX_DIM: usize = 12;
/// Boundary points checked when vertices are not enumerated.
pub const COVERAGE_SAMPLES: usize = 1000;
const COVERAGE_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Compact,
    Cuts,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Compact => "compact",
            Self::Cuts => "cuts",
        }
    }
}

/// Numerical knobs shared by the solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Interior-point accuracy handed to the backend.
    pub accuracy: f64,
    /// Cutting planes stop once no row is violated by more than this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            accuracy: default_accuracy(),
            tol: tol::FEASIBILITY,
            max_iterations: 10_000,
        }
    }
}

/// A problem, its uncertainty set, a shadow matrix and a pole-set whose hull
/// covers `P·Ξ`.
#[derive(Clone, Debug)]
pub struct MrcSpec {
    problem: RobustProblem,
    uncertainty: UncertaintySet,
    shadow: ShadowMatrix,
    poles: PoleSet,
    coverage: CoverageStrategy,
}

impl MrcSpec {
    /// Checks dimensions and certifies that `conv(poles) ⊇ P·Ξ`.
    pub fn new(
        problem: RobustProblem,
        uncertainty: UncertaintySet,
        shadow: ShadowMatrix,
        poles: PoleSet,
    ) -> Result<Self> {
        check_dims(&problem, &uncertainty, &shadow, &poles)?;
        let coverage = certify_coverage(&uncertainty, &shadow, &poles)?;
        Ok(Self {
            problem,
            uncertainty,
            shadow,
            poles,
            coverage,
        })
    }

    /// Skips the coverage check; the caller guarantees it.
    pub fn with_coverage(
        problem: RobustProblem,
        uncertainty: UncertaintySet,
        shadow: ShadowMatrix,
        poles: PoleSet,
        coverage: CoverageStrategy,
    ) -> Result<Self> {
        check_dims(&problem, &uncertainty, &shadow, &poles)?;
        Ok(Self {
            problem,
            uncertainty,
            shadow,
            poles,
            coverage,
        })
    }

    pub fn problem(&self) -> &RobustProblem {
        &self.problem
    }

    pub fn uncertainty(&self) -> &UncertaintySet {
        &self.uncertainty
    }

    pub fn shadow(&self) -> &ShadowMatrix {
        &self.shadow
    }

    pub fn poles(&self) -> &PoleSet {
        &self.poles
    }

    pub fn coverage(&self) -> CoverageStrategy {
        self.coverage
    }

    pub(crate) fn structure(&self) -> Structure<'_> {
        Structure {
            problem: &self.problem,
            set: &self.uncertainty,
            shadow: self.shadow.matrix().clone(),
            poles: self.poles.poles().to_vec(),
            coverage: self.coverage,
        }
    }
}

fn check_dims(
    problem: &RobustProblem,
    uncertainty: &UncertaintySet,
    shadow: &ShadowMatrix,
    poles: &PoleSet,
) -> Result<()> {
    let dim = problem.uncertainty_dim;
    if uncertainty.dim() != dim {
        return Err(Error::Dimension(format!(
            "uncertainty set has dimension {}, problem expects {dim}",
            uncertainty.dim()
        )));
    }
    if shadow.cols() != dim {
        return Err(Error::Dimension(format!(
            "shadow has {} columns, problem expects {dim}",
            shadow.cols()
        )));
    }
    if poles.dim() != shadow.rows() {
        return Err(Error::Dimension(format!(
            "poles have dimension {}, shadow has {} rows",
            poles.dim(),
            shadow.rows()
        )));
    }
    Ok(())
}

/// Points of `Ξ` whose images must lie in the pole hull, and how they were chosen.
fn coverage_points(s: &UncertaintySet) -> Result<(Vec<DVector<f64>>, CoverageStrategy)> {
    let mut rng = ChaCha8Rng::seed_from_u64(COVERAGE_SEED);
    if let Some(p) = s.singleton() {
        return Ok((vec![p], CoverageStrategy::Vertices));
    }
    match s {
        UncertaintySet::Box(_) if s.dim() <= COVERAGE_VERTEX_DIM => Ok((
            s.vertices(COVERAGE_VERTEX_DIM).expect("within cap"),
            CoverageStrategy::Vertices,
        )),
        UncertaintySet::Polytope(p) => match p.vertices() {
            Some(v) => Ok((v, CoverageStrategy::Vertices)),
            None => {
                let mut pts = s.sample_boundary(&mut rng, COVERAGE_SAMPLES)?;
                for j in 0..s.dim() {
                    for sign in [1.0, -1.0] {
                        let mut e = DVector::zeros(s.dim());
                        e[j] = sign;
                        pts.push(s.support_point(&e)?.1);
                    }
                }
                Ok((pts, CoverageStrategy::Sampled))
            }
        },
        _ => Ok((
            s.sample_boundary(&mut rng, COVERAGE_SAMPLES)?,
            CoverageStrategy::Sampled,
        )),
    }
}

fn image_key(x: &DVector<f64>) -> Vec<i64> {
    x.iter().map(|v| (v * 1e10).round() as i64).collect()
}

pub(crate) fn certify_coverage(
    s: &UncertaintySet,
    shadow: &ShadowMatrix,
    poles: &PoleSet,
) -> Result<CoverageStrategy> {
    let (points, strategy) = coverage_points(s)?;
    let mut seen = std::collections::HashSet::new();
    let images: Vec<DVector<f64>> = points
        .iter()
        .map(|x| shadow.matrix() * x)
        .filter(|y| seen.insert(image_key(y)))
        .collect();
    let failures: Vec<Result<Option<DVector<f64>>>> = images
        .par_iter()
        .map(|y| {
            let t = tol::MEMBERSHIP * (1.0 + y.amax());
            Ok(match convex_weights(poles.poles(), y, t)? {
                Some(_) => None,
                None => Some(y.clone()),
            })
        })
        .collect();
    for f in failures {
        if let Some(y) = f? {
            return Err(Error::NotCovering(format!(
                "image point {:?} is outside the pole hull ({} check)",
                y.as_slice(),
                strategy.as_str()
            )));
        }
    }
    Ok(strategy)
}

/// Solver-facing view: the shadow may have zero rows (one static pole).
#[derive(Clone, Debug)]
pub(crate) struct Structure<'a> {
    pub problem: &'a RobustProblem,
    pub set: &'a UncertaintySet,
    pub shadow: DMatrix<f64>,
    pub poles: Vec<DVector<f64>>,
    pub coverage: CoverageStrategy,
}

impl<'a> Structure<'a> {
    /// A single pole in a zero-dimensional shadow: one recourse for every ξ.
    pub fn static_recourse(problem: &'a RobustProblem, set: &'a UncertaintySet) -> Self {
        Self {
            problem,
            set,
            shadow: DMatrix::zeros(0, set.dim()),
            poles: vec![DVector::zeros(0)],
            coverage: CoverageStrategy::Construction,
        }
    }

    pub fn n0(&self) -> usize {
        self.shadow.nrows()
    }
}

pub fn solve_mrc(
    spec: &MrcSpec,
    method: Method,
    options: &SolveOptions,
) -> Result<crate::model::MrcSolution> {
    match method {
        Method::Compact => solve_compact(spec, options.accuracy),
        Method::Cuts => solve_cutting_plane_with(spec, options),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{build_lobbying, generate_lobbying, unit_volume_ball, AdaptabilitySpec};
    use crate::model::{box_vertices, BoxSet, ConstraintRow, MrcSolution};
    use crate::polegen::{circumscribe, cross_polytope_poles, random_affine_basis};
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn tiny_problem(dim: usize) -> RobustProblem {
        RobustProblem::new(
            v(&[1.0]),
            DMatrix::zeros(1, 0),
            vec![ConstraintRow::certain(v(&[-1.0]), 0.0, dim)],
            dim,
        )
        .unwrap()
    }

    fn lobby_box_spec(m: usize, n: usize, seed: u64) -> MrcSpec {
        let inst = generate_lobbying(m, n, seed).unwrap();
        let cube = UncertaintySet::unit_cube(n);
        let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(m)).unwrap();
        let basis = random_affine_basis(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let poles = circumscribe(&basis, &cube).unwrap().poles;
        MrcSpec::new(problem, cube, ShadowMatrix::identity(n), poles).unwrap()
    }

    #[test]
    fn coverage_rejects_small_hull() {
        let set = UncertaintySet::unit_cube(2);
        let poles = PoleSet::new(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let r = MrcSpec::new(tiny_problem(2), set, ShadowMatrix::identity(2), poles);
        assert!(matches!(r, Err(Error::NotCovering(_))));
    }

    #[test]
    fn coverage_strategy_recorded() {
        let set = UncertaintySet::ball(DVector::zeros(2), 1.0).unwrap();
        let spec = MrcSpec::new(
            tiny_problem(2),
            set,
            ShadowMatrix::identity(2),
            cross_polytope_poles(2, 2f64.sqrt()).unwrap(),
        )
        .unwrap();
        assert_eq!(spec.coverage(), CoverageStrategy::Sampled);
        let cube = UncertaintySet::unit_cube(2);
        let poles = PoleSet::new(vec![v(&[0.0, 0.0]), v(&[2.0, 0.0]), v(&[0.0, 2.0])]).unwrap();
        let spec = MrcSpec::new(tiny_problem(2), cube, ShadowMatrix::identity(2), poles).unwrap();
        assert_eq!(spec.coverage(), CoverageStrategy::Vertices);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let set = UncertaintySet::unit_cube(3);
        let poles = PoleSet::new(vec![v(&[0.0, 0.0])]).unwrap();
        assert!(matches!(
            MrcSpec::new(tiny_problem(2), set, ShadowMatrix::identity(2), poles),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn singleton_box_gives_nominal_value() {
        let inst = generate_lobbying(3, 2, 4).unwrap();
        let xi = v(&[0.3, 0.7]);
        let set = UncertaintySet::boxed(xi.clone(), xi.clone()).unwrap();
        let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::full(3)).unwrap();
        let spec = MrcSpec::new(
            problem.clone(),
            set,
            ShadowMatrix::identity(2),
            PoleSet::new(vec![xi.clone()]).unwrap(),
        )
        .unwrap();
        let nominal = inst.effort_at(&xi);
        assert_abs_diff_eq!(
            solve_compact(&spec, default_accuracy()).unwrap().objective,
            nominal,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            solve_cutting_plane(&spec, 1e-8).unwrap().objective,
            nominal,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            solve_src(&problem, spec.uncertainty()).unwrap().objective,
            nominal,
            epsilon = 1e-6
        );
        let sep = separate(&spec, &solve_compact(&spec, default_accuracy()).unwrap(), 1).unwrap();
        assert_abs_diff_eq!((sep.scenario - xi).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn point_ellipsoid_gives_nominal_value() {
        let inst = generate_lobbying(3, 2, 5).unwrap();
        let c = v(&[0.5, 0.5]);
        let set = UncertaintySet::ball(c.clone(), 0.0).unwrap();
        let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::full(3)).unwrap();
        let spec = MrcSpec::new(
            problem,
            set,
            ShadowMatrix::identity(2),
            PoleSet::new(vec![c.clone()]).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            solve_compact(&spec, default_accuracy()).unwrap().objective,
            inst.effort_at(&c),
            epsilon = 1e-6
        );
    }

    #[test]
    fn compact_polytope_variable_count() {
        let spec = lobby_box_spec(3, 2, 1);
        let cp = build_compact_polytope(&spec).unwrap();
        let (n_u, n_v, m, k) = (1, 3, 7, spec.poles().len());
        let (n_d, n0) = (4, 2);
        assert_eq!(cp.program.variable_count(), n_u + k * n_v + m * (n_d + n0));
        assert!(build_compact_ellipsoid(&spec).is_err());
    }

    #[test]
    fn box_compact_matches_cuts() {
        let spec = lobby_box_spec(3, 2, 2);
        let a = solve_compact(&spec, default_accuracy()).unwrap().objective;
        let b = solve_cutting_plane(&spec, 1e-8).unwrap().objective;
        assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn ball_compact_matches_cuts() {
        let inst = generate_lobbying(2, 2, 3).unwrap();
        let ball = unit_volume_ball(2).unwrap();
        let problem = build_lobbying(&inst, &ball, &AdaptabilitySpec::full(2)).unwrap();
        let UncertaintySet::Ellipsoid(e) = &ball else {
            unreachable!()
        };
        let poles = PoleSet::new(
            cross_polytope_poles(2, 2f64.sqrt() * e.radius())
                .unwrap()
                .iter()
                .map(|p| p + e.center())
                .collect(),
        )
        .unwrap();
        let spec = MrcSpec::new(problem, ball, ShadowMatrix::identity(2), poles).unwrap();
        let cp = build_compact_ellipsoid(&spec).unwrap();
        assert_eq!(cp.program.soc_constraints().len(), 5 * spec.poles().len());
        let a = solve_compact(&spec, default_accuracy()).unwrap().objective;
        let b = solve_cutting_plane(&spec, 1e-8).unwrap().objective;
        assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn compact_optimum_passes_separation() {
        let spec = lobby_box_spec(3, 3, 6);
        let sol = solve_compact(&spec, default_accuracy()).unwrap();
        for row in 0..spec.problem().row_count() {
            assert!(separate(&spec, &sol, row).unwrap().violation <= 1e-6);
        }
    }

    #[test]
    fn nonnegative_row_violation_at_all_ones() {
        let inst = crate::bench::LobbyingInstance::new(
            DMatrix::from_row_slice(2, 3, &[0.2, 0.5, 0.1, 1.0, 0.1, 0.3]),
            DVector::from_element(2, 1.0),
            0,
        )
        .unwrap();
        let cube = UncertaintySet::unit_cube(3);
        let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(2)).unwrap();
        let poles = PoleSet::new(box_vertices(&BoxSet::unit(3), 20).unwrap()).unwrap();
        let spec = MrcSpec::new(problem, cube, ShadowMatrix::identity(3), poles).unwrap();
        let zero = MrcSolution {
            first_stage: DVector::zeros(1),
            pole_recourses: vec![DVector::zeros(2); spec.poles().len()],
            objective: 0.0,
            iterations: 0,
            coverage: spec.coverage(),
        };
        let sep = separate(&spec, &zero, 1).unwrap();
        assert_abs_diff_eq!(sep.violation, 0.8, epsilon = 1e-7);
        assert_abs_diff_eq!(
            (sep.scenario.clone() - v(&[1.0, 1.0, 1.0])).amax(),
            0.0,
            epsilon = 1e-6
        );
        let image = spec.shadow().apply(&sep.scenario).unwrap();
        let recon = spec
            .poles()
            .iter()
            .zip(sep.weights.iter())
            .fold(DVector::zeros(3), |a, (p, &l)| a + p * l);
        assert!((recon - image).amax() <= 1e-7);
        assert_abs_diff_eq!(sep.weights.sum(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn src_on_box_is_positive_part_sum() {
        let inst = generate_lobbying(4, 3, 8).unwrap();
        let cube = UncertaintySet::unit_cube(3);
        let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(4)).unwrap();
        let expected: f64 = inst.q.iter().map(|x| x.max(0.0)).sum();
        assert_abs_diff_eq!(
            solve_src(&problem, &cube).unwrap().objective,
            expected,
            epsilon = 1e-6
        );
    }
}
