use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::conic::{self, default_accuracy, Affine, ConicProgram, Status};
use crate::error::{dim_check, Error, Result};
use crate::model::{
    ConstraintRow, Ellipsoid, PoleSet, RobustProblem, ShadowMatrix, UncertaintySet,
};
use crate::mrc::{solve_compact, MrcSpec};

/// Generator behind [`generate_lobbying`], reported in output metadata.
pub const PRNG_ID: &str = "chacha8/rand_chacha-0.10/seed_from_u64";

pub const BALL_ENUMERATE_CAP: usize = 12;
pub const BALL_SIMPLE_CAP: usize = 24;

/// `m` voters swayed by `n` uncertain authority opinions through `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct LobbyingInstance {
    /// `m × n`, entries in `[-1, 1]`.
    pub q: DMatrix<f64>,
    /// Unit effort prices, one per voter.
    pub r: DVector<f64>,
    pub seed: u64,
}

impl LobbyingInstance {
    pub fn new(q: DMatrix<f64>, r: DVector<f64>, seed: u64) -> Result<Self> {
        dim_check("price vector", q.nrows(), r.len())?;
        if q.iter().any(|x| !(x.abs() <= 1.0)) {
            return Err(Error::Invalid(
                "lobbying influence entries must lie in [-1, 1]".into(),
            ));
        }
        Ok(Self { q, r, seed })
    }

    pub fn voters(&self) -> usize {
        self.q.nrows()
    }

    pub fn authorities(&self) -> usize {
        self.q.ncols()
    }

    /// `Σ_i r_i·max(0, Q_i·ξ)`, the optimal effort once ξ is known.
    pub fn effort_at(&self, xi: &DVector<f64>) -> f64 {
        (&self.q * xi)
            .iter()
            .zip(self.r.iter())
            .map(|(a, r)| r * a.max(0.0))
            .sum()
    }
}

/// Entries of `Q` uniform on `[-1, 1]`, prices all one.
pub fn generate_lobbying(m: usize, n: usize, seed: u64) -> Result<LobbyingInstance> {
    if m == 0 || n == 0 {
        return Err(Error::Invalid(format!(
            "lobbying instance needs m, n >= 1, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // row-major draw order
    let mut q = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            q[(i, j)] = rng.random_range(-1.0..=1.0);
        }
    }
    LobbyingInstance::new(q, DVector::from_element(m, 1.0), seed)
}

/// Which recourse components may react to ξ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptabilitySpec {
    pub theta: f64,
    pub adjustable_count: usize,
}

impl AdaptabilitySpec {
    pub fn new(theta: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Invalid(format!(
                "adaptability ratio must be in [0, 1], got {theta}"
            )));
        }
        Ok(Self {
            theta,
            adjustable_count: ((theta * m as f64) + 1e-12).floor() as usize,
        })
    }

    pub fn full(m: usize) -> Self {
        Self {
            theta: 1.0,
            adjustable_count: m,
        }
    }
}

/// Budget row, `Q_i·ξ <= v_i` rows, then `v_i >= 0` rows. First-stage
/// variables are `u` followed by the static efforts `v_{k+1..m}`; the first
/// `k = adjustable_count` efforts are the recourse.
pub fn build_lobbying(
    inst: &LobbyingInstance,
    s: &UncertaintySet,
    adapt: &AdaptabilitySpec,
) -> Result<RobustProblem> {
    let (m, n) = (inst.voters(), inst.authorities());
    dim_check("uncertainty dimension", n, s.dim())?;
    let k = adapt.adjustable_count.min(m);
    let n_u = 1 + (m - k);
    // effort i lives in the recourse (adjustable) or in the first stage
    let place = |i: usize| if i < k { (true, i) } else { (false, 1 + i - k) };
    let mut v = DMatrix::zeros(2 * m + 1, k);
    let mut rows = Vec::with_capacity(2 * m + 1);

    let mut budget = DVector::zeros(n_u);
    budget[0] = -1.0;
    for i in 0..m {
        match place(i) {
            (true, j) => v[(0, j)] = inst.r[i],
            (false, j) => budget[j] = inst.r[i],
        }
    }
    rows.push(ConstraintRow::certain(budget, 0.0, n));

    for i in 0..m {
        let mut lhs = DVector::zeros(n_u);
        match place(i) {
            (true, j) => v[(1 + i, j)] = -1.0,
            (false, j) => lhs[j] = -1.0,
        }
        rows.push(ConstraintRow {
            lhs_nominal: lhs,
            lhs_uncertain: DMatrix::zeros(n_u, n),
            rhs_nominal: 0.0,
            rhs_uncertain: -inst.q.row(i).transpose(),
        });
    }
    for i in 0..m {
        let mut lhs = DVector::zeros(n_u);
        match place(i) {
            (true, j) => v[(1 + m + i, j)] = -1.0,
            (false, j) => lhs[j] = -1.0,
        }
        rows.push(ConstraintRow::certain(lhs, 0.0, n));
    }
    let mut cost = DVector::zeros(n_u);
    cost[0] = 1.0;
    RobustProblem::new(cost, v, rows, n)
}

/// Radius of the unit-volume ball in `R^n`, `(Γ(n/2 + 1)/π^{n/2})^{1/n}`.
pub fn unit_ball_radius(n: usize) -> f64 {
    let nf = n as f64;
    ((ln_gamma(nf / 2.0 + 1.0) - nf / 2.0 * std::f64::consts::PI.ln()) / nf).exp()
}

/// Unit-volume ball centered at `(½, …, ½)`.
pub fn unit_volume_ball(n: usize) -> Result<UncertaintySet> {
    UncertaintySet::ball(DVector::from_element(n, 0.5), unit_ball_radius(n))
}

fn subset_sum(inst: &LobbyingInstance, mask: usize) -> DVector<f64> {
    let mut a = DVector::zeros(inst.authorities());
    for i in 0..inst.voters() {
        if mask >> i & 1 == 1 {
            a += inst.q.row(i).transpose() * inst.r[i];
        }
    }
    a
}

/// Fully adjustable value over an ellipsoid by one cone program per sign
/// pattern of `Q·ξ`.
pub fn farc_ball_enumerate(inst: &LobbyingInstance, ball: &Ellipsoid) -> Result<f64> {
    let (m, n) = (inst.voters(), inst.authorities());
    dim_check("ball dimension", n, ball.dim())?;
    if m > BALL_ENUMERATE_CAP {
        return Err(Error::CapExceeded {
            what: "ball sign-pattern enumeration",
            dim: m,
            cap: BALL_ENUMERATE_CAP,
        });
    }
    let values = (0..1usize << m)
        .into_par_iter()
        .map(|mask| {
            // ξ = center + ρ·M·s, ‖s‖ <= 1
            let a = subset_sum(inst, mask);
            let mut p = ConicProgram::new();
            let s = p.add_vars(n);
            let scaled = ball.shape().tr_mul(&a) * ball.radius();
            p.set_objective(
                s.clone()
                    .zip(scaled.iter())
                    .map(|(j, &c)| (j, -c))
                    .collect(),
            );
            p.add_soc(
                s.clone()
                    .map(|j| Affine::new(vec![(j, 1.0)], 0.0))
                    .collect(),
                Affine::new(vec![], 1.0),
            );
            for i in 0..m {
                let qi = inst.q.row(i).transpose();
                let g = ball.shape().tr_mul(&qi) * ball.radius();
                let terms = s.clone().zip(g.iter()).map(|(j, &c)| (j, c)).collect();
                let at_center = qi.dot(ball.center());
                if mask >> i & 1 == 1 {
                    p.add_ge(terms, -at_center);
                } else {
                    p.add_le(terms, -at_center);
                }
            }
            let r = conic::solve(&p, default_accuracy())?;
            Ok(match r.status {
                Status::Optimal => a.dot(ball.center()) - r.objective,
                Status::Infeasible => f64::NEG_INFINITY,
                s => return Err(Error::Solver(format!("sign pattern {mask:#b}: {s:?}"))),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Closed form `max_J ρ‖Mᵀ Σ_J r_i Q_i‖ + Σ_J r_i Q_i·ξ̄` of the same value.
pub fn farc_ball_simple(inst: &LobbyingInstance, ball: &Ellipsoid) -> Result<f64> {
    let (m, n) = (inst.voters(), inst.authorities());
    dim_check("ball dimension", n, ball.dim())?;
    if m > BALL_SIMPLE_CAP {
        return Err(Error::CapExceeded {
            what: "ball subset evaluation",
            dim: m,
            cap: BALL_SIMPLE_CAP,
        });
    }
    Ok((0..1usize << m)
        .into_par_iter()
        .map(|mask| {
            let a = subset_sum(inst, mask);
            ball.radius() * ball.shape().tr_mul(&a).norm() + a.dot(ball.center())
        })
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

/// Counterpart values over `[0,1]^n` observed through the first `n0`
/// coordinates, with the `2^{n0}` vertices of the observed cube as poles.
pub fn shadow_projection_experiment(
    inst: &LobbyingInstance,
    n: usize,
    projection_dims: &[usize],
) -> Result<Vec<(usize, f64)>> {
    dim_check("authority count", inst.authorities(), n)?;
    let cube = UncertaintySet::unit_cube(n);
    let problem = build_lobbying(inst, &cube, &AdaptabilitySpec::full(inst.voters()))?;
    projection_dims
        .iter()
        .map(|&n0| {
            let shadow = ShadowMatrix::coordinate_projection(n0, n)?;
            let b = crate::model::BoxSet::unit(n0);
            let poles = PoleSet::new(crate::model::box_vertices(
                &b,
                crate::model::uncertainty::DEFAULT_ENUMERATION_CAP,
            )?)?;
            let spec = MrcSpec::new(problem.clone(), cube.clone(), shadow, poles)?;
            Ok((n0, solve_compact(&spec, default_accuracy())?.objective))
        })
        .collect()
}
