#![allow(dead_code)]

use multipolar::bench::LobbyingInstance;
use multipolar::conic::{self, ConicProgram};
use multipolar::model::{box_vertices, BoxSet, RobustProblem};
use nalgebra::DVector;

/// Affine decision rule `v(ξ) = v₀ + Wξ` imposed on every box vertex, solved
/// directly as one LP in `(u, v₀, W)`.
pub fn adr_value_box(problem: &RobustProblem, b: &BoxSet) -> f64 {
    let (nu, nv, n) = (
        problem.first_stage_dim(),
        problem.recourse_dim(),
        problem.uncertainty_dim,
    );
    let mut lp = ConicProgram::new();
    let u = lp.add_vars(nu);
    let v0 = lp.add_vars(nv);
    let w = lp.add_vars(nv * n);
    lp.set_objective(
        u.clone()
            .zip(problem.first_stage_cost.iter())
            .map(|(j, &c)| (j, c))
            .collect(),
    );
    for xi in box_vertices(b, 12).expect("vertices") {
        for (i, row) in problem.rows.iter().enumerate() {
            let lhs = row.lhs_at(&xi);
            let mut terms: Vec<(usize, f64)> =
                u.clone().zip(lhs.iter()).map(|(j, &a)| (j, a)).collect();
            for k in 0..nv {
                let a = problem.recourse_matrix[(i, k)];
                if a == 0.0 {
                    continue;
                }
                terms.push((v0.start + k, a));
                for j in 0..n {
                    terms.push((w.start + k * n + j, a * xi[j]));
                }
            }
            lp.add_le(terms, row.rhs_at(&xi));
        }
    }
    let r = conic::solve(&lp, 1e-10).expect("adr lp");
    assert!(r.is_optimal(), "adr lp status {:?}", r.status);
    r.objective
}

/// Static lobbying cost over the unit cube: `Σ_ij r_i·max(0, Q_ij)`.
pub fn lobbying_src_closed_form(inst: &LobbyingInstance) -> f64 {
    (0..inst.voters())
        .map(|i| {
            inst.r[i]
                * (0..inst.authorities())
                    .map(|j| inst.q[(i, j)].max(0.0))
                    .sum::<f64>()
        })
        .sum()
}

/// Fully adjustable lobbying cost over the unit cube: the convex effort is
/// maximised at a vertex.
pub fn lobbying_farc_vertices(inst: &LobbyingInstance) -> f64 {
    box_vertices(&BoxSet::unit(inst.authorities()), 20)
        .expect("vertices")
        .iter()
        .map(|x| inst.effort_at(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
