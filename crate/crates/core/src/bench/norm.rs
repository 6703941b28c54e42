use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ConstraintRow, PoleSet, RobustProblem, ShadowMatrix, Support, UncertaintySet};
use crate::polegen::cross_polytope_poles;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::L1 => "l1",
            Self::L2 => "l2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormExample {
    pub problem: RobustProblem,
    pub uncertainty: UncertaintySet,
    pub shadow: ShadowMatrix,
    pub poles: PoleSet,
}

/// `min u` s.t. `v_i >= |ξ_i|` and `u >= Σ v_i` over the unit ball of the
/// chosen norm, observed through the first `n0` coordinates.
pub fn build_norm_example(n: usize, n0: usize, kind: NormKind) -> Result<NormExample> {
    if n0 == 0 || n0 > n {
        return Err(Error::Invalid(format!(
            "norm example needs 1 <= n0 <= n, got n0={n0}, n={n}"
        )));
    }
    let mut rows = Vec::with_capacity(2 * n + 1);
    let mut v = DMatrix::zeros(2 * n + 1, n);
    for i in 0..n {
        for (k, sign) in [(0, -1.0), (1, 1.0)] {
            // ±ξ_i − v_i <= 0, i.e. rhs(ξ) = ∓ξ_i
            let mut rhs_uncertain = DVector::zeros(n);
            rhs_uncertain[i] = sign;
            rows.push(ConstraintRow {
                lhs_nominal: DVector::zeros(1),
                lhs_uncertain: DMatrix::zeros(1, n),
                rhs_nominal: 0.0,
                rhs_uncertain,
            });
            v[(2 * i + k, i)] = -1.0;
        }
    }
    rows.push(ConstraintRow::certain(
        DVector::from_element(1, -1.0),
        0.0,
        n,
    ));
    for j in 0..n {
        v[(2 * n, j)] = 1.0;
    }
    let problem = RobustProblem::new(DVector::from_element(1, 1.0), v, rows, n)?;
    let (uncertainty, radius) = match kind {
        NormKind::L1 => {
            if n > 16 {
                return Err(Error::CapExceeded {
                    what: "L1 ball facet list",
                    dim: n,
                    cap: 16,
                });
            }
            let facets = 1usize << n;
            let c = DMatrix::from_fn(facets, n, |r, j| if r >> j & 1 == 1 { -1.0 } else { 1.0 });
            (
                UncertaintySet::polytope(c, DVector::from_element(facets, 1.0))?,
                1.0,
            )
        }
        NormKind::L2 => (
            UncertaintySet::ball(DVector::zeros(n), 1.0)?,
            (n0 as f64).sqrt(),
        ),
    };
    Ok(NormExample {
        problem,
        uncertainty,
        shadow: ShadowMatrix::coordinate_projection(n0, n)?,
        poles: cross_polytope_poles(n0, radius)?,
    })
}

/// Fully adjustable value of a norm example: with `v_i = |ξ_i|` the budget is
/// `max ‖ξ‖₁` over the set, found over the `2^n` sign patterns.
pub fn norm_farc_value(example: &NormExample) -> Result<f64> {
    let n = example.uncertainty.dim();
    if n > 16 {
        return Err(Error::CapExceeded {
            what: "norm example sign patterns",
            dim: n,
            cap: 16,
        });
    }
    let mut best = f64::NEG_INFINITY;
    for mask in 0..1usize << n {
        let s = DVector::from_fn(n, |j, _| if mask >> j & 1 == 1 { 1.0 } else { -1.0 });
        best = best.max(-example.uncertainty.support_min(&s)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrc::{solve_compact, MrcSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_observation_l1_matches_farc() {
        let ex = build_norm_example(3, 3, NormKind::L1).unwrap();
        assert_eq!(ex.poles.len(), 6);
        assert_abs_diff_eq!(norm_farc_value(&ex).unwrap(), 1.0, epsilon = 1e-7);
        let spec = MrcSpec::new(ex.problem, ex.uncertainty, ex.shadow, ex.poles).unwrap();
        assert_abs_diff_eq!(
            solve_compact(&spec, 1e-8).unwrap().objective,
            1.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn l2_farc_is_root_n() {
        let ex = build_norm_example(4, 2, NormKind::L2).unwrap();
        assert_abs_diff_eq!(norm_farc_value(&ex).unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ex.poles.get(0)[0], 2f64.sqrt(), epsilon = 1e-15);
        assert!(build_norm_example(3, 4, NormKind::L1).is_err());
    }
}
