//! Linear and second-order-cone programs behind one small contract.
//!
//! A [`ConicProgram`] holds a linear objective (always minimized), linear
//! `<=`/`=` rows and constraints of the form `‖A·x + b‖₂ <= c·x + d`.
//! [`solve`] hands the program to the Clarabel interior-point solver and maps
//! its answer back onto the program's own row order.

use std::fmt::Write as _;
use std::ops::Range;
use std::sync::OnceLock;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use crate::error::{Error, Result};

/// Backend accuracy used when callers do not pick one.
pub const DEFAULT_ACCURACY: f64 = 1e-8;

/// Environment variable that overrides [`DEFAULT_ACCURACY`] process-wide.
pub const ACCURACY_ENV: &str = "MPRO_ACCURACY";

/// Parses an accuracy override; it must be a finite number in `(0, 1)`.
pub fn parse_accuracy(text: &str) -> Result<f64> {
    match text.trim().parse::<f64>() {
        Ok(a) if a > 0.0 && a < 1.0 => Ok(a),
        _ => Err(Error::Invalid(format!(
            "{ACCURACY_ENV} must be a number in (0, 1), got {text:?}"
        ))),
    }
}

/// [`DEFAULT_ACCURACY`] unless [`ACCURACY_ENV`] is set, read once.
pub fn default_accuracy() -> f64 {
    static ACCURACY: OnceLock<f64> = OnceLock::new();
    *ACCURACY.get_or_init(|| match std::env::var(ACCURACY_ENV) {
        Ok(text) => parse_accuracy(&text).unwrap_or_else(|e| {
            log::warn!("{e}; using {DEFAULT_ACCURACY}");
            DEFAULT_ACCURACY
        }),
        Err(_) => DEFAULT_ACCURACY,
    })
}

/// Sparse linear form `Σ coeff·x[index]`.
pub type Terms = Vec<(usize, f64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub terms: Terms,
    pub relation: Relation,
    pub rhs: f64,
}

/// Affine scalar `terms·x + constant`.
#[derive(Clone, Debug, Default)]
pub struct Affine {
    pub terms: Terms,
    pub constant: f64,
}

impl Affine {
    pub fn new(terms: Terms, constant: f64) -> Self {
        Self { terms, constant }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + dot_terms(&self.terms, x)
    }
}

/// `‖(rows[k](x))_k‖₂ <= bound(x)`.
#[derive(Clone, Debug)]
pub struct SocConstraint {
    pub rows: Vec<Affine>,
    pub bound: Affine,
}

#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    variable_count: usize,
    objective: Terms,
    linear: Vec<LinearConstraint>,
    soc: Vec<SocConstraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: Status,
    /// Present iff `status == Optimal`.
    pub primal: Option<Vec<f64>>,
    /// One multiplier per linear constraint, in insertion order. For a `<=`
    /// row the multiplier is nonnegative and the Lagrangian is
    /// `c·x + Σ y_k (a_k·x − b_k)`.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: u32,
    /// Largest absolute constraint violation of the returned primal point.
    pub max_violation: f64,
    pub diagnostic: Option<String>,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn primal(&self) -> Result<&[f64]> {
        self.primal
            .as_deref()
            .ok_or_else(|| Error::Solver(format!("no primal point, status {:?}", self.status)))
    }
}

fn dot_terms(terms: &[(usize, f64)], x: &[f64]) -> f64 {
    terms.iter().map(|&(j, a)| a * x[j]).sum()
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn add_var(&mut self) -> usize {
        self.variable_count += 1;
        self.variable_count - 1
    }

    pub fn add_vars(&mut self, count: usize) -> Range<usize> {
        let start = self.variable_count;
        self.variable_count += count;
        start..self.variable_count
    }

    pub fn set_objective(&mut self, terms: Terms) {
        self.objective = terms;
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn linear_constraints(&self) -> &[LinearConstraint] {
        &self.linear
    }

    pub fn soc_constraints(&self) -> &[SocConstraint] {
        &self.soc
    }

    /// `terms·x <= rhs`; returns the row index.
    pub fn add_le(&mut self, terms: Terms, rhs: f64) -> usize {
        self.linear.push(LinearConstraint {
            terms,
            relation: Relation::Le,
            rhs,
        });
        self.linear.len() - 1
    }

    /// `terms·x >= rhs`, stored as a negated `<=` row.
    pub fn add_ge(&mut self, terms: Terms, rhs: f64) -> usize {
        let neg = terms.into_iter().map(|(j, a)| (j, -a)).collect();
        self.add_le(neg, -rhs)
    }

    pub fn add_eq(&mut self, terms: Terms, rhs: f64) -> usize {
        self.linear.push(LinearConstraint {
            terms,
            relation: Relation::Eq,
            rhs,
        });
        self.linear.len() - 1
    }

    pub fn add_soc(&mut self, rows: Vec<Affine>, bound: Affine) -> usize {
        self.soc.push(SocConstraint { rows, bound });
        self.soc.len() - 1
    }

    pub fn is_lp(&self) -> bool {
        self.soc.is_empty()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot_terms(&self.objective, x)
    }

    fn validate(&self) -> Result<()> {
        let n = self.variable_count;
        let bad = |terms: &Terms| terms.iter().any(|&(j, a)| j >= n || !a.is_finite());
        if bad(&self.objective) {
            return Err(Error::Invalid(
                "objective references unknown variable or non-finite value".into(),
            ));
        }
        for (k, c) in self.linear.iter().enumerate() {
            if bad(&c.terms) || !c.rhs.is_finite() {
                return Err(Error::Invalid(format!(
                    "linear constraint {k} is malformed"
                )));
            }
        }
        for (k, c) in self.soc.iter().enumerate() {
            if bad(&c.bound.terms) || c.rows.iter().any(|r| bad(&r.terms)) {
                return Err(Error::Invalid(format!("cone constraint {k} is malformed")));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.linear {
            let lhs = dot_terms(&c.terms, x);
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for c in &self.soc {
            let norm = c.rows.iter().map(|r| r.eval(x).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(norm - c.bound.eval(x));
        }
        worst
    }

    /// Writes the program in CPLEX LP text format. Only programs without
    /// cone constraints can be exported.
    pub fn to_lp_format(&self) -> Result<String> {
        if !self.is_lp() {
            return Err(Error::Invalid(
                "LP export requires a program without cone constraints".into(),
            ));
        }
        let mut out = String::new();
        let fmt_terms = |terms: &Terms| -> String {
            if terms.is_empty() {
                return "0 x0".to_string();
            }
            let mut s = String::new();
            for (k, &(j, a)) in terms.iter().enumerate() {
                let sign = if a < 0.0 {
                    "-"
                } else if k > 0 {
                    "+"
                } else {
                    ""
                };
                let _ = write!(
                    s,
                    "{}{} {:e} x{}",
                    if k > 0 { " " } else { "" },
                    sign,
                    a.abs(),
                    j
                );
            }
            s
        };
        out.push_str("\\ exported by multipolar\nMinimize\n obj: ");
        out.push_str(&fmt_terms(&self.objective));
        out.push_str("\nSubject To\n");
        for (k, c) in self.linear.iter().enumerate() {
            let op = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " c{k}: {} {op} {:e}", fmt_terms(&c.terms), c.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.variable_count.max(1) {
            let _ = writeln!(out, " x{j} free");
        }
        out.push_str("End\n");
        Ok(out)
    }
}

/// Step fraction for the retry after a reduced-accuracy stop.
const RETRY_STEP_FRACTION: f64 = 0.95;

fn settings(accuracy: f64) -> DefaultSettings<f64> {
    DefaultSettings {
        verbose: false,
        tol_gap_abs: accuracy,
        tol_gap_rel: accuracy,
        tol_feas: accuracy,
        tol_ktratio: accuracy.max(1e-10) * 1e-2,
        max_iter: 400,
        ..DefaultSettings::default()
    }
}

/// Solves `p` to the requested accuracy.
///
/// Only a malformed program makes this return `Err`; solver outcomes,
/// including numerical trouble, are reported through [`SolveResult::status`].
pub fn solve(p: &ConicProgram, accuracy: f64) -> Result<SolveResult> {
    p.validate()?;
    if !(accuracy > 0.0) {
        return Err(Error::Invalid(format!(
            "accuracy must be positive, got {accuracy}"
        )));
    }
    let n = p.variable_count;
    if n == 0 {
        let feasible = p.max_violation(&[]) <= accuracy;
        return Ok(SolveResult {
            status: if feasible {
                Status::Optimal
            } else {
                Status::Infeasible
            },
            primal: feasible.then(Vec::new),
            duals: vec![0.0; p.linear.len()],
            objective: 0.0,
            iterations: 0,
            max_violation: 0.0,
            diagnostic: None,
        });
    }

    // Row order handed to the backend: equalities, inequalities, cones.
    let mut rows_i = Vec::new();
    let mut rows_j = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::new();
    let mut backend_row = vec![0usize; p.linear.len()];
    let mut next = 0usize;
    let mut push_row = |terms: &Terms, sign: f64, rhs: f64, next: &mut usize| {
        for &(j, a) in terms {
            if a != 0.0 {
                rows_i.push(*next);
                rows_j.push(j);
                vals.push(sign * a);
            }
        }
        b.push(rhs);
        *next += 1;
    };
    let eqs: Vec<usize> = (0..p.linear.len())
        .filter(|&k| p.linear[k].relation == Relation::Eq)
        .collect();
    let les: Vec<usize> = (0..p.linear.len())
        .filter(|&k| p.linear[k].relation == Relation::Le)
        .collect();
    for &k in &eqs {
        backend_row[k] = next;
        push_row(&p.linear[k].terms, 1.0, p.linear[k].rhs, &mut next);
    }
    // Cones with an empty norm vector degrade to `bound(x) >= 0`.
    let (empty_socs, socs): (Vec<&SocConstraint>, Vec<&SocConstraint>) =
        p.soc.iter().partition(|c| c.rows.is_empty());
    for &k in &les {
        backend_row[k] = next;
        push_row(&p.linear[k].terms, 1.0, p.linear[k].rhs, &mut next);
    }
    for c in &empty_socs {
        push_row(&c.bound.terms, -1.0, c.bound.constant, &mut next);
    }
    let mut cones = Vec::new();
    if !eqs.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(eqs.len()));
    }
    if les.len() + empty_socs.len() > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(
            les.len() + empty_socs.len(),
        ));
    }
    for c in &socs {
        // s = b − A x must lie in the cone: s₀ = bound(x), s_k = rows_k(x).
        push_row(&c.bound.terms, -1.0, c.bound.constant, &mut next);
        for r in &c.rows {
            push_row(&r.terms, -1.0, r.constant, &mut next);
        }
        cones.push(SupportedConeT::SecondOrderConeT(c.rows.len() + 1));
    }

    let mut q = vec![0.0; n];
    for &(j, a) in &p.objective {
        q[j] += a;
    }
    let a_mat = CscMatrix::new_from_triplets(next, n, rows_i, rows_j, vals);
    let p_mat = CscMatrix::<f64>::zeros((n, n));

    let run = |settings: DefaultSettings<f64>| -> Result<DefaultSolver<f64>> {
        let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, settings)
            .map_err(|e| Error::Solver(format!("backend setup failed: {e:?}")))?;
        solver.solve();
        Ok(solver)
    };
    let mut solver = run(settings(accuracy))?;
    // degenerate programs can stall near the boundary with full steps
    if solver.solution.status == SolverStatus::AlmostSolved {
        let retry = run(DefaultSettings {
            max_step_fraction: RETRY_STEP_FRACTION,
            ..settings(accuracy)
        })?;
        if retry.solution.status == SolverStatus::Solved {
            solver = retry;
        }
    }
    let sol = &solver.solution;

    let duals_from = |z: &[f64]| -> Vec<f64> {
        (0..p.linear.len())
            .map(|k| z.get(backend_row[k]).copied().unwrap_or(0.0))
            .collect()
    };

    let base = |status: Status, diagnostic: Option<String>| SolveResult {
        status,
        primal: None,
        duals: vec![0.0; p.linear.len()],
        objective: f64::NAN,
        iterations: sol.iterations,
        max_violation: f64::NAN,
        diagnostic,
    };

    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let x = sol.x.clone();
            let violation = p.max_violation(&x);
            let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())) + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !violation.is_finite() || violation > accuracy.sqrt() * scale {
                return Ok(base(
                    Status::NumericalFailure,
                    Some(format!("backend reported {:?} but primal violation is {violation:e}", sol.status)),
                ));
            }
            Ok(SolveResult {
                status: Status::Optimal,
                objective: p.objective_value(&x),
                duals: duals_from(&sol.z),
                primal: Some(x),
                iterations: sol.iterations,
                max_violation: violation,
                diagnostic: (sol.status == SolverStatus::AlmostSolved).then(|| "reduced accuracy".to_string()),
            })
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => Ok(base(Status::Infeasible, None)),
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => Ok(base(Status::Unbounded, None)),
        other => Ok(base(
            Status::NumericalFailure,
            Some(format!(
                "backend status {other:?} after {} iterations (primal residual {:e}, dual residual {:e})",
                sol.iterations, sol.r_prim, sol.r_dual
            )),
        )),
    }
}

/// Solves and insists on an optimal answer.
pub(crate) fn solve_optimal(p: &ConicProgram, accuracy: f64, what: &str) -> Result<SolveResult> {
    let r = solve(p, accuracy)?;
    match r.status {
        Status::Optimal => Ok(r),
        Status::Infeasible => Err(Error::Infeasible(what.to_string())),
        Status::Unbounded => Err(Error::Unbounded(what.to_string())),
        Status::NumericalFailure => Err(Error::Solver(format!(
            "{what}: {}",
            r.diagnostic.unwrap_or_else(|| "numerical failure".into())
        ))),
    }
}

/// Lagrange multipliers of an optimal LP, one per linear constraint.
pub fn lp_dual_values(p: &ConicProgram, result: &SolveResult) -> Result<Vec<f64>> {
    if !p.is_lp() {
        return Err(Error::Invalid(
            "dual values are only exposed for linear programs".into(),
        ));
    }
    if result.status != Status::Optimal {
        return Err(Error::Solver(format!(
            "dual values need an optimal result, got {:?}",
            result.status
        )));
    }
    if result.duals.len() != p.linear.len() {
        return Err(Error::Dimension(
            "result does not belong to this program".into(),
        ));
    }
    Ok(result.duals.clone())
}

/// Dual objective `−Σ y_k b_k` of an LP at the given multipliers.
pub fn lp_dual_objective(p: &ConicProgram, duals: &[f64]) -> f64 {
    -p.linear
        .iter()
        .zip(duals)
        .map(|(c, y)| c.rhs * y)
        .sum::<f64>()
}
