//! Pole-set construction: circumscribed simplices, cross-polytopes, and
//! the project-and-cut tightening loop.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use rayon::prelude::*;

use crate::conic::{self, default_accuracy, Affine, ConicProgram};
use crate::error::{dim_check, Error, Result};
use crate::model::{PoleSet, ShadowMatrix, Support, UncertaintySet};

const BASIS_ATTEMPTS: usize = 100;
const DET_TOL: f64 = 1e-10;
const DEFAULT_MAX_ITERATIONS: usize = 1000;
/// Poles closer than this to the set are treated as inside it.
const DISTANCE_TOL: f64 = 1e-9;
const PLANE_TOL: f64 = 1e-9;
/// Section points closer than this (ℓ1, relative) to the hull of the others
/// are dropped.
const REDUNDANCY_TOL: f64 = 1e-7;

/// `n₀ + 1` affinely independent points with their barycentric map.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexBasis {
    points: Vec<DVector<f64>>,
    /// `L = D⁻¹` with `D = [points; 1ᵀ]`; `λ(x) = L·[x; 1]`.
    barycentric_rows: DMatrix<f64>,
}

impl SimplexBasis {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        let n0 = points
            .len()
            .checked_sub(1)
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Invalid("a simplex basis needs at least two points".into()))?;
        for (k, p) in points.iter().enumerate() {
            dim_check(&format!("basis point {k}"), n0, p.len())?;
        }
        let mut d = DMatrix::from_fn(
            n0 + 1,
            n0 + 1,
            |r, c| if r < n0 { points[c][r] } else { 1.0 },
        );
        // row-scaled determinant
        let mut scaled = d.clone();
        for r in 0..=n0 {
            let m = scaled.row(r).amax();
            if m > 0.0 {
                scaled.row_mut(r).scale_mut(1.0 / m);
            }
        }
        if scaled.determinant().abs() <= DET_TOL {
            return Err(Error::Degenerate(
                "simplex basis points are affinely dependent".into(),
            ));
        }
        if !d.try_inverse_mut() {
            return Err(Error::Degenerate("simplex basis matrix is singular".into()));
        }
        Ok(Self {
            points,
            barycentric_rows: d,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn barycentric_rows(&self) -> &DMatrix<f64> {
        &self.barycentric_rows
    }

    /// Barycentric coordinates of `x`; they sum to one.
    pub fn barycentric(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        dim_check("point dimension", self.dim(), x.len())?;
        let n0 = self.dim();
        let ext = DVector::from_fn(n0 + 1, |r, _| if r < n0 { x[r] } else { 1.0 });
        Ok(&self.barycentric_rows * ext)
    }

    /// Linear part of the `i`-th barycentric form, `(l_i1, …, l_in₀)`.
    pub fn linear_form(&self, i: usize) -> DVector<f64> {
        let n0 = self.dim();
        DVector::from_fn(n0, |j, _| self.barycentric_rows[(i, j)])
    }
}

/// Points drawn uniformly on `[-1, 1]^n0`, redrawn until affinely independent.
pub fn random_affine_basis<R: Rng + ?Sized>(n0: usize, rng: &mut R) -> Result<SimplexBasis> {
    if n0 == 0 {
        return Err(Error::Invalid(
            "simplex basis dimension must be >= 1".into(),
        ));
    }
    for _ in 0..BASIS_ATTEMPTS {
        let points = (0..=n0)
            .map(|_| DVector::from_fn(n0, |_, _| rng.random_range(-1.0..=1.0)))
            .collect();
        match SimplexBasis::new(points) {
            Ok(b) => return Ok(b),
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Degenerate(format!(
        "no affinely independent basis after {BASIS_ATTEMPTS} draws"
    )))
}

/// Scaled and translated simplex `σ·S + t` covering a target.
#[derive(Clone, Debug, PartialEq)]
pub struct HomothetyResult {
    pub sigma: f64,
    pub translate: DVector<f64>,
    pub poles: PoleSet,
}

/// The image `P·Ξ` seen through its support function.
pub struct ShadowImage<'a> {
    pub set: &'a UncertaintySet,
    pub shadow: &'a ShadowMatrix,
}

impl Support for ShadowImage<'_> {
    fn dim(&self) -> usize {
        self.shadow.rows()
    }

    fn support_min(&self, a: &DVector<f64>) -> Result<f64> {
        self.set.support_min(&self.shadow.pull_back(a)?)
    }
}

impl Support for PoleSet {
    fn dim(&self) -> usize {
        PoleSet::dim(self)
    }

    fn support_min(&self, a: &DVector<f64>) -> Result<f64> {
        PoleSet::support_min(self, a)
    }
}

fn homothety(basis: &SimplexBasis, z: &[f64]) -> Result<HomothetyResult> {
    let n0 = basis.dim();
    let mut translate = DVector::zeros(n0);
    for (zi, w) in z.iter().zip(basis.points()) {
        translate += w * *zi;
    }
    let sigma = -z.iter().sum::<f64>();
    let scale = 1.0 + z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sigma <= 1e-12 * scale {
        return Ok(HomothetyResult {
            sigma: 0.0,
            poles: PoleSet::new(vec![translate.clone()])?,
            translate,
        });
    }
    let poles = basis
        .points()
        .iter()
        .map(|w| w * sigma + &translate)
        .collect();
    Ok(HomothetyResult {
        sigma,
        translate,
        poles: PoleSet::new(poles)?,
    })
}

/// Smallest homothetic copy of the basis simplex containing `target`.
pub fn circumscribe(
    basis: &SimplexBasis,
    target: &(impl Support + ?Sized),
) -> Result<HomothetyResult> {
    dim_check("circumscribe target dimension", basis.dim(), target.dim())?;
    let z = (0..=basis.dim())
        .map(|i| target.support_min(&basis.linear_form(i)))
        .collect::<Result<Vec<_>>>()?;
    homothety(basis, &z)
}

/// Closed form of [`circumscribe`] for the unit hypercube `[0,1]^n₀`.
pub fn hypercube_sigma(basis: &SimplexBasis) -> (f64, DVector<f64>) {
    let l = basis.barycentric_rows();
    let n0 = basis.dim();
    let sigma = 0.5
        * (0..=n0)
            .map(|i| (0..n0).map(|j| l[(i, j)].abs()).sum::<f64>())
            .sum::<f64>();
    let mut t = DVector::zeros(n0);
    for i in 0..=n0 {
        let zi: f64 = (0..n0).map(|j| l[(i, j)].min(0.0)).sum();
        t += &basis.points()[i] * zi;
    }
    (sigma, t)
}

/// `±radius·e_i` for each coordinate, `2·n0` poles.
pub fn cross_polytope_poles(n0: usize, radius: f64) -> Result<PoleSet> {
    if n0 == 0 || !(radius > 0.0) {
        return Err(Error::Invalid(format!(
            "cross-polytope needs n0 >= 1 and radius > 0, got {n0}, {radius}"
        )));
    }
    let mut poles = Vec::with_capacity(2 * n0);
    for i in 0..n0 {
        for sign in [1.0, -1.0] {
            let mut p = DVector::zeros(n0);
            p[i] = sign * radius;
            poles.push(p);
        }
    }
    PoleSet::new(poles)
}

/// Sign patterns enumerated by [`cross_polytope_cover`] stop here.
pub const CROSS_COVER_CAP: usize = 16;

/// `center ± r·e_i` with `r = max ‖x − center‖₁` over the target, the
/// smallest cross-polytope at `center` that covers it.
pub fn cross_polytope_cover(
    target: &(impl Support + Sync + ?Sized),
    center: &DVector<f64>,
) -> Result<PoleSet> {
    let n0 = target.dim();
    dim_check("cross-polytope center", n0, center.len())?;
    if n0 > CROSS_COVER_CAP {
        return Err(Error::CapExceeded {
            what: "cross-polytope sign patterns",
            dim: n0,
            cap: CROSS_COVER_CAP,
        });
    }
    let radius = (0..1usize << n0)
        .into_par_iter()
        .map(|mask| {
            let s = DVector::from_fn(n0, |j, _| if mask >> j & 1 == 1 { -1.0 } else { 1.0 });
            Ok(-target.support_min(&-&s)? - s.dot(center))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    if radius <= 1e-12 * (1.0 + center.amax()) {
        return PoleSet::new(vec![center.clone()]);
    }
    let offsets = cross_polytope_poles(n0, radius)?;
    PoleSet::new(offsets.iter().map(|p| p + center).collect())
}

/// Euclidean projection of `omega` onto `s`.
pub fn project(s: &UncertaintySet, omega: &DVector<f64>) -> Result<DVector<f64>> {
    dim_check("projection point", s.dim(), omega.len())?;
    match s {
        UncertaintySet::Box(b) => Ok(b.clamp(omega)),
        UncertaintySet::Ellipsoid(e) => {
            if e.gauge(omega) <= e.radius() {
                return Ok(omega.clone());
            }
            if e.radius() == 0.0 {
                return Ok(e.center().clone());
            }
            if e.is_ball() {
                let d = omega - e.center();
                let scale = e.radius() / d.norm();
                return Ok(e.center() + d * scale);
            }
            project_conic(s, omega)
        }
        UncertaintySet::Polytope(p) => {
            if s.contains(omega, 0.0)? {
                return Ok(omega.clone());
            }
            let x = project_conic(s, omega)?;
            Ok(polish_polytope_projection(p.constraint_matrix(), p.rhs(), omega, &x).unwrap_or(x))
        }
    }
}

fn project_conic(s: &UncertaintySet, omega: &DVector<f64>) -> Result<DVector<f64>> {
    let n = omega.len();
    let mut p = ConicProgram::new();
    let x = p.add_vars(n);
    let t = p.add_var();
    p.set_objective(vec![(t, 1.0)]);
    p.add_soc(
        (0..n)
            .map(|j| Affine::new(vec![(x.start + j, 1.0)], -omega[j]))
            .collect(),
        Affine::new(vec![(t, 1.0)], 0.0),
    );
    match s {
        UncertaintySet::Polytope(poly) => {
            let c = poly.constraint_matrix();
            for k in 0..c.nrows() {
                let terms = (0..n)
                    .filter(|&j| c[(k, j)] != 0.0)
                    .map(|j| (x.start + j, c[(k, j)]))
                    .collect();
                p.add_le(terms, poly.rhs()[k]);
            }
        }
        UncertaintySet::Ellipsoid(e) => {
            // ‖F(x − center)‖ <= 1
            let f = e.inverse_form().expect("radius checked positive");
            let rows = (0..n)
                .map(|r| {
                    let terms = (0..n)
                        .filter(|&j| f[(r, j)] != 0.0)
                        .map(|j| (x.start + j, f[(r, j)]))
                        .collect();
                    Affine::new(terms, -(f.row(r).transpose().dot(e.center())))
                })
                .collect();
            p.add_soc(rows, Affine::new(vec![], 1.0));
        }
        UncertaintySet::Box(_) => unreachable!("boxes are clamped"),
    }
    let r = conic::solve_optimal(&p, default_accuracy(), "projection")?;
    Ok(DVector::from_column_slice(&r.primal()?[x]))
}

/// Re-solves the projection exactly on the active rows of the interior-point
/// answer; `None` when the active set does not certify optimality.
fn polish_polytope_projection(
    c: &DMatrix<f64>,
    d: &DVector<f64>,
    omega: &DVector<f64>,
    x: &DVector<f64>,
) -> Option<DVector<f64>> {
    let scale = 1.0 + (omega - x).norm();
    let active: Vec<usize> = (0..c.nrows())
        .filter(|&k| (d[k] - c.row(k).transpose().dot(x)).abs() <= 1e-6 * scale)
        .collect();
    if active.is_empty() {
        return None;
    }
    let a = DMatrix::from_fn(active.len(), c.ncols(), |r, j| c[(active[r], j)]);
    let b = DVector::from_fn(active.len(), |r, _| d[active[r]]);
    let gram = &a * a.transpose();
    let mu = gram.pseudo_inverse(1e-12).ok()? * (&a * omega - &b);
    if mu.iter().any(|&m| m < -1e-9) {
        return None;
    }
    let y = omega - a.transpose() * &mu;
    let feasible =
        (0..c.nrows()).all(|k| c.row(k).transpose().dot(&y) <= d[k] + 1e-12 * (1.0 + d[k].abs()));
    (feasible && (&y - x).norm() <= 1e-5 * scale).then_some(y)
}

/// Largest distance from a pole to the set.
pub fn hausdorff(omega: &PoleSet, s: &UncertaintySet) -> Result<f64> {
    Ok(pole_distances(omega, s)?.into_iter().fold(0.0, f64::max))
}

fn pole_distances(omega: &PoleSet, s: &UncertaintySet) -> Result<Vec<f64>> {
    dim_check("pole dimension", s.dim(), omega.dim())?;
    omega
        .poles()
        .par_iter()
        .map(|w| Ok((w - project(s, w)?).norm()))
        .collect()
}

/// One project-and-cut step: the farthest pole is cut off by the hyperplane
/// through its projection orthogonal to the projection direction.
pub fn tighten_once(omega: &PoleSet, s: &UncertaintySet) -> Result<PoleSet> {
    let dists = pole_distances(omega, s)?;
    let max = dists.iter().cloned().fold(0.0, f64::max);
    if max <= DISTANCE_TOL {
        return Ok(omega.clone());
    }
    let k0 = dists
        .iter()
        .position(|&d| d >= max - 1e-9 * max)
        .expect("max is attained");
    let far = omega.get(k0);
    let z = project(s, far)?;
    let alpha = far - &z;
    let tol = PLANE_TOL * alpha.norm();
    let side: Vec<f64> = omega.iter().map(|w| (w - &z).dot(&alpha)).collect();

    let inner: Vec<usize> = (0..omega.len()).filter(|&i| side[i] < -tol).collect();
    let outer: Vec<usize> = (0..omega.len()).filter(|&i| side[i] > tol).collect();
    if inner.is_empty() {
        return Err(Error::Degenerate(format!(
            "no pole strictly inside the cut of pole {k0}; the set lies in the hyperplane"
        )));
    }
    let mut section: Vec<DVector<f64>> = (0..omega.len())
        .filter(|&i| side[i].abs() <= tol)
        .map(|i| omega.get(i).clone())
        .collect();
    for &i in &outer {
        for &j in &inner {
            let t = side[i] / (side[i] - side[j]);
            section.push(omega.get(i) + (omega.get(j) - omega.get(i)) * t);
        }
    }

    let scale = 1.0 + section.iter().fold(0.0f64, |m, p| m.max(p.amax()));
    let keep = extreme_indices(&section, REDUNDANCY_TOL * scale)?;
    let mut out: Vec<DVector<f64>> = inner.iter().map(|&i| omega.get(i).clone()).collect();
    out.extend(keep.into_iter().map(|k| section[k].clone()));
    PoleSet::new(out)
}

/// Index of the lexicographic maximum of `a·p` over `points`; ties within
/// `1e-12` relative go to the lexicographically largest point, which keeps
/// the winner extreme.
fn lex_argmax(points: &[DVector<f64>], a: &DVector<f64>) -> usize {
    let vals: Vec<f64> = points.iter().map(|p| a.dot(p)).collect();
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * (1.0 + best.abs());
    (0..points.len())
        .filter(|&i| vals[i] >= best - slack)
        .max_by(|&i, &j| {
            points[i]
                .iter()
                .zip(points[j].iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(j.cmp(&i))
        })
        .expect("nonempty points")
}

/// `max a·q − max_{e∈E} a·e` over `‖a‖∞ <= 1`: the ℓ1 distance from `q` to
/// `conv E`, with the maximizing direction.
fn separation(
    points: &[DVector<f64>],
    ext: &[usize],
    q: &DVector<f64>,
) -> Result<(f64, DVector<f64>)> {
    let n = q.len();
    let mut p = ConicProgram::new();
    let a = p.add_vars(n);
    let b = p.add_var();
    let mut obj: Vec<(usize, f64)> = a.clone().zip(q.iter()).map(|(j, &c)| (j, -c)).collect();
    obj.push((b, 1.0));
    p.set_objective(obj);
    for &e in ext {
        let mut t: Vec<(usize, f64)> = a
            .clone()
            .zip(points[e].iter())
            .map(|(j, &c)| (j, c))
            .collect();
        t.push((b, -1.0));
        p.add_le(t, 0.0);
    }
    for j in a.clone() {
        p.add_le(vec![(j, 1.0)], 1.0);
        p.add_ge(vec![(j, 1.0)], -1.0);
    }
    let r = conic::solve_optimal(&p, default_accuracy(), "extreme-point separation")?;
    let x = r.primal()?;
    Ok((-r.objective, DVector::from_column_slice(&x[a])))
}

/// Indices of the extreme points of `points` in input order (Clarkson's
/// output-sensitive scheme: every LP is against confirmed extreme points only).
pub(crate) fn extreme_indices(points: &[DVector<f64>], tol: f64) -> Result<Vec<usize>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    let mut is_ext = vec![false; points.len()];
    let mut ext = vec![lex_argmax(
        points,
        &DVector::from_fn(n, |j, _| if j == 0 { 1.0 } else { 0.0 }),
    )];
    is_ext[ext[0]] = true;
    for q in 0..points.len() {
        while !is_ext[q] {
            let (dist, a) = separation(points, &ext, &points[q])?;
            if dist <= tol {
                break;
            }
            let mut best = lex_argmax(points, &a);
            if is_ext[best] {
                // the direction only separates q within solver noise
                best = q;
            }
            is_ext[best] = true;
            ext.push(best);
        }
    }
    Ok((0..points.len()).filter(|&i| is_ext[i]).collect())
}

/// Repeated [`tighten_once`]; the returned trajectory starts with `omega`.
pub fn tighten(omega: &PoleSet, s: &UncertaintySet, max_poles: usize) -> Result<Vec<PoleSet>> {
    tighten_with(omega, s, max_poles, DEFAULT_MAX_ITERATIONS)
}

pub fn tighten_with(
    omega: &PoleSet,
    s: &UncertaintySet,
    max_poles: usize,
    max_iterations: usize,
) -> Result<Vec<PoleSet>> {
    let mut seq = vec![omega.clone()];
    for _ in 0..max_iterations {
        let last = seq.last().expect("nonempty");
        if last.len() >= max_poles {
            break;
        }
        let next = tighten_once(last, s)?;
        let unchanged = &next == last;
        seq.push(next);
        if unchanged {
            break;
        }
    }
    Ok(seq)
}
