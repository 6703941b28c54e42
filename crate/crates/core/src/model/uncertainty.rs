use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::conic::{self, default_accuracy, ConicProgram, Status};
use crate::error::{dim_check, Error, Result};

/// Largest box dimension whose vertices are enumerated without an explicit cap.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Vertex enumeration of a general polytope is attempted when the number of
/// candidate bases `C(n_d, dim)` stays below this.
const POLYTOPE_BASIS_CAP: u128 = 1 << 20;
pub const POLYTOPE_VERTEX_CAP: usize = 1 << 16;

/// Anything with a computable linear minimum.
pub trait Support {
    fn dim(&self) -> usize;

    /// `min { a·x : x in self }`.
    fn support_min(&self, a: &DVector<f64>) -> Result<f64>;
}

/// `{ξ : C·ξ <= d}`, certified nonempty and bounded at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    c: DMatrix<f64>,
    d: DVector<f64>,
}

/// `[lower, upper]` componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

/// `{center + radius·M·s : ‖s‖₂ <= 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    center: DVector<f64>,
    radius: f64,
    shape: DMatrix<f64>,
    shape_inv: DMatrix<f64>,
    identity_shape: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UncertaintySet {
    Polytope(Polytope),
    Box(BoxSet),
    Ellipsoid(Ellipsoid),
}

fn dense_terms(a: impl IntoIterator<Item = f64>, offset: usize) -> Vec<(usize, f64)> {
    a.into_iter()
        .enumerate()
        .filter(|(_, v)| *v != 0.0)
        .map(|(j, v)| (offset + j, v))
        .collect()
}

impl Polytope {
    pub fn new(c: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        dim_check("polytope rhs length", c.nrows(), d.len())?;
        if c.ncols() == 0 {
            return Err(Error::Invalid(
                "polytope must have positive dimension".into(),
            ));
        }
        if c.iter().chain(d.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Invalid("polytope data must be finite".into()));
        }
        let p = Self { c, d };
        let dim = p.dim();
        // nonempty
        let mut feas = p.lp_over(0);
        feas.set_objective(vec![]);
        match conic::solve(&feas, default_accuracy())?.status {
            Status::Optimal => {}
            Status::Infeasible => return Err(Error::Invalid("polytope is empty".into())),
            s => {
                return Err(Error::Solver(format!(
                    "polytope feasibility check ended with {s:?}"
                )))
            }
        }
        // bounded
        for j in 0..dim {
            for sign in [1.0, -1.0] {
                let mut e = DVector::zeros(dim);
                e[j] = sign;
                match p.support_point(&e) {
                    Ok(_) => {}
                    Err(Error::Unbounded(_)) => {
                        return Err(Error::Invalid(format!(
                            "polytope is unbounded along coordinate {j}"
                        )))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let (_, radius) = p.chebyshev_center()?;
        if radius < 1e-9 {
            log::warn!(
                "polytope has empty interior (inscribed radius {radius:e}); accepted as a flat set"
            );
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.c.ncols()
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.d
    }

    /// Program with the polytope's variables at `offset..offset+dim`, rows `C·x <= d` added.
    fn lp_over(&self, extra_vars: usize) -> ConicProgram {
        let mut p = ConicProgram::new();
        p.add_vars(self.dim() + extra_vars);
        for k in 0..self.c.nrows() {
            p.add_le(dense_terms(self.c.row(k).iter().copied(), 0), self.d[k]);
        }
        p
    }

    pub fn support_point(&self, a: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let mut p = self.lp_over(0);
        p.set_objective(dense_terms(a.iter().copied(), 0));
        let r = conic::solve_optimal(&p, default_accuracy(), "polytope support")?;
        let x = DVector::from_vec(r.primal()?.to_vec());
        Ok((a.dot(&x), x))
    }

    /// Center and radius of the largest inscribed ball.
    pub fn chebyshev_center(&self) -> Result<(DVector<f64>, f64)> {
        let dim = self.dim();
        let mut p = ConicProgram::new();
        p.add_vars(dim);
        let r = p.add_var();
        for k in 0..self.c.nrows() {
            let norm = self.c.row(k).norm();
            let mut t = dense_terms(self.c.row(k).iter().copied(), 0);
            t.push((r, norm));
            p.add_le(t, self.d[k]);
        }
        // cap the radius so unbounded directions in degenerate inputs cannot blow up
        p.add_le(vec![(r, 1.0)], 1e6);
        p.set_objective(vec![(r, -1.0)]);
        let res = conic::solve_optimal(&p, default_accuracy(), "chebyshev center")?;
        let x = res.primal()?;
        Ok((DVector::from_column_slice(&x[..dim]), x[r].max(0.0)))
    }

    /// Brute-force vertex enumeration over all `dim`-subsets of rows.
    /// Returns `None` when the subset count or vertex count exceeds the caps.
    pub fn vertices(&self) -> Option<Vec<DVector<f64>>> {
        let dim = self.dim();
        let rows = self.c.nrows();
        if binomial(rows, dim) > POLYTOPE_BASIS_CAP {
            return None;
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut idx: Vec<usize> = (0..dim).collect();
        if rows < dim {
            return Some(out);
        }
        loop {
            let sub = DMatrix::from_fn(dim, dim, |r, c| self.c[(idx[r], c)]);
            let rhs = DVector::from_fn(dim, |r, _| self.d[idx[r]]);
            if let Some(x) = sub.lu().solve(&rhs) {
                let feasible = (0..rows).all(|k| {
                    self.c.row(k).transpose().dot(&x) <= self.d[k] + 1e-9 * (1.0 + self.d[k].abs())
                });
                if feasible && x.iter().all(|v| v.is_finite()) {
                    let key: Vec<i64> = x.iter().map(|v| (v * 1e9).round() as i64).collect();
                    if seen.insert(key) {
                        out.push(x);
                        if out.len() > POLYTOPE_VERTEX_CAP {
                            return None;
                        }
                    }
                }
            }
            // next combination
            let mut i = dim;
            loop {
                if i == 0 {
                    return Some(out);
                }
                i -= 1;
                if idx[i] != i + rows - dim {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..dim {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    fn sample_hit_and_run<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
    ) -> Result<Vec<DVector<f64>>> {
        let dim = self.dim();
        let (mut x, _) = self.chebyshev_center()?;
        let mut out = Vec::with_capacity(count);
        let burn = 10 * dim;
        let mut step = 0usize;
        while out.len() < count {
            let dir = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = dir.norm();
            if norm == 0.0 {
                continue;
            }
            let dir = dir / norm;
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for k in 0..self.c.nrows() {
                let a = self.c.row(k).transpose();
                let rate = a.dot(&dir);
                let room = self.d[k] - a.dot(&x);
                if rate > 1e-14 {
                    hi = hi.min(room / rate);
                } else if rate < -1e-14 {
                    lo = lo.max(room / rate);
                }
            }
            if lo.is_finite() && hi.is_finite() && hi >= lo {
                let t = lo + (hi - lo) * rng.random::<f64>();
                x += dir * t;
            }
            step += 1;
            if step > burn {
                out.push(x.clone());
            }
        }
        Ok(out)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

impl BoxSet {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        dim_check("box bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Invalid("box must have positive dimension".into()));
        }
        if lower
            .iter()
            .zip(upper.iter())
            .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
        {
            return Err(Error::Invalid(
                "box needs finite bounds with lower <= upper".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lower: DVector::zeros(dim),
            upper: DVector::from_element(dim, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn is_unit_cube(&self) -> bool {
        self.lower.iter().all(|&l| l == 0.0) && self.upper.iter().all(|&u| u == 1.0)
    }

    pub fn clamp(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| x[j].clamp(self.lower[j], self.upper[j]))
    }

    pub fn to_polytope(&self) -> Polytope {
        let n = self.dim();
        let mut c = DMatrix::zeros(2 * n, n);
        let mut d = DVector::zeros(2 * n);
        for j in 0..n {
            c[(j, j)] = 1.0;
            d[j] = self.upper[j];
            c[(n + j, j)] = -1.0;
            d[n + j] = -self.lower[j];
        }
        Polytope { c, d }
    }
}

/// All `2^dim` corners of `b`; corner `k` takes `upper[j]` where bit `j` of `k` is set.
pub fn box_vertices(b: &BoxSet, cap: usize) -> Result<Vec<DVector<f64>>> {
    let n = b.dim();
    if n > cap || n >= usize::BITS as usize {
        return Err(Error::CapExceeded {
            what: "box vertex enumeration",
            dim: n,
            cap,
        });
    }
    Ok((0..1usize << n)
        .map(|k| {
            DVector::from_fn(n, |j, _| {
                if k >> j & 1 == 1 {
                    b.upper[j]
                } else {
                    b.lower[j]
                }
            })
        })
        .collect())
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, radius: f64, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if n == 0 {
            return Err(Error::Invalid(
                "ellipsoid must have positive dimension".into(),
            ));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Invalid(format!(
                "ellipsoid radius must be finite and >= 0, got {radius}"
            )));
        }
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::Dimension(format!("ellipsoid shape must be {n}x{n}")));
        }
        let sv = shape.clone().svd(false, false).singular_values;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if !(smin > 1e-12 * smax.max(1.0)) {
            return Err(Error::Invalid("ellipsoid shape matrix is singular".into()));
        }
        let shape_inv = shape
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("ellipsoid shape matrix is singular".into()))?;
        let identity_shape = shape == DMatrix::identity(n, n);
        Ok(Self {
            center,
            radius,
            shape,
            shape_inv,
            identity_shape,
        })
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::new(center, radius, DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn is_ball(&self) -> bool {
        self.identity_shape
    }

    /// `F` with `Ξ = {ξ : ‖F(ξ − center)‖₂ <= 1}`; `None` for a point ellipsoid.
    pub fn inverse_form(&self) -> Option<DMatrix<f64>> {
        (self.radius > 0.0).then(|| &self.shape_inv / self.radius)
    }

    /// `‖M⁻¹(x − center)‖₂`.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        (&self.shape_inv * (x - &self.center)).norm()
    }

    pub fn point(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.center + &self.shape * s * self.radius
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

impl UncertaintySet {
    pub fn polytope(c: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        Polytope::new(c, d).map(Self::Polytope)
    }

    pub fn boxed(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        BoxSet::new(lower, upper).map(Self::Box)
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self::Box(BoxSet::unit(dim))
    }

    pub fn ellipsoid(center: DVector<f64>, radius: f64, shape: DMatrix<f64>) -> Result<Self> {
        Ellipsoid::new(center, radius, shape).map(Self::Ellipsoid)
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        Ellipsoid::ball(center, radius).map(Self::Ellipsoid)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Polytope(p) => p.dim(),
            Self::Box(b) => b.dim(),
            Self::Ellipsoid(e) => e.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Polytope(_) => "polytope",
            Self::Box(_) => "box",
            Self::Ellipsoid(_) => "ellipsoid",
        }
    }

    /// Whether `x` satisfies the defining inequalities within `tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        dim_check("point dimension", self.dim(), x.len())?;
        Ok(match self {
            Self::Polytope(p) => {
                (0..p.c.nrows()).all(|k| p.c.row(k).transpose().dot(x) - p.d[k] <= tol)
            }
            Self::Box(b) => {
                (0..b.dim()).all(|j| x[j] >= b.lower[j] - tol && x[j] <= b.upper[j] + tol)
            }
            Self::Ellipsoid(e) => e.gauge(x) - e.radius <= tol,
        })
    }

    /// Minimizer of `a·x` over the set together with the minimum.
    pub fn support_point(&self, a: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        dim_check("direction dimension", self.dim(), a.len())?;
        match self {
            Self::Polytope(p) => p.support_point(a),
            Self::Box(b) => {
                let x =
                    DVector::from_fn(
                        b.dim(),
                        |j, _| if a[j] >= 0.0 { b.lower[j] } else { b.upper[j] },
                    );
                Ok((a.dot(&x), x))
            }
            Self::Ellipsoid(e) => {
                let mta = e.shape.tr_mul(a);
                let norm = mta.norm();
                if norm == 0.0 || e.radius == 0.0 {
                    return Ok((a.dot(&e.center), e.center.clone()));
                }
                let x = &e.center - &e.shape * &mta * (e.radius / norm);
                Ok((a.dot(&e.center) - e.radius * norm, x))
            }
        }
    }

    /// A point of the set away from its boundary when the set has interior.
    pub fn interior_point(&self) -> Result<DVector<f64>> {
        match self {
            Self::Polytope(p) => Ok(p.chebyshev_center()?.0),
            Self::Box(b) => Ok((&b.lower + &b.upper) * 0.5),
            Self::Ellipsoid(e) => Ok(e.center.clone()),
        }
    }

    /// Polyhedral description; `None` for ellipsoids.
    pub fn as_polytope(&self) -> Option<Polytope> {
        match self {
            Self::Polytope(p) => Some(p.clone()),
            Self::Box(b) => Some(b.to_polytope()),
            Self::Ellipsoid(_) => None,
        }
    }

    /// Extreme points when they are finite and few enough to list.
    pub fn vertices(&self, cap: usize) -> Option<Vec<DVector<f64>>> {
        match self {
            Self::Box(b) => box_vertices(b, cap).ok(),
            Self::Polytope(p) => p.vertices(),
            Self::Ellipsoid(e) if e.radius == 0.0 => Some(vec![e.center.clone()]),
            Self::Ellipsoid(_) => None,
        }
    }

    /// Single point the set reduces to, if any.
    pub fn singleton(&self) -> Option<DVector<f64>> {
        match self {
            Self::Box(b) if b.lower == b.upper => Some(b.lower.clone()),
            Self::Ellipsoid(e) if e.radius == 0.0 => Some(e.center.clone()),
            _ => None,
        }
    }

    /// `count` points of the set, drawn from `rng` (uniform for boxes and
    /// ellipsoids, hit-and-run for polytopes).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<DVector<f64>>> {
        match self {
            Self::Box(b) => Ok((0..count)
                .map(|_| {
                    DVector::from_fn(b.dim(), |j, _| {
                        b.lower[j] + (b.upper[j] - b.lower[j]) * rng.random::<f64>()
                    })
                })
                .collect()),
            Self::Ellipsoid(e) => {
                let n = e.dim() as f64;
                Ok((0..count)
                    .map(|_| {
                        let s = random_unit(rng, e.dim()) * rng.random::<f64>().powf(1.0 / n);
                        e.point(&s)
                    })
                    .collect())
            }
            Self::Polytope(p) => p.sample_hit_and_run(rng, count),
        }
    }

    /// Points on the boundary: support points along random directions (for
    /// ellipsoids exactly the image of uniform directions on the sphere).
    pub fn sample_boundary<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
    ) -> Result<Vec<DVector<f64>>> {
        match self {
            Self::Ellipsoid(e) => Ok((0..count)
                .map(|_| e.point(&random_unit(rng, e.dim())))
                .collect()),
            _ => (0..count)
                .map(|_| Ok(self.support_point(&random_unit(rng, self.dim()))?.1))
                .collect(),
        }
    }
}

impl Support for UncertaintySet {
    fn dim(&self) -> usize {
        UncertaintySet::dim(self)
    }

    fn support_min(&self, a: &DVector<f64>) -> Result<f64> {
        Ok(self.support_point(a)?.0)
    }
}

/// `min { a·x : x in s }`.
pub fn support_min(s: &UncertaintySet, a: &DVector<f64>) -> Result<f64> {
    Ok(s.support_point(a)?.0)
}

pub fn contains(s: &UncertaintySet, x: &DVector<f64>, tol: f64) -> Result<bool> {
    s.contains(x, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn square_corners_in_bit_order() {
        let got = box_vertices(&BoxSet::unit(2), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(
            got,
            vec![
                v(&[0.0, 0.0]),
                v(&[1.0, 0.0]),
                v(&[0.0, 1.0]),
                v(&[1.0, 1.0])
            ]
        );
    }

    #[test]
    fn nine_cube_has_512_corners() {
        assert_eq!(
            box_vertices(&BoxSet::unit(9), DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .len(),
            512
        );
        assert_eq!(
            box_vertices(&BoxSet::unit(1), DEFAULT_ENUMERATION_CAP).unwrap(),
            vec![v(&[0.0]), v(&[1.0])]
        );
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        assert!(matches!(
            box_vertices(&BoxSet::unit(21), DEFAULT_ENUMERATION_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn membership_edge_cases() {
        let tol = 1e-8;
        let ball = UncertaintySet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(ball.contains(&v(&[0.0, 0.0]), tol).unwrap());
        assert!(!ball.contains(&v(&[1.0 + 10.0 * tol, 0.0]), tol).unwrap());
        let cube = UncertaintySet::unit_cube(3);
        assert!(cube.contains(&v(&[0.0, 0.0, 0.0]), tol).unwrap());
        assert!(cube.contains(&v(&[0.0]), tol).is_err());
    }

    #[test]
    fn support_examples() {
        let cube = UncertaintySet::unit_cube(2);
        assert_abs_diff_eq!(support_min(&cube, &v(&[-1.0, -1.0])).unwrap(), -2.0);
        let ball = UncertaintySet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_abs_diff_eq!(
            support_min(&ball, &v(&[1.0, 0.0])).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        let tri = UncertaintySet::polytope(
            DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]),
            v(&[0.0, 0.0, 1.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(
            support_min(&tri, &v(&[1.0, 1.0])).unwrap(),
            0.0,
            epsilon = 1e-7
        );
    }

    #[test]
    fn empty_and_unbounded_polytopes_rejected() {
        let empty =
            UncertaintySet::polytope(DMatrix::from_row_slice(2, 1, &[1.0, -1.0]), v(&[-1.0, 0.0]));
        assert!(matches!(empty, Err(Error::Invalid(_))));
        let ray = UncertaintySet::polytope(DMatrix::from_row_slice(1, 1, &[-1.0]), v(&[0.0]));
        assert!(matches!(ray, Err(Error::Invalid(_))));
    }

    #[test]
    fn flat_polytope_is_accepted() {
        // segment {x1 = 0, 0 <= x2 <= 1} in the plane
        let seg = UncertaintySet::polytope(
            DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]),
            v(&[0.0, 0.0, 1.0, 0.0]),
        );
        assert!(seg.is_ok());
    }

    #[test]
    fn triangle_vertices_enumerated() {
        let tri = Polytope::new(
            DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]),
            v(&[0.0, 0.0, 1.0]),
        )
        .unwrap();
        let mut vs = tri.vertices().unwrap();
        vs.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
        assert_eq!(vs.len(), 3);
        assert_abs_diff_eq!(vs[2][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ellipsoid_rejects_singular_shape() {
        let e = Ellipsoid::new(
            v(&[0.0, 0.0]),
            1.0,
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        );
        assert!(e.is_err());
        assert!(Ellipsoid::ball(v(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn samples_lie_in_the_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sets = [
            UncertaintySet::unit_cube(3),
            UncertaintySet::ellipsoid(
                v(&[0.5, 0.5]),
                0.7,
                DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.0, 0.5]),
            )
            .unwrap(),
            UncertaintySet::polytope(
                DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]),
                v(&[0.0, 0.0, 1.0]),
            )
            .unwrap(),
        ];
        for s in &sets {
            for x in s.sample(&mut rng, 200).unwrap() {
                assert!(s.contains(&x, 1e-9).unwrap());
            }
            for x in s.sample_boundary(&mut rng, 20).unwrap() {
                assert!(s.contains(&x, 1e-6).unwrap());
            }
        }
    }

    #[test]
    fn ellipsoid_inverse_form_matches_gauge() {
        let e = Ellipsoid::new(
            v(&[1.0, -1.0]),
            2.0,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 3.0]),
        )
        .unwrap();
        let f = e.inverse_form().unwrap();
        let x = v(&[2.0, 0.5]);
        assert_abs_diff_eq!(
            (f * (&x - e.center())).norm(),
            e.gauge(&x) / 2.0,
            epsilon = 1e-12
        );
    }
}
