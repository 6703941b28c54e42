use std::collections::HashSet;

use nalgebra::DVector;

use crate::conic::{self, ConicProgram};
use crate::error::{dim_check, Error, Result};

/// Accuracy for the hull-membership LP; tighter than the default so residuals
/// near the membership tolerance are resolved.
const MEMBERSHIP_ACCURACY: f64 = 1e-10;

/// Nonempty ordered list of distinct points in shadow space.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSet {
    poles: Vec<DVector<f64>>,
}

fn rounded_key(x: &DVector<f64>) -> Vec<i64> {
    x.iter().map(|v| (v * 1e12).round() as i64).collect()
}

impl PoleSet {
    /// Keeps the first of any poles that agree after rounding to 1e-12.
    pub fn new(poles: Vec<DVector<f64>>) -> Result<Self> {
        let first = poles
            .first()
            .ok_or_else(|| Error::Invalid("pole-set must be nonempty".into()))?;
        let dim = first.len();
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(poles.len());
        for (k, p) in poles.into_iter().enumerate() {
            dim_check(&format!("pole {k} dimension"), dim, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!(
                    "pole {k} has non-finite coordinates"
                )));
            }
            if seen.insert(rounded_key(&p)) {
                out.push(p);
            }
        }
        Ok(Self { poles: out })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(DVector::from_vec).collect())
    }

    pub fn dim(&self) -> usize {
        self.poles[0].len()
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn poles(&self) -> &[DVector<f64>] {
        &self.poles
    }

    pub fn get(&self, k: usize) -> &DVector<f64> {
        &self.poles[k]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DVector<f64>> {
        self.poles.iter()
    }

    pub fn into_vec(self) -> Vec<DVector<f64>> {
        self.poles
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.poles
            .iter()
            .map(|p| p.iter().copied().collect())
            .collect()
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        for p in &self.poles {
            c += p;
        }
        c / self.len() as f64
    }

    /// `min a·ω` over the poles.
    pub fn support_min(&self, a: &DVector<f64>) -> Result<f64> {
        dim_check("direction dimension", self.dim(), a.len())?;
        Ok(self
            .poles
            .iter()
            .map(|p| a.dot(p))
            .fold(f64::INFINITY, f64::min))
    }
}

impl<'a> IntoIterator for &'a PoleSet {
    type Item = &'a DVector<f64>;
    type IntoIter = std::slice::Iter<'a, DVector<f64>>;
    fn into_iter(self) -> Self::IntoIter {
        self.poles.iter()
    }
}

/// Convex weights on `points` reproducing `x` up to `tol` in the max norm,
/// or `None` when `x` is farther than `tol` from their hull.
pub fn convex_weights(
    points: &[DVector<f64>],
    x: &DVector<f64>,
    tol: f64,
) -> Result<Option<DVector<f64>>> {
    let k = points.len();
    if k == 0 {
        return Ok(None);
    }
    for (i, p) in points.iter().enumerate() {
        dim_check("hull point dimension", x.len(), p.len())?;
        if (p - x).amax() <= tol {
            let mut w = DVector::zeros(k);
            w[i] = 1.0;
            return Ok(Some(w));
        }
    }
    let n = x.len();
    let mut lp = ConicProgram::new();
    let lam = lp.add_vars(k);
    let t = lp.add_var();
    lp.set_objective(vec![(t, 1.0)]);
    for j in 0..n {
        let terms: Vec<(usize, f64)> = (0..k)
            .filter(|&i| points[i][j] != 0.0)
            .map(|i| (lam.start + i, points[i][j]))
            .collect();
        let mut up = terms.clone();
        up.push((t, -1.0));
        lp.add_le(up, x[j]);
        let mut lo: Vec<(usize, f64)> = terms.into_iter().map(|(i, a)| (i, -a)).collect();
        lo.push((t, -1.0));
        lp.add_le(lo, -x[j]);
    }
    lp.add_eq(lam.clone().map(|i| (i, 1.0)).collect(), 1.0);
    for i in lam.clone() {
        lp.add_ge(vec![(i, 1.0)], 0.0);
    }
    let r = conic::solve_optimal(&lp, MEMBERSHIP_ACCURACY, "hull membership")?;
    let sol = r.primal()?;
    // the LP value certifies membership; clamping the interior-point
    // weights can move the combination by more than it
    if sol[t] > tol {
        return Ok(None);
    }
    let mut w = DVector::from_fn(k, |i, _| sol[lam.start + i].max(0.0));
    let s = w.sum();
    if s <= 0.0 {
        return Ok(None);
    }
    w /= s;
    Ok(Some(w))
}

/// Whether `x ∈ conv Ω` within `tol`, with weights when it is.
pub fn hull_membership(
    omega: &PoleSet,
    x: &DVector<f64>,
    tol: f64,
) -> Result<(bool, Option<DVector<f64>>)> {
    dim_check("point dimension", omega.dim(), x.len())?;
    let w = convex_weights(omega.poles(), x, tol)?;
    Ok((w.is_some(), w))
}
