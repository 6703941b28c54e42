use nalgebra::DVector;

/// How a pole-set was certified to cover the observed uncertainty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverageStrategy {
    /// Every extreme point of the set was checked.
    Vertices,
    /// Boundary points were sampled (ellipsoids, large polytopes).
    Sampled,
    /// Coverage holds by construction (circumscribed simplices, static poles).
    Construction,
    /// The caller vouched for coverage.
    Assumed,
}

impl CoverageStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Vertices => "vertices",
            Self::Sampled => "sampled",
            Self::Construction => "construction",
            Self::Assumed => "assumed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrcSolution {
    pub first_stage: DVector<f64>,
    /// `pole_recourses[k]` is the recourse attached to pole `k`.
    pub pole_recourses: Vec<DVector<f64>>,
    pub objective: f64,
    /// Master solves for cutting planes, 1 for a compact solve.
    pub iterations: usize,
    pub coverage: CoverageStrategy,
}

impl MrcSolution {
    pub fn pole_count(&self) -> usize {
        self.pole_recourses.len()
    }

    /// `Σ λ_k v_k`.
    pub fn combined_recourse(&self, weights: &DVector<f64>) -> DVector<f64> {
        let n_v = self.pole_recourses.first().map_or(0, |v| v.len());
        self.pole_recourses
            .iter()
            .zip(weights.iter())
            .fold(DVector::zeros(n_v), |acc, (v, &l)| acc + v * l)
    }
}
