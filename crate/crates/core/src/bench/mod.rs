//! Benchmark families: the lobbying problem over boxes and balls, and the
//! norm examples with closed-form optima.

mod lobbying;
mod norm;

pub use lobbying::{
    build_lobbying, farc_ball_enumerate, farc_ball_simple, generate_lobbying,
    shadow_projection_experiment, unit_ball_radius, unit_volume_ball, AdaptabilitySpec,
    LobbyingInstance, BALL_ENUMERATE_CAP, BALL_SIMPLE_CAP, PRNG_ID,
};
pub use norm::{build_norm_example, norm_farc_value, NormExample, NormKind};

/// Share of the gap between a reference value and the best known value that
/// `value` closes, in percent. `None` when the gap is below solver noise.
pub fn closed_gap_percent(reference: f64, value: f64, best: f64) -> Option<f64> {
    let gap = reference - best;
    (gap.abs() > GAP_NOISE * (1.0 + reference.abs()))
        .then(|| 100.0 * (reference - value) / gap + 0.0)
}

/// Relative size under which a value gap is treated as zero.
pub const GAP_NOISE: f64 = 1e-6;
