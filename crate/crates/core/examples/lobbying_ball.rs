// Lobbying over the unit-volume ball: the fully adjustable value by
// sign-pattern cone programs and by the subset closed form, against the
// multipolar value with the circumscribed simplex and the 2n pole-set.

use multipolar::bench::{
    build_lobbying, farc_ball_enumerate, farc_ball_simple, generate_lobbying, unit_volume_ball,
    AdaptabilitySpec,
};
use multipolar::conic::default_accuracy;
use multipolar::model::{ShadowMatrix, UncertaintySet};
use multipolar::mrc::{solve_aarc, solve_compact, MrcSpec};
use multipolar::polegen::{cross_polytope_cover, ShadowImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let (m, n) = (5, 3);
    let inst = generate_lobbying(m, n, 4)?;
    let ball = unit_volume_ball(n)?;
    let UncertaintySet::Ellipsoid(e) = &ball else {
        unreachable!()
    };
    let enumerated = farc_ball_enumerate(&inst, e)?;
    let simple = farc_ball_simple(&inst, e)?;
    println!("radius {:.6}", e.radius());
    println!("fully adjustable: enumerated {enumerated:.8}, closed form {simple:.8}");

    let problem = build_lobbying(&inst, &ball, &AdaptabilitySpec::full(m))?;
    let shadow = ShadowMatrix::identity(n);
    let aarc = solve_aarc(&problem, &ball, &shadow, &mut ChaCha8Rng::seed_from_u64(4))?;
    println!(
        "simplex poles ({}): {:.8}",
        aarc.solution.pole_count(),
        aarc.value()
    );
    let cross = cross_polytope_cover(
        &ShadowImage {
            set: &ball,
            shadow: &shadow,
        },
        e.center(),
    )?;
    let spec = MrcSpec::new(problem, ball.clone(), shadow, cross)?;
    let sol = solve_compact(&spec, default_accuracy())?;
    println!("2n poles ({}): {:.8}", sol.pole_count(), sol.objective);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("lobbying over the ball");
}
