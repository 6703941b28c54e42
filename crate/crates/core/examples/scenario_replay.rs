// Once ξ is revealed, the pole weights reproducing `P·ξ` pick the recourse.

use multipolar::bench::{build_lobbying, generate_lobbying, AdaptabilitySpec};
use multipolar::conic::default_accuracy;
use multipolar::model::{ShadowMatrix, UncertaintySet};
use multipolar::mrc::{recourse_for_scenario, solve_compact, MrcSpec};
use multipolar::polegen::cross_polytope_cover;
use multipolar::polegen::ShadowImage;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let (m, n) = (4, 3);
    let inst = generate_lobbying(m, n, 8)?;
    let cube = UncertaintySet::unit_cube(n);
    let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(m))?;
    let shadow = ShadowMatrix::identity(n);
    let poles = cross_polytope_cover(
        &ShadowImage {
            set: &cube,
            shadow: &shadow,
        },
        &DVector::from_element(n, 0.5),
    )?;
    let spec = MrcSpec::new(problem.clone(), cube.clone(), shadow, poles)?;
    let sol = solve_compact(&spec, default_accuracy())?;
    println!("budget u = {:.6}", sol.objective);
    let mut worst = 0.0f64;
    for xi in cube.sample(&mut ChaCha8Rng::seed_from_u64(8), 5)? {
        let (_, v) = recourse_for_scenario(&spec, &sol, &xi)?;
        let used: f64 = v.iter().sum();
        worst = worst.max(problem.max_violation(&sol.first_stage, &v, &xi));
        println!(
            "ξ = {:.3?}  effort {used:.4}  needed {:.4}",
            xi.as_slice(),
            inst.effort_at(&xi)
        );
    }
    println!("largest row violation {worst:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("scenario replay");
}
