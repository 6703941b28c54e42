// Value as more of the efforts are allowed to react to ξ.

use multipolar::bench::{build_lobbying, generate_lobbying, AdaptabilitySpec};
use multipolar::conic::default_accuracy;
use multipolar::model::{CoverageStrategy, ShadowMatrix, UncertaintySet};
use multipolar::mrc::{solve_compact, solve_src, MrcSpec};
use multipolar::polegen::{circumscribe, random_affine_basis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let (m, n) = (8, 3);
    let inst = generate_lobbying(m, n, 3)?;
    let cube = UncertaintySet::unit_cube(n);
    let basis = random_affine_basis(n, &mut ChaCha8Rng::seed_from_u64(3))?;
    let poles = circumscribe(&basis, &cube)?.poles;
    println!("theta  adjustable  value");
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let adapt = AdaptabilitySpec::new(theta, m)?;
        let problem = build_lobbying(&inst, &cube, &adapt)?;
        let spec = MrcSpec::with_coverage(
            problem.clone(),
            cube.clone(),
            ShadowMatrix::identity(n),
            poles.clone(),
            CoverageStrategy::Construction,
        )?;
        let v = solve_compact(&spec, default_accuracy())?.objective;
        println!("{theta:<5}  {:>10}  {v:.6}", adapt.adjustable_count);
        if theta == 0.0 {
            assert!((v - solve_src(&problem, &cube)?.objective).abs() < 1e-5);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("adaptability");
}
