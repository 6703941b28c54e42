// The compact dual and the cutting-plane loop on the same counterpart.

use multipolar::bench::{build_lobbying, generate_lobbying, unit_volume_ball, AdaptabilitySpec};
use multipolar::model::{CoverageStrategy, ShadowMatrix, UncertaintySet};
use multipolar::mrc::{separate, solve_mrc, Method, MrcSpec, SolveOptions};
use multipolar::polegen::{circumscribe, random_affine_basis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let (m, n) = (5, 3);
    let inst = generate_lobbying(m, n, 6)?;
    for set in [UncertaintySet::unit_cube(n), unit_volume_ball(n)?] {
        let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::full(m))?;
        let basis = random_affine_basis(n, &mut ChaCha8Rng::seed_from_u64(6))?;
        let poles = circumscribe(&basis, &set)?.poles;
        let spec = MrcSpec::with_coverage(
            problem,
            set.clone(),
            ShadowMatrix::identity(n),
            poles,
            CoverageStrategy::Construction,
        )?;
        let opts = SolveOptions::default();
        let compact = solve_mrc(&spec, Method::Compact, &opts)?;
        let cuts = solve_mrc(&spec, Method::Cuts, &opts)?;
        let worst = (0..spec.problem().row_count())
            .map(|row| separate(&spec, &compact, row).map(|s| s.violation))
            .collect::<multipolar::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:<9} compact {:.8}  cuts {:.8} ({} masters)  max violation at compact optimum {worst:.1e}",
            set.kind(),
            compact.objective,
            cuts.objective,
            cuts.iterations
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("cutting planes");
}
