// Upper bounds from tightened poles against lower bounds from their
// projections onto the cube.

use multipolar::bench::{build_lobbying, generate_lobbying, AdaptabilitySpec};
use multipolar::bounds::{converge, Budget};
use multipolar::model::{BoxSet, UncertaintySet};
use multipolar::mrc::solve_farc_box;
use multipolar::polegen::{circumscribe, random_affine_basis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let (m, n) = (5, 3);
    let inst = generate_lobbying(m, n, 5)?;
    let cube = UncertaintySet::unit_cube(n);
    let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(m))?;
    let basis = random_affine_basis(n, &mut ChaCha8Rng::seed_from_u64(5))?;
    let start = circumscribe(&basis, &cube)?.poles;
    let trace = converge(&problem, &cube, &start, 20, &Budget::default())?;
    let farc = solve_farc_box(&problem, &BoxSet::unit(n))?.objective;
    println!("fully adjustable {farc:.6}");
    println!("iter  poles  hausdorff  upper     lower     gap");
    for r in &trace.rows {
        println!(
            "{:>4}  {:>5}  {:<9.5}  {:<8.5}  {:<8.5}  {:.2e}",
            r.iteration,
            r.pole_count,
            r.hausdorff,
            r.upper_bound,
            r.lower_bound,
            r.gap()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("convergence");
}
