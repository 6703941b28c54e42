// Lobbying over the unit cube: static, affine, multipolar and fully
// adjustable values with the share of the affine gap each pole-set closes.

use multipolar::bench::{build_lobbying, closed_gap_percent, generate_lobbying, AdaptabilitySpec};
use multipolar::conic::default_accuracy;
use multipolar::model::{BoxSet, CoverageStrategy, ShadowMatrix, UncertaintySet};
use multipolar::mrc::{solve_aarc, solve_compact, solve_farc_box, solve_src, MrcSpec};
use multipolar::polegen::tighten;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let (m, n) = (6, 4);
    let inst = generate_lobbying(m, n, 11)?;
    let cube = UncertaintySet::unit_cube(n);
    let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(m))?;
    let shadow = ShadowMatrix::identity(n);

    let src = solve_src(&problem, &cube)?.objective;
    let aarc = solve_aarc(&problem, &cube, &shadow, &mut ChaCha8Rng::seed_from_u64(11))?;
    let farc = solve_farc_box(&problem, &BoxSet::unit(n))?.objective;
    println!(
        "static {src:.6}  affine {:.6}  fully adjustable {farc:.6}",
        aarc.value()
    );
    println!("poles  value     closed gap %");
    for omega in tighten(&aarc.homothety.poles, &cube, 24)?.iter().step_by(3) {
        let spec = MrcSpec::with_coverage(
            problem.clone(),
            cube.clone(),
            shadow.clone(),
            omega.clone(),
            CoverageStrategy::Construction,
        )?;
        let v = solve_compact(&spec, default_accuracy())?.objective;
        let gap =
            closed_gap_percent(aarc.value(), v, farc).map_or("-".into(), |g| format!("{g:.2}"));
        println!("{:>5}  {v:.6}  {gap}", omega.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("lobbying over the cube");
}
