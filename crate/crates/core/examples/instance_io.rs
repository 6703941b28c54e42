// Writes a lobbying instance with its circumscribed-simplex poles as JSON,
// runs it back through the loader, and solves it. Pass a path to keep the
// file for `mpro solve --instance`.

use multipolar::bench::{build_lobbying, generate_lobbying, AdaptabilitySpec};
use multipolar::conic::default_accuracy;
use multipolar::model::{Instance, ShadowMatrix, UncertaintySet};
use multipolar::mrc::{solve_compact, MrcSpec};
use multipolar::polegen::{circumscribe, random_affine_basis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(path: Option<&str>) -> multipolar::Result<()> {
    let n = 3;
    let inst = generate_lobbying(4, n, 1)?;
    let cube = UncertaintySet::unit_cube(n);
    let basis = random_affine_basis(n, &mut ChaCha8Rng::seed_from_u64(1))?;
    let instance = Instance {
        problem: build_lobbying(&inst, &cube, &AdaptabilitySpec::full(4))?,
        poles: Some(circumscribe(&basis, &cube)?.poles),
        uncertainty: cube,
        shadow: ShadowMatrix::identity(n),
    };
    let text = instance.to_json()?;
    if let Some(p) = path {
        std::fs::write(p, &text)?;
        println!("wrote {p}");
    }
    let back = Instance::from_json(&text)?;
    assert_eq!(back, instance);
    let spec = MrcSpec::new(
        back.problem,
        back.uncertainty,
        back.shadow,
        back.poles.expect("poles"),
    )?;
    println!(
        "{} bytes of JSON, value {:.6}",
        text.len(),
        solve_compact(&spec, default_accuracy())?.objective
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    let path = std::env::args().nth(1);
    run(path.as_deref()).expect("instance round trip");
}
