// Smallest homothetic copy of a random simplex containing the unit cube,
// by support solves and by the closed form.

use multipolar::model::UncertaintySet;
use multipolar::polegen::{circumscribe, hypercube_sigma, random_affine_basis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("n0  sigma (support)  sigma (closed form)");
    for n0 in 2..=5 {
        let basis = random_affine_basis(n0, &mut rng)?;
        let h = circumscribe(&basis, &UncertaintySet::unit_cube(n0))?;
        let (sigma, t) = hypercube_sigma(&basis);
        assert!((h.translate - t).amax() < 1e-9);
        println!("{n0:>2}  {:<15.9}  {sigma:.9}", h.sigma);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("circumscribed simplex");
}
