// Tightening a circumscribed simplex toward the unit square and cube.

use multipolar::model::{box_vertices, hull_membership, BoxSet, UncertaintySet};
use multipolar::polegen::{circumscribe, hausdorff, random_affine_basis, tighten};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> multipolar::Result<()> {
    for n in [2, 3] {
        let cube = UncertaintySet::unit_cube(n);
        let basis = random_affine_basis(n, &mut ChaCha8Rng::seed_from_u64(1))?;
        let start = circumscribe(&basis, &cube)?.poles;
        println!("H_{n}: step  poles  hausdorff");
        for (i, omega) in tighten(&start, &cube, 4 * n + 4)?.iter().enumerate() {
            for x in box_vertices(&BoxSet::unit(n), 20)? {
                assert!(hull_membership(omega, &x, 1e-7)?.0);
            }
            println!(
                "     {i:>4}  {:>5}  {:.6}",
                omega.len(),
                hausdorff(omega, &cube)?
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("tightening");
}
