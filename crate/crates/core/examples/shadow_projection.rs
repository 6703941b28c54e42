// Observing only the first `n0` authority opinions, with the vertices of the
// observed cube as poles.

use multipolar::bench::{generate_lobbying, shadow_projection_experiment};

pub fn run() -> multipolar::Result<()> {
    let n = 4;
    let inst = generate_lobbying(6, n, 2)?;
    println!("n0  value");
    for (n0, v) in shadow_projection_experiment(&inst, n, &[1, 2, 3, 4])? {
        println!("{n0:>2}  {v:.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("shadow projection");
}
