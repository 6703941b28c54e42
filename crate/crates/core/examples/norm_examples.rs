// Norm examples: `min u` with `u >= Σ|ξ_i|` over the L1 and L2 unit balls,
// observed through the first `n0` coordinates with cross-polytope poles.

use multipolar::bench::{build_norm_example, norm_farc_value, NormKind};
use multipolar::conic::default_accuracy;
use multipolar::mrc::{solve_compact, MrcSpec};

pub fn run() -> multipolar::Result<()> {
    let n = 4;
    println!("kind  n0  mrc        farc");
    for kind in [NormKind::L1, NormKind::L2] {
        for n0 in 1..=n {
            let ex = build_norm_example(n, n0, kind)?;
            let farc = norm_farc_value(&ex)?;
            let spec = MrcSpec::new(ex.problem, ex.uncertainty, ex.shadow, ex.poles)?;
            let value = solve_compact(&spec, default_accuracy())?.objective;
            println!("{:<4}  {n0:>2}  {value:<9.6}  {farc:.6}", kind.as_str());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("norm examples");
}
