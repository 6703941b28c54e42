//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use common::{lobbying_farc_vertices, lobbying_src_closed_form, rel_close};
use multipolar::bench::{
    build_lobbying, build_norm_example, closed_gap_percent, farc_ball_enumerate, farc_ball_simple,
    generate_lobbying, norm_farc_value, shadow_projection_experiment, unit_volume_ball,
    AdaptabilitySpec, NormKind,
};
use multipolar::bounds::{lower_bound, project_poleset};
use multipolar::conic::default_accuracy;
use multipolar::model::{
    box_vertices, hull_membership, BoxSet, CoverageStrategy, MrcSolution, PoleSet, RobustProblem,
    ShadowMatrix, UncertaintySet,
};
use multipolar::mrc::{
    recourse_for_scenario, solve_aarc_with_basis, solve_compact, solve_farc, solve_mrc, solve_src,
    Method, MrcSpec, SolveOptions,
};
use multipolar::polegen::{
    circumscribe, cross_polytope_cover, hausdorff, hypercube_sigma, random_affine_basis, tighten,
    ShadowImage, SimplexBasis,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Specs and solutions collected along the way for the replay check.
#[derive(Default)]
struct Solved {
    items: Vec<(MrcSpec, MrcSolution)>,
}

fn construction_spec(
    problem: &RobustProblem,
    set: &UncertaintySet,
    poles: &PoleSet,
) -> multipolar::Result<MrcSpec> {
    MrcSpec::with_coverage(
        problem.clone(),
        set.clone(),
        ShadowMatrix::identity(set.dim()),
        poles.clone(),
        CoverageStrategy::Construction,
    )
}

fn simplex_poles(set: &UncertaintySet, seed: u64) -> multipolar::Result<PoleSet> {
    let basis = random_affine_basis(set.dim(), &mut rng(seed))?;
    Ok(circumscribe(&basis, set)?.poles)
}

fn cross_poles(set: &UncertaintySet) -> multipolar::Result<PoleSet> {
    let shadow = ShadowMatrix::identity(set.dim());
    cross_polytope_cover(
        &ShadowImage {
            set,
            shadow: &shadow,
        },
        &set.interior_point()?,
    )
}

fn norm_l1() -> Check {
    let mut count = 0;
    for n in [4, 6, 8] {
        for n0 in 1..=n {
            let ex = build_norm_example(n, n0, NormKind::L1).map_err(fail)?;
            // P·Ξ is the L1 ball of R^n0, whose vertices are ±e_j
            for j in 0..n0 {
                for sign in [1.0, -1.0] {
                    let mut x = DVector::zeros(n0);
                    x[j] = sign;
                    let inside = hull_membership(&ex.poles, &x, 1e-8).map_err(fail)?.0;
                    ensure(inside, || format!("n={n} n0={n0}: vertex {x:?} uncovered"))?;
                }
            }
            let spec = MrcSpec::with_coverage(
                ex.problem,
                ex.uncertainty,
                ex.shadow,
                ex.poles,
                CoverageStrategy::Vertices,
            )
            .map_err(fail)?;
            let v = solve_compact(&spec, default_accuracy())
                .map_err(fail)?
                .objective;
            let want = (1 + n - n0) as f64;
            ensure((v - want).abs() <= 1e-6, || {
                format!("n={n} n0={n0}: {v} vs {want}")
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} (n, n0) pairs"))
}

fn norm_l2() -> Check {
    let mut count = 0;
    for n in [4, 6] {
        let root_n = (n as f64).sqrt();
        for n0 in 1..=n {
            let ex = build_norm_example(n, n0, NormKind::L2).map_err(fail)?;
            let farc = norm_farc_value(&ex).map_err(fail)?;
            ensure((farc - root_n).abs() <= 1e-9, || {
                format!("n={n}: farc {farc}")
            })?;
            let spec =
                MrcSpec::new(ex.problem, ex.uncertainty, ex.shadow, ex.poles).map_err(fail)?;
            let v = solve_compact(&spec, default_accuracy())
                .map_err(fail)?
                .objective;
            let upper = (n0 as f64).sqrt() + (n - n0) as f64;
            ensure(v <= upper + 1e-6 && v >= root_n - 1e-6, || {
                format!("n={n} n0={n0}: {v} outside [{root_n}, {upper}]")
            })?;
            if n0 == n {
                ensure((v - root_n).abs() <= 1e-4, || {
                    format!("n={n}: {v} vs sqrt(n)")
                })?;
            }
            count += 1;
        }
    }
    Ok(format!("{count} (n, n0) pairs"))
}

fn simplex_closed_form() -> Check {
    let mut worst = 0.0f64;
    for n0 in 2..=6 {
        let cube = UncertaintySet::unit_cube(n0);
        let vertices = box_vertices(&BoxSet::unit(n0), 12).map_err(fail)?;
        let mut r = rng(300 + n0 as u64);
        for k in 0..50 {
            let basis = random_affine_basis(n0, &mut r).map_err(fail)?;
            let h = circumscribe(&basis, &cube).map_err(fail)?;
            let (sigma, t) = hypercube_sigma(&basis);
            let err = (h.sigma - sigma).abs().max((&h.translate - &t).amax());
            worst = worst.max(err);
            ensure(err <= 1e-9, || {
                format!("n0={n0} basis {k}: closed form differs by {err:e}")
            })?;
            let result = SimplexBasis::new(h.poles.poles().to_vec()).map_err(fail)?;
            for x in &vertices {
                let b = result.barycentric(x).map_err(fail)?;
                ensure(b.min() >= -1e-9, || {
                    format!("n0={n0} basis {k}: barycentric {:e}", b.min())
                })?;
            }
        }
    }
    Ok(format!("250 bases, max deviation {worst:.1e}"))
}

fn cross_method(solved: &mut Solved) -> Check {
    let opts = SolveOptions::default();
    let mut worst = 0.0f64;
    for k in 0..30u64 {
        let ball = k % 2 == 1;
        let pole_kind = (k / 2) % 3;
        let m = 3 + ((k * 3) % 8) as usize;
        let n = match (ball, pole_kind) {
            (_, 2) => 2 + (k % 3) as usize,
            (false, _) => 2 + ((k * 5) % 7) as usize,
            (true, _) => 2 + (k % 4) as usize,
        };
        let set = if ball {
            unit_volume_ball(n).map_err(fail)?
        } else {
            UncertaintySet::unit_cube(n)
        };
        let inst = generate_lobbying(m, n, 100 + k).map_err(fail)?;
        let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::full(m)).map_err(fail)?;
        let poles = match pole_kind {
            0 => simplex_poles(&set, k).map_err(fail)?,
            1 => cross_poles(&set).map_err(fail)?,
            _ => {
                let start = if ball {
                    cross_poles(&set)
                } else {
                    simplex_poles(&set, k)
                }
                .map_err(fail)?;
                let cap = start.len() + 2 * n;
                tighten(&start, &set, cap)
                    .map_err(fail)?
                    .pop()
                    .expect("trajectory")
            }
        };
        let spec = construction_spec(&problem, &set, &poles).map_err(fail)?;
        let compact = solve_mrc(&spec, Method::Compact, &opts).map_err(fail)?;
        let cuts = solve_mrc(&spec, Method::Cuts, &opts).map_err(fail)?;
        let rel = (compact.objective - cuts.objective).abs() / (1.0 + compact.objective.abs());
        worst = worst.max(rel);
        ensure(rel <= 1e-5, || {
            format!(
                "instance {k} ({}, m={m}, n={n}, {} poles): {} vs {}",
                set.kind(),
                poles.len(),
                compact.objective,
                cuts.objective
            )
        })?;
        solved.items.push((spec, compact));
    }
    Ok(format!("30 instances, max relative gap {worst:.1e}"))
}

fn value_sandwich(solved: &mut Solved, gaps: &mut Vec<f64>) -> Check {
    let slack = |a: f64, b: f64| a <= b + 1e-5 * (1.0 + a.abs().max(b.abs()));
    for k in 0..20u64 {
        let n = 2 + (k % 7) as usize;
        let m = 3 + (k % 5) as usize;
        let cube = UncertaintySet::unit_cube(n);
        let inst = generate_lobbying(m, n, 500 + k).map_err(fail)?;
        let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(m)).map_err(fail)?;
        let shadow = ShadowMatrix::identity(n);

        let src = solve_src(&problem, &cube).map_err(fail)?.objective;
        let analytic = lobbying_src_closed_form(&inst);
        ensure(rel_close(src, analytic, 1e-5), || {
            format!("instance {k}: src {src} vs analytic {analytic}")
        })?;
        let basis = random_affine_basis(n, &mut rng(500 + k)).map_err(fail)?;
        let aarc = solve_aarc_with_basis(&problem, &cube, &shadow, &basis).map_err(fail)?;
        let omega = tighten(&aarc.homothety.poles, &cube, 2 * (n + 1))
            .map_err(fail)?
            .pop()
            .expect("trajectory");
        let spec = construction_spec(&problem, &cube, &omega).map_err(fail)?;
        let mrc = solve_compact(&spec, default_accuracy()).map_err(fail)?;
        let farc = solve_farc(&problem, &cube).map_err(fail)?.objective;
        ensure(rel_close(farc, lobbying_farc_vertices(&inst), 1e-5), || {
            format!("instance {k}: farc {farc} vs vertex oracle")
        })?;
        let gamma = project_poleset(&omega, &cube).map_err(fail)?;
        let lb = lower_bound(&problem, &gamma).map_err(fail)?;

        let chain = [
            ("lower bound", lb),
            ("farc", farc),
            ("mrc", mrc.objective),
            ("aarc", aarc.value()),
            ("src", src),
        ];
        for w in chain.windows(2) {
            ensure(slack(w[0].1, w[1].1), || {
                format!(
                    "instance {k} (n={n}): {} {} > {} {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )
            })?;
        }
        if let Some(g) = closed_gap_percent(aarc.value(), mrc.objective, farc) {
            gaps.push(g);
        }
        solved.items.push((spec, mrc));
    }
    Ok("20 instances, lb <= farc <= mrc <= aarc <= src".into())
}

fn ball_closed_form() -> Check {
    let mut worst = 0.0f64;
    for m in 1..=6 {
        for n in [2, 3, 4] {
            let UncertaintySet::Ellipsoid(ball) = unit_volume_ball(n).map_err(fail)? else {
                return Err("unit-volume ball is not an ellipsoid".into());
            };
            for seed in 0..20 {
                let inst = generate_lobbying(m, n, 1000 * m as u64 + 10 * n as u64 + seed)
                    .map_err(fail)?;
                let a = farc_ball_simple(&inst, &ball).map_err(fail)?;
                let b = farc_ball_enumerate(&inst, &ball).map_err(fail)?;
                worst = worst.max((a - b).abs());
                ensure((a - b).abs() <= 1e-6, || {
                    format!("m={m} n={n} seed={seed}: {a} vs {b}")
                })?;
            }
        }
    }
    Ok(format!("360 instances, max deviation {worst:.1e}"))
}

fn simplex_invariance(solved: &mut Solved) -> Check {
    let mut worst = 0.0f64;
    for k in 0..10u64 {
        let n = 2 + (k % 4) as usize;
        let m = 3 + (k % 4) as usize;
        let set = if k % 2 == 0 {
            UncertaintySet::unit_cube(n)
        } else {
            unit_volume_ball(n).map_err(fail)?
        };
        let inst = generate_lobbying(m, n, 700 + k).map_err(fail)?;
        let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::full(m)).map_err(fail)?;
        let mut values = Vec::new();
        for s in [2 * k, 2 * k + 1] {
            let poles = simplex_poles(&set, 7000 + s).map_err(fail)?;
            let spec = construction_spec(&problem, &set, &poles).map_err(fail)?;
            let sol = solve_compact(&spec, default_accuracy()).map_err(fail)?;
            values.push(sol.objective);
            solved.items.push((spec, sol));
        }
        let rel = (values[0] - values[1]).abs() / (1.0 + values[0].abs());
        worst = worst.max(rel);
        ensure(rel <= 1e-5, || {
            format!("pair {k}: {} vs {}", values[0], values[1])
        })?;
    }
    // Ξ = {ξ >= 0, Σξ <= 1}
    for n in 2..=4 {
        let mut c = DMatrix::zeros(n + 1, n);
        let mut d = DVector::zeros(n + 1);
        for j in 0..n {
            c[(j, j)] = -1.0;
            c[(n, j)] = 1.0;
        }
        d[n] = 1.0;
        let simplex = UncertaintySet::polytope(c, d).map_err(fail)?;
        for seed in 0..3 {
            let m = 4;
            let inst = generate_lobbying(m, n, 800 + seed).map_err(fail)?;
            let problem =
                build_lobbying(&inst, &simplex, &AdaptabilitySpec::full(m)).map_err(fail)?;
            let basis = random_affine_basis(n, &mut rng(800 + seed)).map_err(fail)?;
            let aarc =
                solve_aarc_with_basis(&problem, &simplex, &ShadowMatrix::identity(n), &basis)
                    .map_err(fail)?
                    .value();
            let farc = solve_farc(&problem, &simplex).map_err(fail)?.objective;
            ensure(rel_close(aarc, farc, 1e-5), || {
                format!("simplex n={n} seed={seed}: aarc {aarc} vs farc {farc}")
            })?;
        }
    }
    Ok(format!(
        "10 simplex pairs (max relative gap {worst:.1e}), 9 simplex-set instances"
    ))
}

fn tightening_soundness(solved: &mut Solved) -> Check {
    let mut steps = 0;
    for n in 2..=8 {
        let cube = UncertaintySet::unit_cube(n);
        let vertices = box_vertices(&BoxSet::unit(n), 12).map_err(fail)?;
        for seed in 0..10u64 {
            let inst = generate_lobbying(4, n, 900 + seed).map_err(fail)?;
            let problem = build_lobbying(&inst, &cube, &AdaptabilitySpec::full(4)).map_err(fail)?;
            let start = simplex_poles(&cube, 900 + seed).map_err(fail)?;
            let trajectory = tighten(&start, &cube, 2 * (n + 1)).map_err(fail)?;
            let (mut last_h, mut last_v) = (f64::INFINITY, f64::INFINITY);
            let mut last_sol = None;
            for (i, omega) in trajectory.iter().enumerate() {
                for x in &vertices {
                    let tol = 1e-7 * (1.0 + x.amax());
                    let inside = hull_membership(omega, x, tol).map_err(fail)?.0;
                    ensure(inside, || {
                        format!("n={n} seed={seed} step {i}: vertex {x:?} uncovered")
                    })?;
                }
                let h = hausdorff(omega, &cube).map_err(fail)?;
                ensure(h <= last_h + 1e-9, || {
                    format!("n={n} seed={seed} step {i}: distance {h} > {last_h}")
                })?;
                let spec = construction_spec(&problem, &cube, omega).map_err(fail)?;
                let sol = solve_compact(&spec, default_accuracy()).map_err(fail)?;
                let v = sol.objective;
                ensure(v <= last_v + 1e-5 * (1.0 + v.abs()), || {
                    format!("n={n} seed={seed} step {i}: value {v} > {last_v}")
                })?;
                last_h = h;
                last_v = v;
                last_sol = Some((spec, sol));
                steps += 1;
            }
            solved.items.extend(last_sol);
        }
    }
    Ok(format!("70 trajectories, {steps} pole-sets"))
}

fn scenario_replay(solved: &Solved) -> Check {
    let mut worst = f64::NEG_INFINITY;
    for (k, (spec, sol)) in solved.items.iter().enumerate() {
        let xs = spec
            .uncertainty()
            .sample(&mut rng(k as u64), 100)
            .map_err(fail)?;
        for xi in xs {
            let (_, v) = recourse_for_scenario(spec, sol, &xi).map_err(fail)?;
            let viol = spec.problem().max_violation(&sol.first_stage, &v, &xi);
            worst = worst.max(viol);
            ensure(viol <= 1e-6, || format!("solution {k}: violation {viol:e}"))?;
        }
    }
    Ok(format!(
        "{} solutions x 100 scenarios, max violation {worst:.1e}",
        solved.items.len()
    ))
}

fn structure(gaps: &[f64]) -> Check {
    for n in 1..=10 {
        let ext = box_vertices(&BoxSet::unit(n), 20).map_err(fail)?.len();
        ensure(ext == 1 << n, || format!("#ext of H_{n} is {ext}"))?;
    }
    for n0 in 1..=8 {
        for set in [
            UncertaintySet::unit_cube(n0),
            unit_volume_ball(n0).map_err(fail)?,
        ] {
            let s = simplex_poles(&set, n0 as u64).map_err(fail)?.len();
            let c = cross_poles(&set).map_err(fail)?.len();
            ensure(s == n0 + 1 && c == 2 * n0, || {
                format!("{} n0={n0}: {s} simplex, {c} cross poles", set.kind())
            })?;
        }
    }
    let thetas = [0.0, 0.25, 0.5, 0.75, 1.0];
    for seed in 0..5u64 {
        let (m, n) = (8, 3);
        let cube = UncertaintySet::unit_cube(n);
        let inst = generate_lobbying(m, n, 1100 + seed).map_err(fail)?;
        let poles = simplex_poles(&cube, seed).map_err(fail)?;
        let mut last = f64::INFINITY;
        for theta in thetas {
            let adapt = AdaptabilitySpec::new(theta, m).map_err(fail)?;
            let problem = build_lobbying(&inst, &cube, &adapt).map_err(fail)?;
            let spec = construction_spec(&problem, &cube, &poles).map_err(fail)?;
            let value = solve_compact(&spec, default_accuracy())
                .map_err(fail)?
                .objective;
            ensure(value <= last + 1e-5 * (1.0 + value.abs()), || {
                format!("seed {seed}: theta {theta} raises value to {value}")
            })?;
            last = value;
        }
        let inst = generate_lobbying(6, 4, 1200 + seed).map_err(fail)?;
        let mut last = f64::INFINITY;
        for (n0, value) in shadow_projection_experiment(&inst, 4, &[1, 2, 3, 4]).map_err(fail)? {
            ensure(value <= last + 1e-5 * (1.0 + value.abs()), || {
                format!("seed {seed}: n0 {n0} raises value to {value}")
            })?;
            last = value;
        }
    }
    ensure(
        gaps.iter().all(|g| (-1e-3..=100.0 + 1e-3).contains(g)),
        || format!("closed gap outside [0, 100]: {gaps:?}"),
    )?;
    Ok(format!(
        "#ext and pole counts exact, theta and n0 monotone, {} closed-gap values in range",
        gaps.len()
    ))
}

fn main() {
    let mut solved = Solved::default();
    let mut gaps = Vec::new();
    let mut all = true;
    let mut report = |id: u32, name: &str, budget_s: Option<f64>, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        let over = budget_s.filter(|&b| secs > b);
        let (ok, detail) = match (out, over) {
            (Ok(d), None) => (true, d),
            (Ok(d), Some(b)) => (false, format!("{d}; took {secs:.1}s, budget {b}s")),
            (Err(e), _) => (false, e),
        };
        all &= ok;
        println!(
            "{} {id:>2} {name}: {detail} [{secs:.1}s]",
            if ok { "PASS" } else { "FAIL" }
        );
    };
    report(1, "L1 norm example", Some(10.0), &mut norm_l1);
    report(2, "L2 norm example", Some(20.0), &mut norm_l2);
    report(
        3,
        "hypercube simplex closed form",
        Some(10.0),
        &mut simplex_closed_form,
    );
    report(4, "compact vs cutting planes", Some(120.0), &mut || {
        cross_method(&mut solved)
    });
    report(5, "value sandwich", Some(120.0), &mut || {
        value_sandwich(&mut solved, &mut gaps)
    });
    report(6, "ball closed form", Some(120.0), &mut ball_closed_form);
    report(7, "simplex invariance", None, &mut || {
        simplex_invariance(&mut solved)
    });
    report(8, "tightening soundness", None, &mut || {
        tightening_soundness(&mut solved)
    });
    report(9, "scenario replay", None, &mut || scenario_replay(&solved));
    report(10, "reproduced structure", None, &mut || structure(&gaps));
    if !all {
        std::process::exit(1);
    }
}
