//! The `mpro` command line: pole generation, single solves, benchmark grids
//! and convergence traces, all written as CSV.
//!
//! Exit status is 0 on success, 1 when a solve fails (infeasible, unbounded,
//! solver trouble, violated bounds) and 2 for configuration problems. Every
//! failure prints one line on stderr:
//!
//! ```text
//! mpro: error kind=io exit=2: No such file or directory (os error 2)
//! ```

use std::fmt::Debug;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bench::{
    build_lobbying, build_norm_example, closed_gap_percent, farc_ball_simple, generate_lobbying,
    norm_farc_value, unit_volume_ball, AdaptabilitySpec, NormKind, PRNG_ID,
};
use crate::bounds::{converge, BoundsTrace, Budget};
use crate::conic::{default_accuracy, parse_accuracy, ACCURACY_ENV};
use crate::error::{Error, Result};
use crate::model::{
    load_poles, save_poles, tol, CoverageStrategy, Instance, PoleSet, RobustProblem, ShadowMatrix,
    UncertaintySet,
};
use crate::mrc::{
    solve_farc, solve_mrc, solve_src_with, Method, MrcSpec, SolveOptions, FARC_BOX_CAP,
};
use crate::polegen::{
    circumscribe, cross_polytope_cover, hausdorff, random_affine_basis, tighten_with, ShadowImage,
};

#[derive(Parser, Clone, Debug)]
#[command(name = "mpro", version, about = "Multipolar robust optimization")]
pub struct Cli {
    /// Worker threads. Row order never depends on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Fill the wall_ms column; it is left blank otherwise so runs diff cleanly.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug)]
pub enum Command {
    /// Build a pole-set for an instance and write it as JSON.
    Polegen(PolegenArgs),
    /// Solve one instance under one counterpart.
    Solve(SolveArgs),
    /// Run a seeded benchmark grid.
    Bench(BenchArgs),
    /// Tighten poles and trace upper and lower bounds.
    Converge(ConvergeArgs),
}

/// Where poles come from: a JSON file, or `auto:simplex`, `auto:2n`,
/// `auto:tighten:K`.
#[derive(Clone, Debug, PartialEq)]
pub enum PoleSource {
    File(PathBuf),
    /// Random simplex circumscribing `P·Ξ`.
    Simplex,
    /// Cross-polytope covering `P·Ξ` around its interior point.
    Cross,
    /// `K` tightening steps from the simplex (from the cross-polytope for
    /// ellipsoids).
    Tighten(usize),
}

impl FromStr for PoleSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let Some(auto) = s.strip_prefix("auto:") else {
            return Ok(Self::File(PathBuf::from(s)));
        };
        match auto {
            "simplex" => Ok(Self::Simplex),
            "2n" => Ok(Self::Cross),
            _ => auto
                .strip_prefix("tighten:")
                .and_then(|k| k.parse().ok())
                .map(Self::Tighten)
                .ok_or_else(|| format!("unknown pole source {s:?}; expected FILE, auto:simplex, auto:2n or auto:tighten:K")),
        }
    }
}

impl std::fmt::Display for PoleSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::File(p) => write!(f, "{}", p.display()),
            Self::Simplex => f.write_str("auto:simplex"),
            Self::Cross => f.write_str("auto:2n"),
            Self::Tighten(k) => write!(f, "auto:tighten:{k}"),
        }
    }
}

/// Half-open seed range `a..b`, or a single seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("bad seed range {s:?}; expected a..b or a single seed");
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?),
            None => {
                let a: u64 = s.parse().map_err(|_| bad())?;
                (a, a + 1)
            }
        };
        if start >= end {
            return Err(format!("seed range {s:?} is empty"));
        }
        Ok(Self { start, end })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Src,
    Aarc,
    Farc,
    Mrc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Compact,
    Cuts,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Compact => Method::Compact,
            MethodArg::Cuts => Method::Cuts,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    LobbyBox,
    LobbyBall,
    NormL1,
    NormL2,
}

impl Family {
    fn as_str(self) -> &'static str {
        match self {
            Self::LobbyBox => "lobby-box",
            Self::LobbyBall => "lobby-ball",
            Self::NormL1 => "norm-l1",
            Self::NormL2 => "norm-l2",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct PolegenArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// An `auto:` source.
    #[arg(long, default_value = "auto:simplex")]
    pub poles: PoleSource,
    /// Stop tightening at this many poles.
    #[arg(long)]
    pub max_poles: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pole-set JSON destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Trajectory CSV destination; stdout when absent.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Mrc)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = MethodArg::Compact)]
    pub method: MethodArg,
    /// Poles for `--mode mrc`; the instance's own poles when absent.
    #[arg(long)]
    pub poles: Option<PoleSource>,
    /// Cutting-plane violation tolerance.
    #[arg(long, default_value_t = tol::FEASIBILITY)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV file to append to; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Voters (lobbying only).
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Uncertainty dimension.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Shadow dimension; `n` when absent.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Adaptability ratios (lobbying only).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub theta: Vec<f64>,
    #[arg(long, default_value = "0..1")]
    pub seeds: SeedRange,
    #[arg(long, value_delimiter = ',', default_value = "auto:simplex,auto:2n")]
    pub poles: Vec<PoleSource>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct ConvergeArgs {
    /// Instance with an identity shadow.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    pub instance: Option<PathBuf>,
    /// Generate a lobbying instance instead.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starting poles.
    #[arg(long, default_value = "auto:simplex")]
    pub poles: PoleSource,
    #[arg(long, default_value_t = 64)]
    pub max_poles: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    #[arg(long)]
    pub max_seconds: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-column `pole_count gap` file for plotting.
    #[arg(long)]
    pub gap_file: Option<PathBuf>,
}

/// 1 for failures of the solve itself, 2 for bad configuration or input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver(_)
        | Error::Infeasible(_)
        | Error::Unbounded(_)
        | Error::Degenerate(_)
        | Error::IterationLimit(_)
        | Error::BoundViolation(_) => 1,
        Error::Dimension(_)
        | Error::Invalid(_)
        | Error::Validation(_)
        | Error::NotCovering(_)
        | Error::CapExceeded { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "dimension",
        Error::Invalid(_) => "invalid",
        Error::Validation(_) => "validation",
        Error::Solver(_) => "solver",
        Error::Infeasible(_) => "infeasible",
        Error::Unbounded(_) => "unbounded",
        Error::NotCovering(_) => "not-covering",
        Error::CapExceeded { .. } => "cap-exceeded",
        Error::Degenerate(_) => "degenerate",
        Error::IterationLimit(_) => "iteration-limit",
        Error::BoundViolation(_) => "bound-violation",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

pub fn diagnostic(kind: &str, code: i32, message: &str) -> String {
    let flat: Vec<&str> = message.split_whitespace().collect();
    format!("mpro: error kind={kind} exit={code}: {}", flat.join(" "))
}

pub fn error_diagnostic(e: &Error) -> String {
    diagnostic(error_kind(e), exit_code(e), &e.to_string())
}

/// First 12 hex digits of the SHA-256 of the value-relevant configuration.
pub fn config_hash(config: &impl Debug) -> String {
    let text = format!("{config:?}|accuracy={:e}", default_accuracy());
    Sha256::digest(text.as_bytes())[..6]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("{}", diagnostic("usage", 2, first));
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_diagnostic(&e));
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Ok(text) = std::env::var(ACCURACY_ENV) {
        parse_accuracy(&text)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Polegen(a) => polegen(a),
        Command::Solve(a) => solve(a, cli.timing),
        Command::Bench(a) => bench(a, cli.timing),
        Command::Converge(a) => converge_cmd(a, cli.timing),
    })
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn wall(timing: bool, ms: f64) -> String {
    if timing {
        format!("{ms:.3}")
    } else {
        String::new()
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Writes header and rows to `path` (appending when asked and the file
/// already has content) or to stdout.
fn write_csv(
    path: Option<&Path>,
    append: bool,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let (sink, with_header): (Box<dyn Write>, bool) = match path {
        Some(p) => {
            let existing = append && std::fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false);
            let file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(append)
                .truncate(!append)
                .open(p)?;
            (Box::new(file), !existing)
        }
        None => (Box::new(io::stdout().lock()), true),
    };
    let mut w = csv::Writer::from_writer(sink);
    if with_header {
        w.write_record(header)?;
    }
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn check_tol(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Invalid(format!(
            "tolerance must be positive, got {t}"
        )));
    }
    Ok(())
}

/// Generated poles with the trajectory that produced them (one entry
/// unless tightening ran).
fn auto_poles(
    source: &PoleSource,
    set: &UncertaintySet,
    shadow: &ShadowMatrix,
    rng: &mut ChaCha8Rng,
    max_poles: usize,
) -> Result<Vec<PoleSet>> {
    let image = ShadowImage { set, shadow };
    let simplex = |rng: &mut ChaCha8Rng| -> Result<PoleSet> {
        Ok(circumscribe(&random_affine_basis(shadow.rows(), rng)?, &image)?.poles)
    };
    let cross = || cross_polytope_cover(&image, &shadow.apply(&set.interior_point()?)?);
    match source {
        PoleSource::File(p) => Ok(vec![load_poles(p)?]),
        PoleSource::Simplex => Ok(vec![simplex(rng)?]),
        PoleSource::Cross => Ok(vec![cross()?]),
        PoleSource::Tighten(k) => {
            if !shadow.is_identity() {
                return Err(Error::Invalid(
                    "tightening needs an identity shadow matrix".into(),
                ));
            }
            let start = match set {
                UncertaintySet::Ellipsoid(_) => cross()?,
                _ => simplex(rng)?,
            };
            tighten_with(&start, set, max_poles, *k)
        }
    }
}

/// Spec over generated poles (covering by construction) or loaded ones
/// (certified).
fn mrc_spec(
    problem: &RobustProblem,
    set: &UncertaintySet,
    shadow: &ShadowMatrix,
    source: &PoleSource,
    poles: PoleSet,
) -> Result<MrcSpec> {
    match source {
        PoleSource::File(_) => MrcSpec::new(problem.clone(), set.clone(), shadow.clone(), poles),
        _ => MrcSpec::with_coverage(
            problem.clone(),
            set.clone(),
            shadow.clone(),
            poles,
            CoverageStrategy::Construction,
        ),
    }
}

fn polegen(a: &PolegenArgs) -> Result<()> {
    if matches!(a.poles, PoleSource::File(_)) {
        return Err(Error::Invalid("polegen needs an auto: pole source".into()));
    }
    let inst = Instance::load(&a.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let trajectory = auto_poles(
        &a.poles,
        &inst.uncertainty,
        &inst.shadow,
        &mut rng,
        a.max_poles.unwrap_or(usize::MAX),
    )?;
    let hash = config_hash(&PolegenArgs {
        out: PathBuf::new(),
        trajectory: None,
        ..a.clone()
    });
    let rows = trajectory
        .iter()
        .enumerate()
        .map(|(i, omega)| {
            let h = if inst.shadow.is_identity() {
                num(hausdorff(omega, &inst.uncertainty)?)
            } else {
                String::new()
            };
            Ok(vec![
                i.to_string(),
                omega.len().to_string(),
                h,
                hash.clone(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    save_poles(trajectory.last().expect("nonempty trajectory"), &a.out)?;
    write_csv(
        a.trajectory.as_deref(),
        false,
        &["iteration", "pole_count", "hausdorff", "config_hash"],
        &rows,
    )
}

fn solve(a: &SolveArgs, timing: bool) -> Result<()> {
    check_tol(a.tol)?;
    let inst = Instance::load(&a.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let options = SolveOptions {
        tol: a.tol,
        ..SolveOptions::default()
    };
    let method: Method = a.method.into();
    let (set, shadow, problem) = (&inst.uncertainty, &inst.shadow, &inst.problem);
    let t0 = Instant::now();
    let (method_label, poles, value, iters) = match a.mode {
        Mode::Src => {
            let s = solve_src_with(problem, set, method, &options)?;
            (method.as_str(), 1, s.objective, Some(s.iterations))
        }
        Mode::Aarc => {
            let poles =
                auto_poles(&PoleSource::Simplex, set, shadow, &mut rng, usize::MAX)?.remove(0);
            let spec = mrc_spec(problem, set, shadow, &PoleSource::Simplex, poles)?;
            let s = solve_mrc(&spec, method, &options)?;
            (
                method.as_str(),
                s.pole_count(),
                s.objective,
                Some(s.iterations),
            )
        }
        Mode::Farc => {
            let s = solve_farc(problem, set)?;
            ("vertices", s.recourses.len(), s.objective, None)
        }
        Mode::Mrc => {
            let (source, poles) = match (&a.poles, &inst.poles) {
                (Some(src), _) => (
                    src.clone(),
                    auto_poles(src, set, shadow, &mut rng, usize::MAX)?
                        .pop()
                        .expect("nonempty"),
                ),
                (None, Some(p)) => (PoleSource::File(a.instance.clone()), p.clone()),
                (None, None) => {
                    return Err(Error::Invalid(
                        "instance has no poles; pass --poles FILE or an auto: source".into(),
                    ))
                }
            };
            let spec = mrc_spec(problem, set, shadow, &source, poles)?;
            let s = solve_mrc(&spec, method, &options)?;
            (
                method.as_str(),
                s.pole_count(),
                s.objective,
                Some(s.iterations),
            )
        }
    };
    let ms = elapsed_ms(t0);
    let hash = config_hash(&SolveArgs {
        out: None,
        ..a.clone()
    });
    let mode = format!("{:?}", a.mode).to_lowercase();
    write_csv(
        a.out.as_deref(),
        true,
        &[
            "instance",
            "mode",
            "method",
            "poles",
            "value",
            "wall_ms",
            "iters",
            "config_hash",
        ],
        &[vec![
            a.instance.display().to_string(),
            mode,
            method_label.to_string(),
            poles.to_string(),
            num(value),
            wall(timing, ms),
            iters.map(|i| i.to_string()).unwrap_or_default(),
            hash,
        ]],
    )
}

/// One generated benchmark instance.
struct Cell {
    label: String,
    problem: RobustProblem,
    set: UncertaintySet,
    shadow: ShadowMatrix,
    /// Best known value, when computable.
    farc: Option<Result<f64>>,
    seed: u64,
}

fn build_cell(a: &BenchArgs, seed: u64, theta: f64) -> Result<Cell> {
    let n0 = a.n0.unwrap_or(a.n);
    let label = match a.family {
        Family::LobbyBox | Family::LobbyBall => format!(
            "{}/m={}/n={}/n0={n0}/theta={theta}/seed={seed}",
            a.family.as_str(),
            a.m,
            a.n
        ),
        Family::NormL1 | Family::NormL2 => format!("{}/n={}/n0={n0}", a.family.as_str(), a.n),
    };
    match a.family {
        Family::LobbyBox | Family::LobbyBall => {
            let inst = generate_lobbying(a.m, a.n, seed)?;
            let set = match a.family {
                Family::LobbyBox => UncertaintySet::unit_cube(a.n),
                _ => unit_volume_ball(a.n)?,
            };
            let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::new(theta, a.m)?)?;
            let farc = match &set {
                UncertaintySet::Box(_) if a.n <= FARC_BOX_CAP => {
                    Some(solve_farc(&problem, &set).map(|s| s.objective))
                }
                UncertaintySet::Ellipsoid(e) if theta == 1.0 => Some(farc_ball_simple(&inst, e)),
                _ => None,
            };
            Ok(Cell {
                label,
                problem,
                shadow: ShadowMatrix::coordinate_projection(n0, a.n)?,
                set,
                farc,
                seed,
            })
        }
        Family::NormL1 | Family::NormL2 => {
            if a.theta.iter().any(|&t| t != 1.0) {
                return Err(Error::Invalid(
                    "--theta applies to lobbying families only".into(),
                ));
            }
            let kind = if a.family == Family::NormL1 {
                NormKind::L1
            } else {
                NormKind::L2
            };
            let ex = build_norm_example(a.n, n0, kind)?;
            let farc = Some(norm_farc_value(&ex));
            Ok(Cell {
                label,
                problem: ex.problem,
                set: ex.uncertainty,
                shadow: ex.shadow,
                farc,
                seed,
            })
        }
    }
}

fn bench_rows(
    a: &BenchArgs,
    seed: u64,
    theta: f64,
    timing: bool,
    hash: &str,
) -> Result<Vec<Vec<String>>> {
    let t0 = Instant::now();
    let cell = build_cell(a, seed, theta)?;
    let farc = cell.farc.transpose()?;
    let farc_ms = elapsed_ms(t0);
    let mut rng = ChaCha8Rng::seed_from_u64(cell.seed);
    let row = |mode: String, poles: usize, value: f64, gap: Option<f64>, ms: f64| {
        vec![
            cell.label.clone(),
            mode,
            poles.to_string(),
            num(value),
            opt_num(gap),
            wall(timing, ms),
            PRNG_ID.to_string(),
            hash.to_string(),
        ]
    };
    let options = SolveOptions::default();
    let mut rows = Vec::new();

    let t = Instant::now();
    let src = solve_src_with(&cell.problem, &cell.set, Method::Compact, &options)?;
    rows.push(row("src".into(), 1, src.objective, None, elapsed_ms(t)));

    let t = Instant::now();
    let simplex = auto_poles(
        &PoleSource::Simplex,
        &cell.set,
        &cell.shadow,
        &mut rng,
        usize::MAX,
    )?
    .remove(0);
    let aarc_poles = simplex.len();
    let aarc = solve_mrc(
        &mrc_spec(
            &cell.problem,
            &cell.set,
            &cell.shadow,
            &PoleSource::Simplex,
            simplex,
        )?,
        Method::Compact,
        &options,
    )?
    .objective;
    let gap = |v: f64| farc.and_then(|best| closed_gap_percent(aarc, v, best));
    rows.push(row(
        "aarc".into(),
        aarc_poles,
        aarc,
        gap(aarc),
        elapsed_ms(t),
    ));

    for source in &a.poles {
        let t = Instant::now();
        let poles = auto_poles(source, &cell.set, &cell.shadow, &mut rng, usize::MAX)?
            .pop()
            .expect("nonempty");
        let count = poles.len();
        let spec = mrc_spec(&cell.problem, &cell.set, &cell.shadow, source, poles)?;
        let value = solve_mrc(&spec, Method::Compact, &options)?.objective;
        rows.push(row(
            format!("mrc[{source}]"),
            count,
            value,
            gap(value),
            elapsed_ms(t),
        ));
    }
    if let Some(best) = farc {
        rows.push(row("farc".into(), 0, best, None, farc_ms));
    }
    Ok(rows)
}

fn bench(a: &BenchArgs, timing: bool) -> Result<()> {
    for &t in &a.theta {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid(format!("theta must be in [0, 1], got {t}")));
        }
    }
    let hash = config_hash(&BenchArgs {
        out: None,
        ..a.clone()
    });
    let cells: Vec<(u64, f64)> = (a.seeds.start..a.seeds.end)
        .flat_map(|s| a.theta.iter().map(move |&t| (s, t)))
        .collect();
    let rows: Vec<Vec<Vec<String>>> = cells
        .par_iter()
        .map(|&(seed, theta)| bench_rows(a, seed, theta, timing, &hash))
        .collect::<Result<_>>()?;
    write_csv(
        a.out.as_deref(),
        false,
        &[
            "instance",
            "mode",
            "poles",
            "value",
            "closed_gap_pct",
            "wall_ms",
            "prng",
            "config_hash",
        ],
        &rows.concat(),
    )
}

fn converge_cmd(a: &ConvergeArgs, timing: bool) -> Result<()> {
    if a.max_seconds.is_some_and(|s| !(s > 0.0)) {
        return Err(Error::Invalid("--max-seconds must be positive".into()));
    }
    let (problem, set, shadow) = match (&a.instance, a.family) {
        (Some(path), _) => {
            let inst = Instance::load(path)?;
            (inst.problem, inst.uncertainty, inst.shadow)
        }
        (None, Some(family @ (Family::LobbyBox | Family::LobbyBall))) => {
            let inst = generate_lobbying(a.m, a.n, a.seed)?;
            let set = if family == Family::LobbyBox {
                UncertaintySet::unit_cube(a.n)
            } else {
                unit_volume_ball(a.n)?
            };
            let problem = build_lobbying(&inst, &set, &AdaptabilitySpec::new(a.theta, a.m)?)?;
            (problem, set, ShadowMatrix::identity(a.n))
        }
        (None, _) => {
            return Err(Error::Invalid(
                "converge generates lobbying families only".into(),
            ))
        }
    };
    if !shadow.is_identity() {
        return Err(Error::Invalid(
            "converge needs an identity shadow matrix".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let initial = auto_poles(&a.poles, &set, &shadow, &mut rng, a.max_poles)?
        .pop()
        .expect("nonempty");
    let budget = Budget {
        max_iterations: a.max_iterations,
        max_seconds: a.max_seconds,
    };
    let trace: BoundsTrace = converge(&problem, &set, &initial, a.max_poles, &budget)?;
    if trace.truncated {
        log::warn!("budget ended the run after {} iterations", trace.rows.len());
    }
    let hash = config_hash(&ConvergeArgs {
        out: None,
        gap_file: None,
        ..a.clone()
    });
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                r.pole_count.to_string(),
                num(r.hausdorff),
                num(r.upper_bound),
                num(r.lower_bound),
                num(r.gap()),
                wall(timing, r.wall_ms),
                hash.clone(),
            ]
        })
        .collect();
    if let Some(path) = &a.gap_file {
        let mut text = String::from("# pole_count gap\n");
        for r in &trace.rows {
            text.push_str(&format!("{} {}\n", r.pole_count, r.gap()));
        }
        std::fs::write(path, text)?;
    }
    write_csv(
        a.out.as_deref(),
        false,
        &[
            "iteration",
            "pole_count",
            "hausdorff",
            "upper_bound",
            "lower_bound",
            "gap",
            "wall_ms",
            "config_hash",
        ],
        &rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_sources_parse() {
        assert_eq!(
            "auto:simplex".parse::<PoleSource>().unwrap(),
            PoleSource::Simplex
        );
        assert_eq!("auto:2n".parse::<PoleSource>().unwrap(), PoleSource::Cross);
        assert_eq!(
            "auto:tighten:7".parse::<PoleSource>().unwrap(),
            PoleSource::Tighten(7)
        );
        assert_eq!(
            "p.json".parse::<PoleSource>().unwrap(),
            PoleSource::File("p.json".into())
        );
        assert!("auto:tighten:x".parse::<PoleSource>().is_err());
        assert_eq!(PoleSource::Tighten(3).to_string(), "auto:tighten:3");
    }

    #[test]
    fn seed_ranges_parse() {
        assert_eq!(
            "2..5".parse::<SeedRange>().unwrap(),
            SeedRange { start: 2, end: 5 }
        );
        assert_eq!(
            "4".parse::<SeedRange>().unwrap(),
            SeedRange { start: 4, end: 5 }
        );
        assert!("5..5".parse::<SeedRange>().is_err());
        assert!("a..b".parse::<SeedRange>().is_err());
    }

    #[test]
    fn exit_codes_split_config_from_solver() {
        assert_eq!(exit_code(&Error::Invalid("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(io::Error::other("x"))), 2);
        assert_eq!(exit_code(&Error::Infeasible("x".into())), 1);
        assert_eq!(exit_code(&Error::Solver("x".into())), 1);
        let d = error_diagnostic(&Error::Validation(vec!["a\nb".into(), "c".into()]));
        assert!(!d.contains('\n'));
        assert!(d.starts_with("mpro: error kind=validation exit=2: "));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = SeedRange { start: 0, end: 1 };
        assert_eq!(config_hash(&a), config_hash(&a));
        assert_eq!(config_hash(&a).len(), 12);
        assert_ne!(
            config_hash(&a),
            config_hash(&SeedRange { start: 0, end: 2 })
        );
    }
}
