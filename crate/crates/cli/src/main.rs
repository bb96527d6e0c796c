//! `cmcgraph`: bounds, barrier certificates, radial and finite element
//! solves, and existence sweeps for prescribed mean curvature graphs.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 mathematical
//! failure (no solution, uncertified barrier, `H ≥ C`), 3 internal numeric
//! error.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cmc_core::barriers::{
    certify_barrier_with, BarrierCertificate, BarrierParams, CertifyOptions, LaplacianModel,
    DEFAULT_ALPHA, DEFAULT_GRID_SIZE,
};
use cmc_core::constants::{cmc_constant_c, cmc_height_bound, delta, minimal_height_bound};
use cmc_core::fem::{
    continuation_solve, max_gradient, mesh_annulus, ContinuationTrace, Mesh, SolverConfig,
};
use cmc_core::geometry::{boundary_geometry, DomainSpec};
use cmc_core::radial::{
    existence_threshold, solve_radial_with, RadialOptions, RadialProblem, DEFAULT_SAMPLES,
};
use cmc_core::report::BoundsReport;
use rayon::prelude::*;
use serde::Serialize;

use output::{emit, to_json, Csv};

#[derive(Parser)]
#[command(name = "cmcgraph", version, about = "Height bounds and solvers for CMC graphs over circular domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants and height bounds for a domain.
    Bounds(BoundsArgs),
    /// Check the tube barrier supersolution inequality near each boundary circle.
    Certify(CertifyArgs),
    /// Rotationally symmetric solution on an annulus or disk.
    Radial(RadialArgs),
    /// Finite element solution by continuation in t.
    Solve(SolveArgs),
    /// Empirical existence threshold h* against the admissible height h_H.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long = "H", default_value_t = 0.0)]
    mean_curvature: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// Exact Δd of the circle.
    Exact,
    /// Constant worst case Δd = μ.
    Bound,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long = "H", default_value_t = 0.0)]
    mean_curvature: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Defaults to δ.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    #[arg(long, value_enum, default_value = "exact")]
    model: Model,
    /// Scan [0, extent·ε]; values above 1 locate the first sign change.
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RadialArgs {
    /// Concentric annulus domain file. Alternatively give --r-outer.
    #[arg(long, conflicts_with_all = ["r_inner", "r_outer", "n"])]
    domain: Option<PathBuf>,
    /// Zero for a disk.
    #[arg(long, default_value_t = 0.0)]
    r_inner: f64,
    #[arg(long)]
    r_outer: Option<f64>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "H", default_value_t = 0.0)]
    mean_curvature: f64,
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Triangulation to use; without it a concentric annulus is meshed.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Target edge length for the generated mesh.
    #[arg(long, default_value_t = 0.05)]
    edge: f64,
    #[arg(long = "H", default_value_t = 0.0)]
    mean_curvature: f64,
    #[arg(long)]
    h: f64,
    /// Seed for the warm start perturbation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    perturbation: f64,
    #[arg(long, default_value_t = 1.0)]
    initial_damping: f64,
    #[arg(long, default_value_t = 20.0)]
    gradient_cap: f64,
    /// Also write the continuation trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Comma separated H values. Defaults to `count` points on [0, 0.95 C].
    #[arg(long = "H-grid")]
    h_grid: Option<String>,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Bisection tolerance on h.
    #[arg(long, default_value_t = 1e-6)]
    h_tol: f64,
    /// Use finite elements on this mesh instead of the radial solver.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Mesh a concentric annulus at this edge length and use finite elements.
    #[arg(long)]
    edge: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    common: Common,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, error: error.into() }
    }

    fn math(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: error.into() }
    }

    fn internal(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 3, error: error.into() }
    }
}

impl From<cmc_core::Error> for Failure {
    fn from(e: cmc_core::Error) -> Self {
        use cmc_core::Error::*;
        let code = match e {
            Degenerate(_) | CurvatureOutOfRange { .. } | CapDoesNotExist(_) => 2,
            Quadrature { .. } | LinearSolve(_) => 3,
            _ => 1,
        };
        Self { code, error: e.into() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::internal(e)
    }
}

type Outcome = Result<(), Failure>;

fn read_domain(path: &Path) -> Result<DomainSpec, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)?;
    Ok(DomainSpec::from_json(&text)?)
}

fn finite(name: &str, x: f64) -> Result<(), Failure> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Failure::usage(anyhow!("{name} must be finite, got {x}")))
    }
}

fn json_only(common: &Common, command: &str) -> Result<(), Failure> {
    if common.format == Format::Csv {
        return Err(Failure::usage(anyhow!("{command} only writes JSON")));
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Outcome {
    json_only(&args.common, "bounds")?;
    finite("H", args.mean_curvature)?;
    let domain = read_domain(&args.domain)?;
    let report = BoundsReport::compute(&domain, args.mean_curvature)?;
    emit(&to_json(&report)?, args.common.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct CertifyReport {
    format: u32,
    all_certified: bool,
    certificates: Vec<BarrierCertificate>,
}

fn certify(args: CertifyArgs) -> Outcome {
    json_only(&args.common, "certify")?;
    for (name, x) in [("H", args.mean_curvature), ("alpha", args.alpha), ("extent", args.extent)] {
        finite(name, x)?;
    }
    let domain = read_domain(&args.domain)?;
    let g = boundary_geometry(&domain);
    let n = domain.n();
    let params = BarrierParams::new(
        n,
        args.mean_curvature,
        g.mu(n),
        args.alpha,
        args.lambda.unwrap_or_else(delta),
        g.reach,
    )?;
    let options = CertifyOptions {
        grid_size: args.grid,
        extent: args.extent,
        model: match args.model {
            Model::Exact => LaplacianModel::ExactCircle,
            Model::Bound => LaplacianModel::CurvatureBound,
        },
    };
    let certificates = domain
        .components()
        .map(|c| certify_barrier_with(&params, &domain, c, options))
        .collect::<Result<Vec<_>, _>>()?;
    let all_certified = certificates.iter().all(|c| c.certified);
    let report = CertifyReport {
        format: 1,
        all_certified,
        certificates,
    };
    emit(&to_json(&report)?, args.common.out.as_deref())?;
    if all_certified {
        Ok(())
    } else {
        Err(Failure::math(anyhow!("barrier not certified on every component")))
    }
}

fn radial(args: RadialArgs) -> Outcome {
    let problem = match (&args.domain, args.r_outer) {
        (Some(path), _) => RadialProblem::on_domain(&read_domain(path)?, args.mean_curvature, args.h)?,
        (None, Some(ro)) => RadialProblem::new(args.n, args.mean_curvature, args.r_inner, ro, args.h)?,
        (None, None) => return Err(Failure::usage(anyhow!("give --domain or --r-outer"))),
    };
    let profile = solve_radial_with(
        &problem,
        RadialOptions {
            tol: args.tol,
            samples: args.samples,
        },
    )?;
    let bytes = match args.common.format {
        Format::Json => to_json(&profile)?,
        Format::Csv => {
            let mut csv = Csv::new(&["r", "u", "du"]);
            for s in &profile.samples {
                csv.row(&[s.r, s.u, s.du]);
            }
            csv.into_bytes()
        }
    };
    emit(&bytes, args.common.out.as_deref())?;
    if profile.graph_valid {
        Ok(())
    } else {
        Err(Failure::math(anyhow!(
            "no radial graph with h = {}: {:?}",
            problem.h,
            profile.failure
        )))
    }
}

fn load_mesh(domain: &DomainSpec, mesh: Option<&Path>, edge: f64) -> Result<Mesh, Failure> {
    match mesh {
        Some(path) => Ok(Mesh::read(path)?),
        None if domain.is_concentric_annulus() => Ok(mesh_annulus(domain, edge)?),
        None => Err(Failure::usage(anyhow!(
            "only concentric annuli are meshed internally; pass --mesh"
        ))),
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    format: u32,
    #[serde(rename = "H")]
    mean_curvature: f64,
    h: f64,
    nodes: usize,
    triangles: usize,
    converged_to_t1: bool,
    t: f64,
    residual_norm: f64,
    max_gradient: f64,
    /// `[x, y, u]` per node.
    solution: Vec<[f64; 3]>,
    trace: &'a ContinuationTrace,
}

fn solve(args: SolveArgs) -> Outcome {
    for (name, x) in [("H", args.mean_curvature), ("h", args.h), ("edge", args.edge)] {
        finite(name, x)?;
    }
    let domain = read_domain(&args.domain)?;
    let mesh = load_mesh(&domain, args.mesh.as_deref(), args.edge)?;
    let cfg = SolverConfig {
        seed: args.seed,
        perturbation: args.perturbation,
        initial_damping: args.initial_damping,
        gradient_cap: args.gradient_cap,
        ..SolverConfig::default()
    };
    let (sol, trace) = continuation_solve(&mesh, &domain, args.h, args.mean_curvature, &cfg)?;
    if let Some(path) = &args.trace {
        fs::write(path, to_json(&trace)?)?;
    }
    let bytes = match args.common.format {
        Format::Json => to_json(&SolveReport {
            format: 1,
            mean_curvature: args.mean_curvature,
            h: args.h,
            nodes: mesh.nodes().len(),
            triangles: mesh.triangle_count(),
            converged_to_t1: trace.converged_to_t1,
            t: sol.t,
            residual_norm: sol.residual_norm,
            max_gradient: max_gradient(&mesh, &sol.u),
            solution: mesh.nodes().iter().zip(&sol.u).map(|(p, &u)| [p[0], p[1], u]).collect(),
            trace: &trace,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["x", "y", "u"]);
            for (p, &u) in mesh.nodes().iter().zip(&sol.u) {
                csv.row(&[p[0], p[1], u]);
            }
            csv.into_bytes()
        }
    };
    emit(&bytes, args.common.out.as_deref())?;
    match &trace.failure {
        None => Ok(()),
        Some(f) => Err(Failure::math(anyhow!(
            "continuation stopped at t* = {}: {} (max |∇u| {:.3e})",
            f.t_star,
            f.reason,
            f.max_gradient
        ))),
    }
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "H")]
    mean_curvature: f64,
    #[serde(rename = "h_H")]
    h_h: f64,
    h_star: f64,
    /// `h*/h_H`
    ratio: f64,
    /// `h*` over the minimal-surface bound of the same domain.
    ratio_h_max: f64,
}

/// Largest `h` whose continuation reaches `t = 1`, by bisection.
fn fem_threshold(
    mesh: &Mesh,
    domain: &DomainSpec,
    mean_curvature: f64,
    start: f64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<f64, Failure> {
    let solves = |h: f64| -> Result<bool, Failure> {
        Ok(continuation_solve(mesh, domain, h, mean_curvature, cfg)?.1.converged_to_t1)
    };
    if !solves(0.0)? {
        return Err(Failure::math(anyhow!("no discrete solution with h = 0 at H = {mean_curvature}")));
    }
    let limit = 64.0 * domain.outer().radius;
    let (mut lo, mut hi) = (0.0, start.max(tol));
    while solves(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > limit {
            return Err(Failure::internal(anyhow!("no failing height below {limit}")));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if solves(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("bad H value {s:?}"))
                .map_err(Failure::usage)
        })
        .collect()
}

fn sweep(args: SweepArgs) -> Outcome {
    finite("h tolerance", args.h_tol)?;
    if !(args.h_tol > 0.0) {
        return Err(Failure::usage(anyhow!("--h-tol must be positive")));
    }
    let domain = read_domain(&args.domain)?;
    let n = domain.n();
    let g = boundary_geometry(&domain);
    let mu = g.mu(n);
    let c = cmc_constant_c(n, mu, g.circumradius, g.reach)?.c;
    let h_max = minimal_height_bound(n, g.h_inf.abs(), g.reach)?.h_max;

    let grid = match &args.h_grid {
        Some(text) => parse_grid(text)?,
        None if args.count == 1 => vec![0.0],
        None => (0..args.count)
            .map(|k| 0.95 * c * k as f64 / (args.count - 1) as f64)
            .collect(),
    };
    if let Some(&bad) = grid.iter().find(|&&hh| !(hh >= 0.0 && hh < c)) {
        return Err(cmc_core::Error::CurvatureOutOfRange { h: bad, c }.into());
    }

    let fem = if args.mesh.is_some() || args.edge.is_some() {
        Some(load_mesh(&domain, args.mesh.as_deref(), args.edge.unwrap_or(0.05))?)
    } else if domain.is_concentric_annulus() {
        None
    } else {
        return Err(Failure::usage(anyhow!(
            "the radial path needs a concentric annulus; pass --mesh or --edge"
        )));
    };
    let cfg = SolverConfig {
        seed: args.seed,
        ..SolverConfig::default()
    };
    let (ri, ro) = match domain.holes() {
        [hole] => (hole.radius, domain.outer().radius),
        _ => (0.0, 0.0),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(Failure::internal)?;
    let rows: Vec<SweepRow> = pool.install(|| {
        grid.par_iter()
            .map(|&hh| -> Result<SweepRow, Failure> {
                let h_h = cmc_height_bound(n, mu, hh, g.circumradius, g.reach)?;
                let h_star = match &fem {
                    Some(mesh) => fem_threshold(mesh, &domain, hh, h_h, args.h_tol, &cfg)?,
                    None => existence_threshold(n, hh, ri, ro, args.h_tol)?,
                };
                Ok(SweepRow {
                    mean_curvature: hh,
                    h_h,
                    h_star,
                    ratio: h_star / h_h,
                    ratio_h_max: h_star / h_max,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let bytes = match args.common.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut csv = Csv::new(&["H", "h_H", "h_star", "ratio", "ratio_h_max"]);
            for r in &rows {
                csv.row(&[r.mean_curvature, r.h_h, r.h_star, r.ratio, r.ratio_h_max]);
            }
            csv.into_bytes()
        }
    };
    emit(&bytes, args.common.out.as_deref())?;
    match rows.iter().find(|r| r.h_star < r.h_h - args.h_tol) {
        None => Ok(()),
        Some(r) => Err(Failure::internal(anyhow!(
            "h* = {} is below h_H = {} at H = {}",
            r.h_star,
            r.h_h,
            r.mean_curvature
        ))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    // sparse factorizations give bit-identical results only when sequential
    faer::set_global_parallelism(faer::Par::Seq);
    let outcome = match cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Certify(a) => certify(a),
        Command::Radial(a) => radial(a),
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
