//! Command-line definitions and the five subcommands.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use refractor_core::norms::Regime;
use refractor_core::snell::{check_constraint, refract};
use refractor_core::solver::{solve, Refractor, SolveOptions};
use refractor_core::surfaces::UniformSurface;
use refractor_core::transport::{assignment_agreement, check_c_concavity};
use refractor_core::Vector;
use serde::{Deserialize, Serialize};

use crate::format::{fmt17, to_json};
use crate::mesh::radial_obj;
use crate::problem::{MaterialSpec, MediaSpec, NormSpec, Problem};
use crate::{read, write, CliError};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "REFRACTOR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "refractor", version, about = "Refractor design between anisotropic media")]
pub struct Cli {
    /// Worker threads, 0 for one per logical core. REFRACTOR_THREADS overrides it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refract one direction at a plane interface.
    Snell(SnellArgs),
    /// Design a refractor for a problem file.
    Design(DesignArgs),
    /// Tabulate the Fresnel sheets of a material.
    Fresnel(FresnelArgs),
    /// Compare a design with the exact optimal transport plan.
    Verify(VerifyArgs),
    /// Write a refractor or a single uniform surface as OBJ.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SnellArgs {
    /// Event file `{media, x, nu}`, or `-` for stdin.
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Problem file.
    pub problem: PathBuf,
    /// Override the problem's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    /// Write the refractor mesh here.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Write the per-target CSV report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the solution JSON here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the radii as a golden file.
    #[arg(long)]
    pub regen_golden: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FresnelArgs {
    /// Material file `{eps, mu}`.
    pub material: PathBuf,
    /// Directions sampled on the sphere, after the three coordinate axes.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the induced norm here; fails for two-sheet materials.
    #[arg(long)]
    pub norm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Problem file.
    pub problem: PathBuf,
    /// Solution to check; solved from scratch when absent.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Size of the strided node subset.
    #[arg(long, default_value_t = 500)]
    pub nodes: usize,
    /// Log-gap below which a node counts as tied.
    #[arg(long, default_value_t = 1e-9)]
    pub band: f64,
    /// Write the agreement JSON here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Problem file; its source cap provides the mesh nodes.
    pub problem: PathBuf,
    /// Solution whose refractor is exported.
    #[arg(long, conflicts_with_all = ["m", "b"], required_unless_present = "m")]
    pub solution: Option<PathBuf>,
    /// Direction of a single surface, as `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "b")]
    pub m: Option<Vec<f64>>,
    /// Parameter of that surface.
    #[arg(long, requires = "m")]
    pub b: Option<f64>,
    /// Write the OBJ here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Thread count after applying the environment override.
pub fn thread_count(flag: usize) -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{THREADS_ENV} must be a thread count, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

/// Runs a parsed command line and returns what goes to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cli.threads)?)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Snell(a) => snell(a),
        Command::Design(a) => design(a),
        Command::Fresnel(a) => fresnel(a),
        Command::Verify(a) => verify(a),
        Command::Export(a) => export(a),
    })
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(s)
    } else {
        read(path)
    }
}

/// Writes `text` to `path`, or hands it back for stdout.
fn emit(path: Option<&Path>, text: String) -> Result<String, CliError> {
    match path {
        Some(p) => write(p, &text).map(|()| String::new()),
        None => Ok(text),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnellInput {
    media: MediaSpec,
    x: [f64; 3],
    nu: [f64; 3],
}

/// Output of `snell`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventJson {
    pub x: [f64; 3],
    pub nu: [f64; 3],
    pub m: [f64; 3],
    pub lambda: f64,
    /// Whether the pair passes the physical constraint of its regime.
    pub constraint: bool,
}

/// `x` is scaled onto `Σ₁` and `nu` to unit length before refracting.
pub fn snell(a: &SnellArgs) -> Result<String, CliError> {
    let input: SnellInput = serde_json::from_str(&read_input(&a.input)?)
        .map_err(|e| CliError::Validation(format!("snell input: {e}")))?;
    let pair = input.media.build()?;
    let x = pair.n1().normalize(&Vector::new(input.x))?;
    let nu = Vector::new(input.nu);
    if nu.is_zero() || !nu.is_finite() {
        return Err(CliError::Validation("nu must be a nonzero vector".into()));
    }
    let e = refract(&pair, &x, &nu.normalized())?;
    Ok(to_json(&EventJson {
        x: e.x.0,
        nu: e.nu.0,
        m: e.m.0,
        lambda: e.lambda,
        constraint: check_constraint(&pair, &e.x, &e.m),
    }))
}

/// Output of `design`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub regime: String,
    pub kappa: f64,
    pub b1: f64,
    pub node_count: usize,
    pub source_total: f64,
    /// `b_i`.
    pub radii: Vec<f64>,
    /// Prescribed `g_i` after rescaling to the source total.
    pub goals: Vec<f64>,
    /// Delivered `M_i`.
    pub masses: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Residual after initialization and after every sweep.
    pub residual_history: Vec<f64>,
    pub tied_nodes: usize,
    pub boundary_arcs: usize,
}

/// Radii checked in next to a packaged example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Golden {
    pub radii: Vec<f64>,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::CaseI => "case_i",
        Regime::CaseII => "case_ii",
    }
}

pub fn design(a: &DesignArgs) -> Result<String, CliError> {
    let p = Problem::load(&a.problem)?;
    let opts = SolveOptions {
        tol: a.tol.unwrap_or(p.spec.tol),
        max_sweeps: a.max_sweeps,
        initial_radii: None,
    };
    let sol = solve(&p.pair, &p.source, &p.target, p.spec.b1, &opts)?;
    let radii = sol.refractor.radii();
    log::info!(
        "converged in {} sweeps, residual {:e}",
        sol.sweeps,
        sol.report.residual
    );
    if let Some(path) = &a.mesh {
        write(path, &refractor_obj(&p, &sol.refractor))?;
    }
    if let Some(path) = &a.report {
        let mut csv = String::from("index,g,M,b\n");
        for (i, ((g, m), b)) in p.target.masses().iter().zip(&sol.report.masses).zip(&radii).enumerate() {
            let _ = writeln!(csv, "{i},{},{},{}", fmt17(*g), fmt17(*m), fmt17(*b));
        }
        write(path, &csv)?;
    }
    if let Some(path) = &a.regen_golden {
        write(path, &to_json(&Golden { radii: radii.clone() }))?;
    }
    let out = SolutionJson {
        regime: regime_name(p.pair.regime()).into(),
        kappa: p.pair.kappa(),
        b1: p.spec.b1,
        node_count: p.source.len(),
        source_total: p.source.total(),
        radii,
        goals: p.target.masses().to_vec(),
        masses: sol.report.masses.clone(),
        residual: sol.report.residual,
        iterations: sol.sweeps,
        residual_history: sol.residual_history.clone(),
        tied_nodes: sol.report.tied_nodes,
        boundary_arcs: sol.boundary_arcs.len(),
    };
    emit(a.out.as_deref(), to_json(&out))
}

fn refractor_obj(p: &Problem, r: &Refractor<3>) -> String {
    let rho: Vec<f64> = p.source.nodes().iter().map(|x| r.radius(x)).collect();
    radial_obj(
        p.source.nodes(),
        &rho,
        p.source.triangles(),
        &format!("refractor, {} targets, {}", r.target().len(), regime_name(r.regime())),
    )
}

/// Refractor built from a solution file and the problem it solved.
pub fn load_refractor(p: &Problem, path: &Path) -> Result<Refractor<3>, CliError> {
    let s: SolutionJson = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("solution: {e}")))?;
    if s.radii.len() != p.target.len() {
        return Err(CliError::Validation(format!(
            "solution has {} radii but the problem has {} targets",
            s.radii.len(),
            p.target.len()
        )));
    }
    Ok(Refractor::new(&p.pair, p.target.clone(), s.radii)?)
}

/// Directions of the CSV rows: the coordinate axes, then a Fibonacci sphere.
pub fn fresnel_directions(samples: usize) -> Vec<Vector<3>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut dirs = vec![Vector::unit(0), Vector::unit(1), Vector::unit(2)];
    dirs.extend((0..samples).map(|k| {
        let z = 1.0 - (2 * k + 1) as f64 / samples as f64;
        let s = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * k as f64;
        Vector::new([s * phi.cos(), s * phi.sin(), z])
    }));
    dirs
}

pub fn fresnel(a: &FresnelArgs) -> Result<String, CliError> {
    let spec: MaterialSpec = serde_json::from_str(&read(&a.material)?)
        .map_err(|e| CliError::Validation(format!("material: {e}")))?;
    let mat = spec.build()?;
    if let Some(path) = &a.norm {
        let n = mat.induced_norm()?;
        write(path, &to_json(&NormSpec::from_norm(&n)))?;
    }
    let mut csv = String::from("ux,uy,uz,r_inner,r_outer\n");
    for u in fresnel_directions(a.samples) {
        let s = mat.sheet_radii(&u)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt17(u[0]),
            fmt17(u[1]),
            fmt17(u[2]),
            fmt17(s.r_inner),
            fmt17(s.r_outer)
        );
    }
    emit(a.out.as_deref(), csv)
}

/// Output of `verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementJson {
    pub nodes: usize,
    pub targets: usize,
    pub total: f64,
    pub tie_band_mass: f64,
    pub mismatched_mass: f64,
    pub objective_plan: f64,
    pub objective_refractor: f64,
    pub relative_gap: f64,
    pub pivots: usize,
    pub c_concave: bool,
}

pub fn verify(a: &VerifyArgs) -> Result<String, CliError> {
    let p = Problem::load(&a.problem)?;
    let r = match &a.solution {
        Some(path) => load_refractor(&p, path)?,
        None => {
            let opts = SolveOptions {
                tol: p.spec.tol,
                ..SolveOptions::default()
            };
            solve(&p.pair, &p.source, &p.target, p.spec.b1, &opts)?.refractor
        }
    };
    let (_, sub) = p.source.strided_subset(a.nodes);
    let ag = assignment_agreement(&p.pair, &r, &sub, a.band)?;
    let out = AgreementJson {
        nodes: ag.nodes,
        targets: ag.targets,
        total: ag.total,
        tie_band_mass: ag.tie_band_mass,
        mismatched_mass: ag.mismatched_mass,
        objective_plan: ag.objective_plan,
        objective_refractor: ag.objective_refractor,
        relative_gap: ag.relative_gap,
        pivots: ag.pivots,
        c_concave: check_c_concavity(&p.pair, &r, &sub)?,
    };
    emit(a.out.as_deref(), to_json(&out))
}

pub fn export(a: &ExportArgs) -> Result<String, CliError> {
    let p = Problem::load(&a.problem)?;
    let obj = match (&a.solution, &a.m, a.b) {
        (Some(path), _, _) => refractor_obj(&p, &load_refractor(&p, path)?),
        (None, Some(m), Some(b)) => {
            let m: [f64; 3] = m
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Validation("--m needs three components".into()))?;
            let m = Vector::new(m);
            let n = p.pair.n2().eval(&m);
            if !(n > 0.0 && n.is_finite()) {
                return Err(CliError::Validation("m must be a nonzero vector".into()));
            }
            let s = UniformSurface::new(&p.pair, m / n, b)?;
            let rho: Vec<f64> = p
                .source
                .nodes()
                .iter()
                .map(|x| s.radius(x).unwrap_or(f64::INFINITY))
                .collect();
            radial_obj(
                p.source.nodes(),
                &rho,
                p.source.triangles(),
                &format!("uniform surface, b = {}, {}", fmt17(b), regime_name(s.regime())),
            )
        }
        _ => return Err(CliError::Validation("export needs --solution or both --m and --b".into())),
    };
    emit(a.out.as_deref(), obj)
}
