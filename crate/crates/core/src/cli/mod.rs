//! The `torsmink` command line.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 numerical
//! failure (non-convergence, a failed check or a failed experiment row).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{wulff_shape, ConvexPolygon, DiscreteMeasure, SupportVector, UnitVector, Vec2};
use crate::solver::{solve_normalized, solve_original, SolveConfig};
use crate::torsion::{analyze, lp_measure, triangulate, DEFAULT_MESH_H};
use crate::verify::{
    bm_check, continuity_in_measure, continuity_in_p, direction_jitter, hadamard_check, identity_suite,
    minkowski_ineq_check, uniqueness_probe, weak_convergence_probe, weight_perturbations, CheckReport,
    ConvergenceTable, Summand, TestFunction, VerifyConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "torsmink", version, about = "Discrete planar L_p torsional Minkowski solver and verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the L_p torsional Minkowski problem for a measure file.
    Solve(SolveArgs),
    /// Rigidity and per-facet torsion measures of a polygon file.
    Torsion(TorsionArgs),
    /// Wulff shape of a measure's normals at given support numbers.
    Wulff(WulffArgs),
    /// Run one verification suite.
    Verify(VerifyArgs),
    /// Continuity experiment in the measure or in p.
    Continuity(ContinuityArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// FEM element size.
    #[arg(long, default_value_t = DEFAULT_MESH_H)]
    pub mesh_h: f64,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub measure: PathBuf,
    #[arg(long)]
    pub p: f64,
    /// Solve the normalized problem (measure divided by T) instead.
    #[arg(long)]
    pub normalized: bool,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: Common,
    /// Also write the FEM mesh of the normalized solution here.
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TorsionArgs {
    pub polygon: PathBuf,
    /// Include the L_p torsion measure for this exponent.
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WulffArgs {
    pub measure: PathBuf,
    /// Comma-separated support numbers, one per atom; all ones when absent.
    #[arg(long, value_delimiter = ',')]
    pub supports: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Hadamard,
    Bm,
    Minkowski,
    Uniqueness,
    Weak,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Polygon files (identities, hadamard, bm, minkowski, weak) or a measure file (uniqueness).
    pub inputs: Vec<PathBuf>,
    /// The two bodies of a pair check.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    pub pair: Option<Vec<PathBuf>>,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Hadamard direction given as a point `x,y` instead of a second body.
    #[arg(long, value_delimiter = ',')]
    pub point: Option<Vec<f64>>,
    /// Hadamard steps as fractions of the body's diameter.
    #[arg(long, value_delimiter = ',', default_values_t = [0.04, 0.02, 0.01])]
    pub steps: Vec<f64>,
    /// Limit polygon of the weak-convergence suite; the inputs are the sequence.
    #[arg(long)]
    pub limit: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of random starts for the uniqueness suite.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Relative slack of the inequality checks.
    #[arg(long, default_value_t = 1e-3)]
    pub slack: f64,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Measure,
    P,
}

#[derive(Debug, Args)]
pub struct ContinuityArgs {
    pub measure: PathBuf,
    #[arg(long)]
    pub mode: Mode,
    #[arg(long)]
    pub p: f64,
    /// Weight perturbations `1 + ε` of one atom (measure mode).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Atom whose weight `--eps` perturbs.
    #[arg(long, default_value_t = 0)]
    pub atom: usize,
    /// Normal-direction jitter amplitudes in radians (measure mode).
    #[arg(long, value_delimiter = ',')]
    pub jitter: Vec<f64>,
    /// Exponents approaching `--p` (p mode).
    #[arg(long, value_delimiter = ',')]
    pub p_seq: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MaxItersExceeded { .. } | Error::SolverDiverged { .. } | Error::IdentityMismatch { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Torsion(a) => cmd_torsion(a),
        Command::Wulff(a) => cmd_wulff(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Continuity(a) => cmd_continuity(a),
    }
}

/// Reads a JSON file; parse errors keep serde's line, column and field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    read_json(path)
}

pub fn read_polygon(path: &Path) -> Result<ConvexPolygon> {
    read_json(path)
}

/// Pretty JSON with a trailing newline to `out`, or standard output.
pub fn write_json<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, &text)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn solve_config(p: f64, flags: &SolverFlags, mesh_h: f64) -> Result<SolveConfig> {
    let cfg = SolveConfig {
        mesh_h,
        tol_residual: flags.tol,
        max_iters: flags.max_iters,
        seed: flags.seed,
        ..SolveConfig::new(p)
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let m = read_measure(&a.measure)?;
    let cfg = solve_config(a.p, &a.solver, a.common.mesh_h)?;
    let result = if a.normalized { solve_normalized(&m, &cfg) } else { solve_original(&m, &cfg) };
    let report = match result {
        Ok(r) => r,
        Err(Error::MaxItersExceeded { iterations, residual, history }) => {
            let failure = json!({ "error": "max_iters_exceeded", "iterations": iterations, "residual": residual, "history": history });
            write_json(a.common.out.as_deref(), &failure)?;
            eprintln!("error: no convergence after {iterations} iterations (residual {residual:e})");
            return Ok(EXIT_NUMERICAL);
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = &a.dump_mesh {
        let body = &report.normalized_solution;
        write_json(Some(path), &triangulate(body, cfg.mesh_h.min(body.diameter()))?)?;
    }
    write_json(a.common.out.as_deref(), &report)?;
    Ok(if report.residual <= cfg.tol_residual { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_torsion(a: &TorsionArgs) -> Result<i32> {
    let poly = read_polygon(&a.polygon)?;
    let (field, data) = analyze(&poly, a.common.mesh_h)?;
    let lp = match a.p {
        Some(p) if p > 1.0 => Some(lp_measure(&data, &poly, p)?),
        Some(p) => return Err(Error::InvalidInput(format!("p must exceed 1, got {p}"))),
        None => None,
    };
    if let Some(path) = &a.dump_mesh {
        write_json(Some(path), &field.mesh)?;
    }
    write_json(
        a.common.out.as_deref(),
        &json!({
            "polygon": poly,
            "torsion": data,
            "max_gradient": field.max_gradient(),
            "max_value": field.max_value(),
            "lp_measure": lp,
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_wulff(a: &WulffArgs) -> Result<i32> {
    let m = read_measure(&a.measure)?;
    let y = a.supports.clone().unwrap_or_else(|| vec![1.0; m.len()]);
    if y.len() != m.len() {
        return Err(Error::InvalidInput(format!("{} supports for {} normals", y.len(), m.len())));
    }
    let poly = wulff_shape(m.normals(), &SupportVector::new(y)?)?;
    write_json(a.out.as_deref(), &poly)?;
    Ok(EXIT_OK)
}

fn two_bodies(a: &VerifyArgs) -> Result<(ConvexPolygon, ConvexPolygon)> {
    let paths = a.pair.as_ref().unwrap_or(&a.inputs);
    match paths.as_slice() {
        [x, y] => Ok((read_polygon(x)?, read_polygon(y)?)),
        _ => Err(Error::InvalidInput("this suite needs exactly two polygon files (--pair A B)".into())),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let cfg = VerifyConfig {
        mesh_h: a.common.mesh_h,
        slack: a.slack,
        ..VerifyConfig::default()
    };
    if !(cfg.mesh_h > 0.0 && cfg.slack >= 0.0) {
        return Err(Error::InvalidInput("mesh_h must be positive and slack nonnegative".into()));
    }
    let reports: Vec<CheckReport> = match a.suite {
        Suite::Identities => {
            if a.inputs.is_empty() {
                return Err(Error::InvalidInput("identities needs at least one polygon file".into()));
            }
            let mut all = Vec::new();
            for path in &a.inputs {
                let poly = read_polygon(path)?;
                for mut r in identity_suite(&poly, &cfg) {
                    r.name = format!("{}:{}", path.display(), r.name);
                    all.push(r);
                }
            }
            all
        }
        Suite::Hadamard => {
            let (body, summand) = match &a.point {
                Some(x) => {
                    let &[px, py] = x.as_slice() else {
                        return Err(Error::InvalidInput("--point takes two coordinates x,y".into()));
                    };
                    let [path] = a.inputs.as_slice() else {
                        return Err(Error::InvalidInput("hadamard --point needs exactly one polygon file".into()));
                    };
                    (read_polygon(path)?, Summand::Point(Vec2::new(px, py)))
                }
                None => {
                    let (b, s) = two_bodies(a)?;
                    (b, Summand::Body(s))
                }
            };
            let diam = body.diameter();
            let steps: Vec<f64> = a.steps.iter().map(|s| s * diam).collect();
            vec![hadamard_check(&body, &summand, &steps, &cfg)]
        }
        Suite::Bm => {
            let (x, y) = two_bodies(a)?;
            vec![bm_check(&x, &y, a.lambda, &cfg)]
        }
        Suite::Minkowski => {
            let (x, y) = two_bodies(a)?;
            vec![minkowski_ineq_check(&x, &y, &cfg)]
        }
        Suite::Uniqueness => {
            let [path] = a.inputs.as_slice() else {
                return Err(Error::InvalidInput("uniqueness needs exactly one measure file".into()));
            };
            let p = a.p.ok_or_else(|| Error::InvalidInput("uniqueness needs --p".into()))?;
            let m = read_measure(path)?;
            match uniqueness_probe(&m, p, a.k, &solve_config(p, &a.solver, cfg.mesh_h)?) {
                Ok(r) => vec![r],
                Err(e @ Error::MaxItersExceeded { .. }) => vec![CheckReport::error("uniqueness", &e)],
                Err(e) => return Err(e),
            }
        }
        Suite::Weak => {
            let limit = a.limit.as_ref().ok_or_else(|| Error::InvalidInput("weak needs --limit".into()))?;
            let limit = read_polygon(limit)?;
            let sequence = a.inputs.iter().map(|p| read_polygon(p)).collect::<Result<Vec<_>>>()?;
            let fns = [
                TestFunction::constant(1.0),
                TestFunction::coordinate(UnitVector::e1()),
                TestFunction::coordinate(UnitVector::e2()),
                TestFunction::cosine(2),
            ];
            weak_convergence_probe(&sequence, &limit, &fns, &cfg)
        }
    };
    write_json(a.common.out.as_deref(), &reports)?;
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_continuity(a: &ContinuityArgs) -> Result<i32> {
    let m = read_measure(&a.measure)?;
    let cfg = solve_config(a.p, &a.solver, a.common.mesh_h)?;
    let table: ConvergenceTable = match a.mode {
        Mode::Measure => {
            let mut perturbations = weight_perturbations(&m, a.atom, &a.eps)?;
            perturbations.extend(direction_jitter(&m, &a.jitter, cfg.seed)?);
            if perturbations.is_empty() {
                return Err(Error::InvalidInput("empty perturbation schedule (use --eps or --jitter)".into()));
            }
            continuity_in_measure(&m, &perturbations, a.p, &cfg)?
        }
        Mode::P => {
            if a.p_seq.is_empty() {
                return Err(Error::InvalidInput("empty exponent schedule (use --p-seq)".into()));
            }
            continuity_in_p(&m, &a.p_seq, a.p, &cfg)?
        }
    };
    write_text(a.common.out.as_deref(), &table.to_csv())?;
    if let Some(path) = &a.common.out {
        write_json(Some(&path.with_extension("json")), &table.summary())?;
    }
    Ok(if table.passed() { EXIT_OK } else { EXIT_NUMERICAL })
}
