//! Config-file driven front end.
//!
//! A run is described by a flat `key = value` file (`#` starts a comment).
//! Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `command` | `solve`, `converge`, `table` or `verify` | required |
//! | `s` | fractional order in (0, 1) | required except for `table` |
//! | `experiment` | `exp1`, `exp2`, `exp3`, `linear` or `custom` | `exp1` |
//! | `mesh` | `uniform` or `graded` | `uniform` |
//! | `elements` | element count, comma list for `converge` | `64` |
//! | `mu` | grading exponent | `(2 - s) / s` |
//! | `a`, `b` | interval, only for `custom` | `-1`, `1` |
//! | `f_file`, `psi_file` | nodal values, one per line, for `custom` | |
//! | `solver` | `policy`, `improved` or `perron` | `policy` |
//! | `alpha`, `theta` | scale exponent and contact factor | `0.5`, `0.25` |
//! | `detection` | `current` or `initial` operator for contact detection | `current` |
//! | `max_iter` | policy iteration limit | `5N + 5` |
//! | `perron_tol`, `max_sweeps` | Perron stopping rule | `1e-14`, `1000000` |
//! | `complementarity_tol` | acceptance of the final residual | `1e-9 (1 + max abs f)` |
//! | `dump_matrix` | also write `matrix.txt` | `false` |
//! | `trials` | random comparison trials of `verify` | `10` |
//! | `out` | output directory | `out` |
//! | `threads`, `seed` | worker threads, trial seed | all cores, `0` |
//!
//! `--out`, `--threads` and `--seed` override the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::harness::{
    experiment1_instance, experiment2_instance, experiment3_instance, inactive_obstacle_instance, iteration_study_cells,
    run_convergence, run_iteration_table, solve_instance, ConvergenceReport, ExperimentId, ExperimentSpec, IterationRow,
    MeshFamily, SolverChoice,
};
use crate::kernel::FractionalOrder;
use crate::mesh::{Mesh, NodeMetrics};
use crate::operator::{assemble_operator, DiscreteOperator, StructureReport};
use crate::solver::{
    check_complementarity, default_complementarity_tol, policy_iteration, ComplementarityCheck, ContactDetection,
    ObstacleInstance, SolverResult,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "frac-obstacle", version, about = "Obstacle problems for the 1D fractional Laplacian")]
pub struct Args {
    /// Run description (flat key = value file).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 gives a fully sequential run.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed of the random trials.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Converge,
    Table,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Uniform,
    Graded,
}

/// Validated run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub s: Option<f64>,
    pub experiment: ExperimentId,
    pub mesh: MeshKind,
    pub elements: Vec<usize>,
    pub mu: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub f_file: Option<PathBuf>,
    pub psi_file: Option<PathBuf>,
    pub solver: SolverChoice,
    pub alpha: f64,
    pub theta: f64,
    pub detection: ContactDetection,
    pub max_iter: Option<usize>,
    pub perron_tol: f64,
    pub max_sweeps: usize,
    pub complementarity_tol: Option<f64>,
    pub dump_matrix: bool,
    pub trials: usize,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "command",
    "s",
    "experiment",
    "mesh",
    "elements",
    "mu",
    "a",
    "b",
    "f_file",
    "psi_file",
    "solver",
    "alpha",
    "theta",
    "detection",
    "max_iter",
    "perron_tol",
    "max_sweeps",
    "complementarity_tol",
    "dump_matrix",
    "trials",
    "out",
    "threads",
    "seed",
];

fn field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|e| invalid(format!("{key}: cannot parse '{v}': {e}"))))
        .transpose()
}

impl RunConfig {
    /// Parse the text of a config file. Relative data paths are resolved
    /// against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(invalid(format!("{k}: unknown key (line {})", lineno + 1)));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(invalid(format!("{k}: given more than once")));
            }
        }
        let command = match map.get("command").map(String::as_str) {
            Some("solve") => Command::Solve,
            Some("converge") => Command::Converge,
            Some("table") => Command::Table,
            Some("verify") => Command::Verify,
            Some(v) => return Err(invalid(format!("command: unknown command '{v}'"))),
            None => return Err(invalid("command: missing")),
        };
        let mesh = match map.get("mesh").map(String::as_str) {
            None | Some("uniform") => MeshKind::Uniform,
            Some("graded") => MeshKind::Graded,
            Some(v) => return Err(invalid(format!("mesh: unknown mesh family '{v}'"))),
        };
        let detection = match map.get("detection").map(String::as_str) {
            None | Some("current") => ContactDetection::Current,
            Some("initial") => ContactDetection::Initial,
            Some(v) => return Err(invalid(format!("detection: unknown rule '{v}'"))),
        };
        let elements = match map.get("elements") {
            None => vec![64],
            Some(v) => v
                .split(',')
                .map(|e| e.trim().parse::<usize>().map_err(|err| invalid(format!("elements: cannot parse '{e}': {err}"))))
                .collect::<Result<Vec<_>>>()?,
        };
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        let cfg = RunConfig {
            command,
            s: field(&map, "s")?,
            experiment: field(&map, "experiment")?.unwrap_or(ExperimentId::Exp1),
            mesh,
            elements,
            mu: field(&map, "mu")?,
            a: field(&map, "a")?.unwrap_or(-1.0),
            b: field(&map, "b")?.unwrap_or(1.0),
            f_file: field::<PathBuf>(&map, "f_file")?.map(resolve),
            psi_file: field::<PathBuf>(&map, "psi_file")?.map(resolve),
            solver: field(&map, "solver")?.unwrap_or(SolverChoice::Policy),
            alpha: field(&map, "alpha")?.unwrap_or(0.5),
            theta: field(&map, "theta")?.unwrap_or(0.25),
            detection,
            max_iter: field(&map, "max_iter")?,
            perron_tol: field(&map, "perron_tol")?.unwrap_or(1e-14),
            max_sweeps: field(&map, "max_sweeps")?.unwrap_or(1_000_000),
            complementarity_tol: field(&map, "complementarity_tol")?,
            dump_matrix: field(&map, "dump_matrix")?.unwrap_or(false),
            trials: field(&map, "trials")?.unwrap_or(10),
            out: field(&map, "out")?.unwrap_or_else(|| PathBuf::from("out")),
            threads: field(&map, "threads")?,
            seed: field(&map, "seed")?.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.s {
            Some(s) => {
                FractionalOrder::new(s).map_err(|e| invalid(format!("s: {e}")))?;
            }
            None if self.command != Command::Table => return Err(invalid("s: missing")),
            None => {}
        }
        if self.elements.is_empty() {
            return Err(invalid("elements: empty list"));
        }
        if self.command != Command::Converge && self.command != Command::Table && self.elements.len() != 1 {
            return Err(invalid("elements: a single element count is expected for this command"));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 1.0) {
                return Err(invalid(format!("mu: {mu} is below 1")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha: {} is outside (0, 1]", self.alpha)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(invalid(format!("theta: {} is outside (0, 1)", self.theta)));
        }
        if !(self.perron_tol > 0.0) {
            return Err(invalid("perron_tol: must be positive"));
        }
        if let Some(t) = self.complementarity_tol {
            if !(t > 0.0) {
                return Err(invalid("complementarity_tol: must be positive"));
            }
        }
        if self.max_iter == Some(0) {
            return Err(invalid("max_iter: must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads: must be at least 1"));
        }
        if !(self.a < self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(invalid(format!("a, b: need a < b (got {}, {})", self.a, self.b)));
        }
        let reference = self.a == -1.0 && self.b == 1.0;
        if self.experiment == ExperimentId::Custom {
            if self.f_file.is_none() {
                return Err(invalid("f_file: required for the custom experiment"));
            }
            if self.psi_file.is_none() {
                return Err(invalid("psi_file: required for the custom experiment"));
            }
        } else if !reference {
            return Err(invalid("a, b: the reference experiments are posed on (-1, 1)"));
        }
        if self.command == Command::Converge && !matches!(self.experiment, ExperimentId::Exp1 | ExperimentId::Linear) {
            return Err(invalid("experiment: converge needs an exact solution (exp1 or linear)"));
        }
        Ok(())
    }

    fn family(&self) -> MeshFamily {
        match self.mesh {
            MeshKind::Uniform => MeshFamily::Uniform,
            MeshKind::Graded => MeshFamily::Graded { mu: self.mu },
        }
    }

    fn spec(&self, s: f64) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(self.experiment, s, self.family(), self.elements.clone());
        spec.solver = self.solver;
        spec.alpha = self.alpha;
        spec.theta = self.theta;
        spec.detection = self.detection;
        spec.perron_tol = self.perron_tol;
        spec.max_sweeps = self.max_sweeps;
        spec.max_iter = self.max_iter;
        spec
    }

    fn s(&self) -> f64 {
        self.s.expect("validated")
    }
}

/// Float with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    f.write_all(contents.as_bytes()).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Columns `x, u, psi, contact, residual_pde, residual_obstacle`.
pub fn write_solution_csv(path: &Path, op: &DiscreteOperator, inst: &ObstacleInstance, result: &SolverResult) -> Result<()> {
    let lu = op.apply(&result.u);
    let mut contact = vec![false; result.u.len()];
    for &k in &result.contact {
        contact[k] = true;
    }
    let mut out = String::from("x,u,psi,contact,residual_pde,residual_obstacle\n");
    for (k, &x) in op.mesh().interior().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(x),
            num(result.u[k]),
            num(inst.psi[k]),
            u8::from(contact[k]),
            num(lu[k] - inst.f[k]),
            num(result.u[k] - inst.psi[k])
        );
    }
    write_file(path, &out)
}

/// Columns `iter, contact_size, max_update, worst_complementarity`.
pub fn write_trace_csv(path: &Path, result: &SolverResult) -> Result<()> {
    let mut out = String::from("iter,contact_size,max_update,worst_complementarity\n");
    for r in &result.trace {
        let _ = writeln!(out, "{},{},{},{}", r.iter, r.contact_size, num(r.max_update), num(r.residual));
    }
    write_file(path, &out)
}

pub fn write_report_json<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::NumericalFailure(format!("report serialization: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}

fn write_convergence_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut out = String::from("elements,interior,h,error,iterations\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.elements, r.interior, num(r.h), num(r.error), r.iterations);
    }
    write_file(path, &out)
}

fn write_iterations_csv(path: &Path, rows: &[IterationRow]) -> Result<()> {
    let mut out = String::from("s,target,elements,interior,iterations,set_updates\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", num(r.s), r.target, r.elements, r.interior, r.iterations, r.set_updates);
    }
    write_file(path, &out)
}

fn read_nodal_file(path: &Path, key: &str, expected: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{key}: cannot read {}: {e}", path.display())))?;
    let values = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<f64>().map_err(|e| invalid(format!("{key}: cannot parse '{l}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(invalid(format!("{key}: {} values for {expected} interior nodes", values.len())));
    }
    Ok(values)
}

fn build_mesh(cfg: &RunConfig, elements: usize) -> Result<Mesh> {
    cfg.family().build(cfg.a, cfg.b, elements, cfg.s()).map_err(|e| invalid(format!("elements: {e}")))
}

fn build_instance(cfg: &RunConfig, mesh: &Mesh) -> Result<ObstacleInstance> {
    let s = cfg.s();
    match cfg.experiment {
        ExperimentId::Exp1 => Ok(experiment1_instance(mesh, s)?.instance),
        ExperimentId::Linear => Ok(inactive_obstacle_instance(mesh, s)?.instance),
        ExperimentId::Exp2 => experiment2_instance(mesh),
        ExperimentId::Exp3 => experiment3_instance(mesh),
        ExperimentId::Custom => {
            let n = mesh.interior_count();
            let f = read_nodal_file(cfg.f_file.as_deref().expect("validated"), "f_file", n)?;
            let psi = read_nodal_file(cfg.psi_file.as_deref().expect("validated"), "psi_file", n)?;
            ObstacleInstance::new(f, psi)
        }
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    config: &'a RunConfig,
    interior: usize,
    iterations: usize,
    set_updates: usize,
    converged: bool,
    contact_size: usize,
    complementarity: ComplementarityCheck,
}

#[derive(Serialize)]
struct ConvergeReportJson<'a> {
    config: &'a RunConfig,
    rows: &'a [crate::harness::ConvergenceRow],
    rate: f64,
    pairwise: &'a [f64],
}

#[derive(Serialize)]
struct TableReport<'a> {
    config: &'a RunConfig,
    rows: &'a [IterationRow],
}

#[derive(Debug, Serialize)]
struct TrialOutcome {
    trial: usize,
    pass: bool,
    worst_violation: f64,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a RunConfig,
    structure: StructureReport,
    /// Smallest entry of `L 1`; positive means `1` is a barrier.
    min_row_sum: f64,
    trials: Vec<TrialOutcome>,
    pass: bool,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerifyFailed,
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome> {
    let mesh = build_mesh(cfg, cfg.elements[0])?;
    let inst = build_instance(cfg, &mesh)?;
    let mut spec = cfg.spec(cfg.s());
    spec.elements = vec![mesh.element_count()];
    let solved = solve_instance(&mesh, &inst, &spec)?;
    let tol = cfg.complementarity_tol.unwrap_or_else(|| default_complementarity_tol(&inst));
    let check = check_complementarity(&solved.operator, &inst, &solved.result.u, tol)?;
    fs::create_dir_all(&cfg.out).map_err(|source| Error::Io { path: cfg.out.display().to_string(), source })?;
    write_solution_csv(&cfg.out.join("solution.csv"), &solved.operator, &inst, &solved.result)?;
    write_trace_csv(&cfg.out.join("trace.csv"), &solved.result)?;
    if cfg.dump_matrix {
        let path = cfg.out.join("matrix.txt");
        let file = fs::File::create(&path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        solved
            .operator
            .write_matrix(std::io::BufWriter::new(file))
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }
    write_report_json(
        &cfg.out.join("report.json"),
        &SolveReport {
            config: cfg,
            interior: mesh.interior_count(),
            iterations: solved.result.iterations,
            set_updates: solved.result.set_updates,
            converged: solved.result.converged,
            contact_size: solved.result.contact.len(),
            complementarity: check,
        },
    )?;
    if !solved.result.converged {
        return Err(Error::NonConvergence {
            iterations: solved.result.iterations,
            reason: "iteration limit reached".into(),
        });
    }
    Ok(Outcome::Success)
}

fn run_converge(cfg: &RunConfig) -> Result<Outcome> {
    let report = run_convergence(&cfg.spec(cfg.s()))?;
    fs::create_dir_all(&cfg.out).map_err(|source| Error::Io { path: cfg.out.display().to_string(), source })?;
    write_convergence_csv(&cfg.out.join("convergence.csv"), &report)?;
    write_report_json(
        &cfg.out.join("report.json"),
        &ConvergeReportJson { config: cfg, rows: &report.rows, rate: report.rate, pairwise: &report.pairwise },
    )?;
    Ok(Outcome::Success)
}

fn run_table(cfg: &RunConfig) -> Result<Outcome> {
    // with `s` given, the study is restricted to that order
    let cells: Vec<(f64, usize)> = iteration_study_cells().into_iter().filter(|(s, _)| cfg.s.is_none_or(|v| v == *s)).collect();
    if cells.is_empty() {
        return Err(invalid("s: the iteration study covers s = 0.3, 0.6 and 0.9"));
    }
    let rows = run_iteration_table(&cells, cfg.alpha, cfg.theta)?;
    fs::create_dir_all(&cfg.out).map_err(|source| Error::Io { path: cfg.out.display().to_string(), source })?;
    write_iterations_csv(&cfg.out.join("iterations.csv"), &rows)?;
    write_report_json(&cfg.out.join("report.json"), &TableReport { config: cfg, rows: &rows })?;
    Ok(Outcome::Success)
}

/// Structure of the operator plus seeded comparison trials: raising `f`
/// and `psi` by positive constants must not lower any solution value.
fn run_verify(cfg: &RunConfig) -> Result<Outcome> {
    let mesh = build_mesh(cfg, cfg.elements[0])?;
    let op = assemble_operator(&mesh, FractionalOrder::new(cfg.s())?, NodeMetrics::new(&mesh, cfg.alpha, None)?)?;
    let structure = op.structure();
    let min_row_sum = op.apply(&vec![1.0; op.size()]).into_iter().fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = op.size();
    let mut trials = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let peak = rng.random_range(cfg.a..cfg.b);
        let height = rng.random_range(-0.5..1.5);
        let slope = rng.random_range(0.5..6.0);
        let psi: Vec<f64> = mesh.interior().iter().map(|&x| height - slope * (x - peak).abs()).collect();
        let (df, dpsi) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let base = ObstacleInstance::new(f.clone(), psi.clone())?;
        let raised = ObstacleInstance::new(f.iter().map(|v| v + df).collect(), psi.iter().map(|v| v + dpsi).collect())?;
        let u0 = policy_iteration(&op, &base, 5 * n + 5)?.into_converged()?.u;
        let u1 = policy_iteration(&op, &raised, 5 * n + 5)?.into_converged()?.u;
        let worst = u0.iter().zip(&u1).map(|(a, b)| a - b).fold(0.0, f64::max);
        let tol = 1e-10 * (1.0 + u0.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        trials.push(TrialOutcome { trial, pass: worst <= tol, worst_violation: worst });
    }
    let pass = structure.pass && min_row_sum > 0.0 && trials.iter().all(|t| t.pass);
    fs::create_dir_all(&cfg.out).map_err(|source| Error::Io { path: cfg.out.display().to_string(), source })?;
    write_report_json(&cfg.out.join("report.json"), &VerifyReport { config: cfg, structure, min_row_sum, trials, pass })?;
    Ok(if pass { Outcome::Success } else { Outcome::VerifyFailed })
}

/// Run a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let work = || match cfg.command {
        Command::Solve => run_solve(cfg),
        Command::Converge => run_converge(cfg),
        Command::Table => run_table(cfg),
        Command::Verify => run_verify(cfg),
    };
    match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| invalid(format!("threads: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::VerifyFailed) => EXIT_VERIFY_FAILED,
        Err(Error::NonConvergence { .. } | Error::NumericalFailure(_)) => EXIT_NONCONVERGENCE,
        Err(_) => EXIT_INVALID,
    }
}

/// Load the config named by `args`, apply flag overrides and run it.
pub fn main_with(args: Args) -> ExitCode {
    let cfg = fs::read_to_string(&args.config)
        .map_err(|e| invalid(format!("config: cannot read {}: {e}", args.config.display())))
        .and_then(|text| {
            let base = args.config.parent().unwrap_or(Path::new("."));
            let mut cfg = RunConfig::parse(&text, base)?;
            if let Some(out) = args.out {
                cfg.out = out;
            }
            if let Some(t) = args.threads {
                cfg.threads = Some(t);
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            cfg.validate()?;
            Ok(cfg)
        });
    let result = cfg.and_then(|cfg| run(&cfg));
    match &result {
        Ok(Outcome::Success) => {}
        Ok(Outcome::VerifyFailed) => eprintln!("verification failed; see report.json"),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result))
}
