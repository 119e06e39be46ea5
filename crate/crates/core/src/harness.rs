//! Reference problems on `(-1, 1)` and the refinement studies built on them.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::kernel::FractionalOrder;
use crate::mesh::{Mesh, MeshPoint, NodeMetrics};
use crate::operator::{assemble_operator, DiscreteOperator};
use crate::solver::{
    improved_policy_iteration_with, perron_solve, policy_iteration, ContactDetection, ImprovedParams, ObstacleInstance,
    SolverResult,
};

/// Scale making `(1 - x^2)_+^s` solve `(-Delta)^s u = 1` on `(-1, 1)`.
pub fn getoor_prefactor(s: f64) -> Result<f64> {
    FractionalOrder::new(s)?;
    Ok(2f64.powf(-2.0 * s) * gamma(0.5) / (gamma(0.5 + s) * gamma(1.0 + s)))
}

/// Exact solution of the unconstrained problem with unit forcing on `(-1, 1)`.
pub fn getoor_solution(x: f64, s: f64) -> Result<f64> {
    let c = getoor_prefactor(s)?;
    let q = (1.0 - x) * (1.0 + x);
    Ok(if q > 0.0 { c * q.powf(s) } else { 0.0 })
}

/// Same as [`getoor_solution`] from the distances to `-1` and `1`, which
/// stays accurate next to the endpoints.
pub fn getoor_from_distances(from_left: f64, from_right: f64, s: f64) -> Result<f64> {
    let c = getoor_prefactor(s)?;
    let q = from_left * from_right;
    Ok(if from_left > 0.0 && from_right > 0.0 { c * q.powf(s) } else { 0.0 })
}

fn check_reference_domain(mesh: &Mesh) -> Result<()> {
    if mesh.a() != -1.0 || mesh.b() != 1.0 {
        return Err(invalid(format!(
            "reference problems live on (-1, 1) (mesh spans [{}, {}])",
            mesh.a(),
            mesh.b()
        )));
    }
    Ok(())
}

fn sample(mesh: &Mesh, f: impl Fn(&MeshPoint) -> f64) -> Vec<f64> {
    mesh.interior_points().map(|p| f(&p)).collect()
}

/// Instance together with the exact nodal solution.
#[derive(Debug, Clone)]
pub struct ExactInstance {
    pub instance: ObstacleInstance,
    pub exact: Vec<f64>,
}

/// Obstacle problem whose solution is the Getoor profile, touching the
/// obstacle exactly on `|x| <= 1/2`.
pub fn experiment1_instance(mesh: &Mesh, s: f64) -> Result<ExactInstance> {
    check_reference_domain(mesh)?;
    let exact = sample_getoor(mesh, s)?;
    let f = sample(mesh, |p| 1.0 - 5.0 * (0.5 - p.x.abs()).max(0.0));
    let psi = mesh
        .interior_points()
        .zip(&exact)
        .map(|(p, u)| u - 0.5 * (p.x * p.x - 0.25).max(0.0))
        .collect();
    Ok(ExactInstance { instance: ObstacleInstance::new(f, psi)?, exact })
}

/// Unit forcing with an obstacle far below the solution, so the exact
/// solution is the Getoor profile.
pub fn inactive_obstacle_instance(mesh: &Mesh, s: f64) -> Result<ExactInstance> {
    check_reference_domain(mesh)?;
    let exact = sample_getoor(mesh, s)?;
    let n = mesh.interior_count();
    Ok(ExactInstance { instance: ObstacleInstance::new(vec![1.0; n], vec![-10.0; n])?, exact })
}

fn sample_getoor(mesh: &Mesh, s: f64) -> Result<Vec<f64>> {
    let c = getoor_prefactor(s)?;
    Ok(sample(mesh, |p| c * (p.from_a * p.from_b).powf(s)))
}

/// No forcing, tent obstacle peaking at `x = 1/4`.
pub fn experiment2_instance(mesh: &Mesh) -> Result<ObstacleInstance> {
    check_reference_domain(mesh)?;
    ObstacleInstance::new(
        vec![0.0; mesh.interior_count()],
        sample(mesh, |p| 1.0 - 4.0 * (p.x - 0.25).abs()),
    )
}

/// Unit forcing, tent obstacle of height 3 at `x = 1/4`.
pub fn experiment3_instance(mesh: &Mesh) -> Result<ObstacleInstance> {
    check_reference_domain(mesh)?;
    ObstacleInstance::new(
        vec![1.0; mesh.interior_count()],
        sample(mesh, |p| 3.0 - 6.0 * (p.x - 0.25).abs()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    /// Unit forcing with an inactive obstacle.
    Linear,
    /// Nodal data supplied by the caller.
    Custom,
}

impl std::str::FromStr for ExperimentId {
    type Err = String;

    fn from_str(v: &str) -> std::result::Result<Self, String> {
        Ok(match v {
            "exp1" => Self::Exp1,
            "exp2" => Self::Exp2,
            "exp3" => Self::Exp3,
            "linear" => Self::Linear,
            "custom" => Self::Custom,
            _ => return Err(format!("unknown experiment '{v}' (expected exp1, exp2, exp3, linear or custom)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MeshFamily {
    Uniform,
    /// `mu = None` picks `(2 - s) / s`.
    Graded { mu: Option<f64> },
}

impl MeshFamily {
    pub fn build(&self, a: f64, b: f64, elements: usize, s: f64) -> Result<Mesh> {
        match *self {
            MeshFamily::Uniform => Mesh::uniform(a, b, elements),
            MeshFamily::Graded { mu } => Mesh::graded(a, b, elements, mu.unwrap_or_else(|| optimal_grading(s))),
        }
    }
}

/// Grading exponent `(2 - s) / s` that balances the boundary layer.
pub fn optimal_grading(s: f64) -> f64 {
    (2.0 - s) / s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Policy,
    Improved,
    Perron,
}

impl std::str::FromStr for SolverChoice {
    type Err = String;

    fn from_str(v: &str) -> std::result::Result<Self, String> {
        Ok(match v {
            "policy" => Self::Policy,
            "improved" => Self::Improved,
            "perron" => Self::Perron,
            _ => return Err(format!("unknown solver '{v}' (expected policy, improved or perron)")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentId,
    pub s: f64,
    pub mesh: MeshFamily,
    pub elements: Vec<usize>,
    pub solver: SolverChoice,
    pub alpha: f64,
    pub theta: f64,
    pub detection: ContactDetection,
    /// Policy iteration limit; `None` means `5N + 5`.
    pub max_iter: Option<usize>,
    /// Largest Gauss-Seidel update accepted by the Perron solver.
    pub perron_tol: f64,
    pub max_sweeps: usize,
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentId, s: f64, mesh: MeshFamily, elements: Vec<usize>) -> Self {
        Self {
            experiment,
            s,
            mesh,
            elements,
            solver: SolverChoice::Policy,
            alpha: 0.5,
            theta: 0.25,
            detection: ContactDetection::Current,
            max_iter: None,
            perron_tol: 1e-14,
            max_sweeps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        FractionalOrder::new(self.s)?;
        if self.elements.is_empty() {
            return Err(invalid("elements: at least one element count is needed"));
        }
        for &m in &self.elements {
            let graded = matches!(self.mesh, MeshFamily::Graded { .. });
            if m < 4 || (graded && m % 2 != 0) {
                return Err(invalid(format!("elements: {m} is not allowed (need >= 4, even for graded meshes)")));
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
        Ok(())
    }
}

/// Outcome of one solve: the result and the operator it satisfies.
#[derive(Debug, Clone)]
pub struct Solved {
    pub result: SolverResult,
    pub operator: DiscreteOperator,
}

/// Assemble on `mesh` and run the chosen solver.
pub fn solve_instance(mesh: &Mesh, inst: &ObstacleInstance, spec: &ExperimentSpec) -> Result<Solved> {
    let order = FractionalOrder::new(spec.s)?;
    let op = assemble_operator(mesh, order, NodeMetrics::new(mesh, spec.alpha, None)?)?;
    let max_iter = spec.max_iter.unwrap_or(5 * inst.len() + 5);
    Ok(match spec.solver {
        SolverChoice::Policy => Solved { result: policy_iteration(&op, inst, max_iter)?, operator: op },
        SolverChoice::Perron => Solved { result: perron_solve(&op, inst, spec.perron_tol, spec.max_sweeps)?, operator: op },
        SolverChoice::Improved => {
            let params = ImprovedParams { alpha: spec.alpha, theta: spec.theta, max_iter, detection: spec.detection };
            let r = improved_policy_iteration_with(&op, inst, params)?;
            Solved { result: r.result, operator: r.operator }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub elements: usize,
    pub interior: usize,
    pub h: f64,
    pub error: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log h`.
    pub rate: f64,
    /// `log2(e_k / e_{k+1})` for consecutive rows.
    pub pairwise: Vec<f64>,
}

/// Solve on every requested mesh and measure the nodal max error.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    if !matches!(spec.experiment, ExperimentId::Exp1 | ExperimentId::Linear) {
        return Err(invalid("experiment: a convergence study needs an exact solution (exp1 or linear)"));
    }
    let mut elements = spec.elements.clone();
    elements.sort_unstable();
    elements.dedup();
    let mut rows = elements
        .par_iter()
        .map(|&m| {
            let mesh = spec.mesh.build(-1.0, 1.0, m, spec.s)?;
            let ex = match spec.experiment {
                ExperimentId::Exp1 => experiment1_instance(&mesh, spec.s)?,
                _ => inactive_obstacle_instance(&mesh, spec.s)?,
            };
            let solved = solve_instance(&mesh, &ex.instance, spec)?;
            let result = solved.result.into_converged()?;
            let error = result.u.iter().zip(&ex.exact).map(|(u, e)| (u - e).abs()).fold(0.0, f64::max);
            Ok(ConvergenceRow { elements: m, interior: mesh.interior_count(), h: 2.0 / m as f64, error, iterations: result.iterations })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| y.h.total_cmp(&x.h));
    let (rate, pairwise) = if rows.len() >= 2 {
        let fit = estimate_rate(&rows.iter().map(|r| r.error).collect::<Vec<_>>(), &rows.iter().map(|r| r.h).collect::<Vec<_>>())?;
        (fit.rate, fit.pairwise)
    } else {
        (f64::NAN, Vec::new())
    };
    Ok(ConvergenceReport { rows, rate, pairwise })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub pairwise: Vec<f64>,
}

/// Fit `error ~ C h^rate` by least squares in log-log scale.
pub fn estimate_rate(errors: &[f64], hs: &[f64]) -> Result<RateFit> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(invalid(format!(
            "need at least two (error, h) pairs of equal length (got {} and {})",
            errors.len(),
            hs.len()
        )));
    }
    if let Some(v) = errors.iter().chain(hs).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(invalid(format!("errors and mesh sizes must be positive (got {v})")));
    }
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("mesh sizes must not all coincide"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let pairwise = errors.windows(2).zip(hs.windows(2)).map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect();
    Ok(RateFit { rate: sxy / sxx, pairwise })
}

/// Resolutions of the iteration-count study, as interior node counts per order.
pub const ITERATION_STUDY: [(f64, [usize; 4]); 3] =
    [(0.3, [126, 254, 510, 1022]), (0.6, [118, 237, 476, 953]), (0.9, [77, 155, 311, 623])];

/// Even element count whose interior node count is closest to `target`.
pub fn graded_elements_for(target: usize) -> usize {
    let m = target + 1;
    if m.is_multiple_of(2) {
        m.max(4)
    } else {
        (m + 1).max(4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub s: f64,
    pub target: usize,
    pub elements: usize,
    pub interior: usize,
    pub iterations: usize,
    pub set_updates: usize,
}

/// Improved policy iteration on the unit-forcing tent problem over graded meshes.
pub fn run_iteration_table(cells: &[(f64, usize)], alpha: f64, theta: f64) -> Result<Vec<IterationRow>> {
    cells
        .par_iter()
        .map(|&(s, target)| {
            let elements = graded_elements_for(target);
            let mut spec = ExperimentSpec::new(ExperimentId::Exp3, s, MeshFamily::Graded { mu: None }, vec![elements]);
            spec.solver = SolverChoice::Improved;
            spec.alpha = alpha;
            spec.theta = theta;
            spec.validate()?;
            let mesh = spec.mesh.build(-1.0, 1.0, elements, s)?;
            let inst = experiment3_instance(&mesh)?;
            let r = solve_instance(&mesh, &inst, &spec)?.result.into_converged()?;
            Ok(IterationRow { s, target, elements, interior: mesh.interior_count(), iterations: r.iterations, set_updates: r.set_updates })
        })
        .collect()
}

/// All twelve cells of [`ITERATION_STUDY`].
pub fn iteration_study_cells() -> Vec<(f64, usize)> {
    ITERATION_STUDY.iter().flat_map(|(s, ns)| ns.iter().map(move |&n| (*s, n))).collect()
}

#[cfg(test)]
#[allow(clippy::excessive_precision, clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn getoor_values() {
        assert!((getoor_solution(0.0, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((getoor_solution(0.6, 0.5).unwrap() - 0.8).abs() < 1e-14);
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(getoor_solution(1.0, s).unwrap(), 0.0);
            assert_eq!(getoor_solution(-1.0, s).unwrap(), 0.0);
            assert_eq!(getoor_solution(3.0, s).unwrap(), 0.0);
        }
        assert!(getoor_solution(0.0, 1.0).is_err());
        let x: f64 = 0.3;
        let d = getoor_from_distances(1.0 + x, 1.0 - x, 0.7).unwrap();
        assert!((d - getoor_solution(x, 0.7).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn getoor_prefactor_reference_values() {
        for (s, v) in [
            (0.3, 1.11917495407012226364146285281),
            (0.6, 0.907603684215280256525499800791),
            (0.9, 0.596484041128241293300427064554),
            (0.25, 1.12837916709551257389615890312),
        ] {
            assert!((getoor_prefactor(s).unwrap() - v).abs() < 1e-13 * v, "s = {s}");
        }
    }

    #[test]
    fn experiment1_data() {
        let mesh = Mesh::uniform(-1.0, 1.0, 8).unwrap();
        let ex = experiment1_instance(&mesh, 0.5).unwrap();
        // interior nodes -0.75, ..., 0.75; x = 0 sits at index 3
        assert!((ex.instance.f[3] + 1.5).abs() < 1e-15);
        assert!((ex.instance.f[6] - 1.0).abs() < 1e-15);
        for (k, &x) in mesh.interior().iter().enumerate() {
            if x.abs() <= 0.5 {
                assert_eq!(ex.instance.psi[k], ex.exact[k]);
            } else {
                assert!(ex.instance.psi[k] < ex.exact[k]);
            }
        }
        assert!(experiment1_instance(&Mesh::uniform(0.0, 1.0, 8).unwrap(), 0.5).is_err());
    }

    #[test]
    fn experiment2_and_3_data() {
        let mesh = Mesh::uniform(-1.0, 1.0, 8).unwrap();
        let e2 = experiment2_instance(&mesh).unwrap();
        let e3 = experiment3_instance(&mesh).unwrap();
        // x = 0 at index 3, x = 0.25 at index 4
        assert!(e2.psi[3].abs() < 1e-15);
        assert!((e2.psi[4] - 1.0).abs() < 1e-15);
        assert!((e3.psi[4] - 3.0).abs() < 1e-15);
        assert!(e2.f.iter().all(|&v| v == 0.0));
        assert!(e3.f.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rate_fit_examples() {
        assert!((estimate_rate(&[1e-2, 5e-3], &[0.1, 0.05]).unwrap().rate - 1.0).abs() < 1e-12);
        assert!((estimate_rate(&[1e-2, 2.5e-3], &[0.1, 0.05]).unwrap().rate - 2.0).abs() < 1e-12);
        let flat = estimate_rate(&[3e-3; 4], &[0.1, 0.05, 0.025, 0.0125]).unwrap();
        assert!(flat.rate.abs() < 1e-12);
        assert!(flat.pairwise.iter().all(|r| r.abs() < 1e-12));
        assert!(estimate_rate(&[1e-2, 0.0], &[0.1, 0.05]).is_err());
        assert!(estimate_rate(&[1e-2], &[0.1]).is_err());
        assert!(estimate_rate(&[1e-2, 1e-3], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn graded_sizes_within_five_percent() {
        for (_, ns) in ITERATION_STUDY {
            for n in ns {
                let m = graded_elements_for(n);
                assert_eq!(m % 2, 0);
                assert!(((m - 1) as f64 - n as f64).abs() <= 0.05 * n as f64);
            }
        }
    }

    #[test]
    fn convergence_rejects_unknown_exact_solution() {
        let spec = ExperimentSpec::new(ExperimentId::Exp2, 0.5, MeshFamily::Uniform, vec![8, 16]);
        assert!(run_convergence(&spec).is_err());
        let spec = ExperimentSpec::new(ExperimentId::Exp1, 0.5, MeshFamily::Graded { mu: None }, vec![9]);
        assert!(run_convergence(&spec).is_err());
    }

    #[test]
    fn small_convergence_study_decreases() {
        let spec = ExperimentSpec::new(ExperimentId::Exp1, 0.5, MeshFamily::Uniform, vec![16, 32, 64]);
        let rep = run_convergence(&spec).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.rows.windows(2).all(|w| w[1].error < w[0].error), "{rep:?}");
        assert!(rep.rate > 0.0);
    }

    #[test]
    fn experiment1_contact_stays_near_the_half_ball() {
        for s in [0.3, 0.6, 0.9] {
            let mesh = Mesh::uniform(-1.0, 1.0, 128).unwrap();
            let ex = experiment1_instance(&mesh, s).unwrap();
            let mut spec = ExperimentSpec::new(ExperimentId::Exp1, s, MeshFamily::Uniform, vec![128]);
            spec.solver = SolverChoice::Improved;
            let r = solve_instance(&mesh, &ex.instance, &spec).unwrap().result;
            assert!(!r.contact.is_empty());
            let h = 2.0 / 128.0;
            assert!(r.contact.iter().all(|&k| mesh.interior()[k].abs() <= 0.5 + h + 1e-12), "s = {s}");
        }
    }

    #[test]
    fn experiment2_contact_shrinks_as_order_grows() {
        let mesh = Mesh::uniform(-1.0, 1.0, 128).unwrap();
        let inst = experiment2_instance(&mesh).unwrap();
        let sizes: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&s| {
                let spec = ExperimentSpec::new(ExperimentId::Exp2, s, MeshFamily::Uniform, vec![128]);
                solve_instance(&mesh, &inst, &spec).unwrap().result.contact.len()
            })
            .collect();
        assert!(sizes[0] > 0);
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "{sizes:?}");
    }
}
