//! Solvers for the discrete obstacle problem
//!
//! ```text
//!   G(u)_i = min((L u)_i - f_i, u_i - psi_i) = 0   for every interior node i
//! ```
//!
//! * [`policy_iteration`]: Howard's algorithm. Starting from `u = psi`, the
//!   contact set shrinks monotonically and the iterates increase, so it stops
//!   after at most `N` set updates.
//! * [`improved_policy_iteration`]: every linear solve uses an operator whose
//!   singular radii are shrunk away from the current contact set.
//! * [`perron_solve`]: monotone nodal decrease from a supersolution. Slow but
//!   independent of any linear solver; used as a cross-check.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernel::FractionalOrder;
use crate::mesh::{Mesh, NodeMetrics};
use crate::operator::{assemble_operator, improved_scales, DiscreteOperator};

/// Nodal forcing and obstacle samples at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleInstance {
    pub f: Vec<f64>,
    pub psi: Vec<f64>,
}

impl ObstacleInstance {
    pub fn new(f: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if f.len() != psi.len() {
            return Err(invalid(format!(
                "forcing has {} samples but the obstacle has {}",
                f.len(),
                psi.len()
            )));
        }
        if f.is_empty() {
            return Err(invalid("an instance needs at least one interior node"));
        }
        if let Some(k) = f.iter().chain(&psi).position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite sample at position {k}")));
        }
        Ok(Self { f, psi })
    }

    /// Sample `f` and `psi` at the interior nodes of `mesh`.
    pub fn sample(mesh: &Mesh, f: impl Fn(f64) -> f64, psi: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = mesh.interior();
        Self::new(xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| psi(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    fn check(&self, op: &DiscreteOperator) -> Result<()> {
        if self.len() != op.size() {
            return Err(invalid(format!(
                "instance has {} nodes but the operator has {}",
                self.len(),
                op.size()
            )));
        }
        Ok(())
    }
}

/// One entry of a solver trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub contact_size: usize,
    /// `max_i |u_i^(k+1) - u_i^(k)|`.
    pub max_update: f64,
    /// `min_i (u_i^(k+1) - u_i^(k))`; nonnegative for an increasing sequence.
    pub min_increment: f64,
    /// Nodes in the new contact set that were not in the previous one.
    pub entered_contact: usize,
    /// `max_i |G(u^(k+1))_i|` against the operator used in that iteration.
    pub residual: f64,
    /// Singular radii used in this iteration (improved variant only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub u: Vec<f64>,
    /// Final contact set as sorted interior indices.
    pub contact: Vec<usize>,
    pub trace: Vec<IterationRecord>,
    /// Loop passes (policy variants) or sweeps (Perron).
    pub iterations: usize,
    /// Number of passes in which the contact set changed.
    pub set_updates: usize,
    pub converged: bool,
}

impl SolverResult {
    /// Turn a non-converged result into an error carrying the iteration count.
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                reason: "iteration limit reached before the contact set stabilized".into(),
            })
        }
    }
}

/// `r_i = min((L u)_i - f_i, u_i - psi_i)`.
pub fn evaluate_gh(op: &DiscreteOperator, inst: &ObstacleInstance, u: &[f64]) -> Result<Vec<f64>> {
    inst.check(op)?;
    if u.len() != op.size() {
        return Err(invalid(format!("u has {} entries, expected {}", u.len(), op.size())));
    }
    Ok(gh(op, inst, u))
}

fn gh(op: &DiscreteOperator, inst: &ObstacleInstance, u: &[f64]) -> Vec<f64> {
    op.apply(u)
        .iter()
        .zip(u)
        .zip(inst.f.iter().zip(&inst.psi))
        .map(|((lu, ui), (fi, pi))| (lu - fi).min(ui - pi))
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x - y).fold(f64::INFINITY, f64::min)
}

fn entered(before: &[bool], after: &[bool]) -> usize {
    before.iter().zip(after).filter(|(b, a)| **a && !**b).count()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn mask_to_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(k, &c)| c.then_some(k)).collect()
}

/// Fix `u = psi` on `contact` and solve `L_FF u_F = f_F - L_FC psi_C` on the rest.
pub fn solve_reduced_system(op: &DiscreteOperator, inst: &ObstacleInstance, contact: &[usize]) -> Result<Vec<f64>> {
    inst.check(op)?;
    let n = op.size();
    let mut mask = vec![false; n];
    for &k in contact {
        if k >= n {
            return Err(invalid(format!("contact index {k} out of range (N = {n})")));
        }
        mask[k] = true;
    }
    solve_masked(op, inst, &mask)
}

fn solve_masked(op: &DiscreteOperator, inst: &ObstacleInstance, contact: &[bool]) -> Result<Vec<f64>> {
    let l = op.matrix();
    let mut u: Vec<f64> = contact
        .iter()
        .zip(&inst.psi)
        .map(|(&c, &p)| if c { p } else { 0.0 })
        .collect();
    let free: Vec<usize> = contact.iter().enumerate().filter_map(|(k, &c)| (!c).then_some(k)).collect();
    if free.is_empty() {
        return Ok(u);
    }
    let fixed: Vec<usize> = mask_to_indices(contact);
    let nf = free.len();
    // rows scaled by their diagonal: graded meshes give diagonals spanning many decades
    let scale: Vec<f64> = free.iter().map(|&i| 1.0 / l[(i, i)]).collect();
    let reduced = DMatrix::from_fn(nf, nf, |i, j| l[(free[i], free[j])] * scale[i]);
    let rhs = DVector::from_iterator(
        nf,
        free.iter()
            .zip(&scale)
            .map(|(&i, d)| (inst.f[i] - fixed.iter().map(|&j| l[(i, j)] * inst.psi[j]).sum::<f64>()) * d),
    );
    let lu = reduced.clone().lu();
    let singular = || Error::NumericalFailure("reduced system is singular".into());
    let mut sol = lu.solve(&rhs).ok_or_else(singular)?;
    // one step of iterative refinement
    let correction = lu.solve(&(&rhs - &reduced * &sol)).ok_or_else(singular)?;
    sol += correction;
    for (idx, &i) in free.iter().enumerate() {
        u[i] = sol[idx];
    }
    Ok(u)
}

/// Contact rule `(L u)_i - f_i >= u_i - psi_i` (non-strict).
fn detect_contact(op: &DiscreteOperator, inst: &ObstacleInstance, u: &[f64]) -> Vec<bool> {
    op.apply(u)
        .iter()
        .zip(u)
        .zip(inst.f.iter().zip(&inst.psi))
        .map(|((lu, ui), (fi, pi))| lu - fi >= ui - pi)
        .collect()
}

/// Howard's policy iteration started from `u = psi`.
///
/// Stops when the contact set repeats: the linear system is then identical,
/// so the next iterate would equal the current one. A result with
/// `converged == false` is returned when `max_iter` passes are exhausted.
pub fn policy_iteration(op: &DiscreteOperator, inst: &ObstacleInstance, max_iter: usize) -> Result<SolverResult> {
    inst.check(op)?;
    if max_iter < 1 {
        return Err(invalid("max_iter must be at least 1"));
    }
    let n = op.size();
    let mut u = inst.psi.clone();
    let mut contact = vec![true; n];
    let mut trace = Vec::new();
    let mut set_updates = 0;
    for iter in 1..=max_iter {
        let next = detect_contact(op, inst, &u);
        if next == contact {
            return Ok(SolverResult {
                u,
                contact: mask_to_indices(&contact),
                trace,
                iterations: iter,
                set_updates,
                converged: true,
            });
        }
        let u_next = solve_masked(op, inst, &next)?;
        let max_update = max_diff(&u_next, &u);
        set_updates += 1;
        let min_increment = min_diff(&u_next, &u);
        let entered_contact = entered(&contact, &next);
        contact = next;
        u = u_next;
        trace.push(IterationRecord {
            iter,
            contact_size: contact.iter().filter(|&&c| c).count(),
            max_update,
            min_increment,
            entered_contact,
            residual: max_abs(&gh(op, inst, &u)),
            radius: None,
        });
    }
    Ok(SolverResult { u, contact: mask_to_indices(&contact), trace, iterations: max_iter, set_updates, converged: false })
}

/// Operator used to decide the contact set in the improved iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactDetection {
    /// The operator of the previous solve, so a repeated set certifies
    /// complementarity for the operator that produced `u`.
    #[default]
    Current,
    /// Always the unmodified operator. Can cycle between two sets when the
    /// modified rows disagree with it next to the free boundary.
    Initial,
}

/// Parameters of the improved policy iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovedParams {
    pub alpha: f64,
    pub theta: f64,
    pub max_iter: usize,
    pub detection: ContactDetection,
}

impl ImprovedParams {
    /// `alpha = 1/2`, `theta = 1/4`, `max_iter = 5N`, detection with the current operator.
    pub fn defaults(inst: &ObstacleInstance) -> Self {
        Self {
            alpha: 0.5,
            theta: 0.25,
            max_iter: 5 * inst.len(),
            detection: ContactDetection::Current,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImprovedResult {
    pub result: SolverResult,
    /// Operator of the last linear solve; complementarity is measured against it.
    pub operator: DiscreteOperator,
    pub initial_operator: DiscreteOperator,
    /// Iteration at which a revisited contact set froze the radii, if any.
    pub frozen_at: Option<usize>,
}

/// Policy iteration whose linear solves use contact-adapted singular radii.
///
/// After each detection the radius of every non-contact node is capped by
/// `theta` times its distance to the contact set and the affected rows are
/// reassembled. `params.detection` picks the operator used for detection.
///
/// Because the operator depends on the contact set, the sets can cycle. When
/// a set comes back after having been left, the current radii are frozen and
/// the iteration finishes as plain policy iteration with that operator,
/// restarted from the obstacle, which terminates.
pub fn improved_policy_iteration(
    mesh: &Mesh,
    s: f64,
    inst: &ObstacleInstance,
    params: ImprovedParams,
) -> Result<ImprovedResult> {
    let order = FractionalOrder::new(s)?;
    let base = NodeMetrics::new(mesh, params.alpha, None)?;
    let initial = assemble_operator(mesh, order, base.clone())?;
    improved_policy_iteration_with(&initial, inst, params)
}

/// Same as [`improved_policy_iteration`] starting from an assembled operator;
/// `params.alpha` is taken from the operator's metrics instead.
pub fn improved_policy_iteration_with(
    initial: &DiscreteOperator,
    inst: &ObstacleInstance,
    params: ImprovedParams,
) -> Result<ImprovedResult> {
    let ImprovedParams { theta, max_iter, detection, .. } = params;
    inst.check(initial)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1) (got {theta})")));
    }
    if max_iter < 1 {
        return Err(invalid("max_iter must be at least 1"));
    }
    let n = initial.size();
    let base = initial.metrics().clone();
    let mut current = initial.clone();
    let mut u = inst.psi.clone();
    let mut contact = vec![true; n];
    let mut trace = Vec::new();
    let mut set_updates = 0;
    let mut seen = HashSet::from([contact.clone()]);
    for iter in 1..=max_iter {
        let detector = match detection {
            ContactDetection::Current => &current,
            ContactDetection::Initial => initial,
        };
        let next = detect_contact(detector, inst, &u);
        if next == contact {
            return Ok(ImprovedResult {
                result: SolverResult {
                    u,
                    contact: mask_to_indices(&contact),
                    trace,
                    iterations: iter,
                    set_updates,
                    converged: true,
                },
                operator: current,
                initial_operator: initial.clone(),
                frozen_at: None,
            });
        }
        if !seen.insert(next.clone()) {
            let rest = policy_iteration(&current, inst, max_iter - iter + 1)?;
            trace.extend(rest.trace.into_iter().map(|r| IterationRecord { iter: r.iter + iter, ..r }));
            return Ok(ImprovedResult {
                result: SolverResult {
                    u: rest.u,
                    contact: rest.contact,
                    trace,
                    iterations: iter + rest.iterations,
                    set_updates: set_updates + rest.set_updates,
                    converged: rest.converged,
                },
                operator: current,
                initial_operator: initial.clone(),
                frozen_at: Some(iter),
            });
        }
        let metrics = improved_scales(&base, &mask_to_indices(&next), initial.mesh(), theta)?;
        current = current.with_metrics(metrics)?;
        let u_next = solve_masked(&current, inst, &next)?;
        let max_update = max_diff(&u_next, &u);
        set_updates += 1;
        let min_increment = min_diff(&u_next, &u);
        let entered_contact = entered(&contact, &next);
        contact = next;
        u = u_next;
        trace.push(IterationRecord {
            iter,
            contact_size: contact.iter().filter(|&&c| c).count(),
            max_update,
            min_increment,
            entered_contact,
            residual: max_abs(&gh(&current, inst, &u)),
            radius: Some(current.metrics().radius.clone()),
        });
    }
    Ok(ImprovedResult {
        result: SolverResult {
            u,
            contact: mask_to_indices(&contact),
            trace,
            iterations: max_iter,
            set_updates,
            converged: false,
        },
        operator: current,
        initial_operator: initial.clone(),
        frozen_at: None,
    })
}

const MAX_DOUBLINGS: usize = 60;

/// Monotone nodal decrease from the supersolution `E * 1`.
///
/// `E` starts at `max(|psi|_inf, 1)` and is doubled until
/// `G(E * 1) >= 0`. Each sweep visits the nodes in ascending order and
/// lowers `u_i` to `max(psi_i, (f_i - sum_{j != i} L_ij u_j) / L_ii)`,
/// the largest value with `G(u)_i = 0`. Sweeps stop once the largest
/// change is at most `tol`.
pub fn perron_solve(op: &DiscreteOperator, inst: &ObstacleInstance, tol: f64, max_sweeps: usize) -> Result<SolverResult> {
    inst.check(op)?;
    if max_sweeps < 1 {
        return Err(invalid("max_sweeps must be at least 1"));
    }
    let n = op.size();
    let l = op.matrix();
    let mut level = max_abs(&inst.psi).max(1.0);
    let mut found = false;
    for _ in 0..=MAX_DOUBLINGS {
        let u = vec![level; n];
        if gh(op, inst, &u).iter().all(|&g| g >= 0.0) {
            found = true;
            break;
        }
        level *= 2.0;
    }
    if !found {
        return Err(Error::InvalidInstance(format!(
            "no constant supersolution found after {MAX_DOUBLINGS} doublings"
        )));
    }
    // row-major copy for the sweeps
    let rows: Vec<f64> = l.transpose().as_slice().to_vec();
    let mut u = vec![level; n];
    let mut trace = Vec::new();
    for sweep in 1..=max_sweeps {
        let mut max_update: f64 = 0.0;
        let was_contact: Vec<bool> = u.iter().zip(&inst.psi).map(|(a, p)| a <= p).collect();
        for i in 0..n {
            let row = &rows[i * n..(i + 1) * n];
            let off: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() - row[i] * u[i];
            let candidate = ((inst.f[i] - off) / row[i]).max(inst.psi[i]);
            if candidate < u[i] {
                max_update = max_update.max(u[i] - candidate);
                u[i] = candidate;
            }
        }
        let done = max_update <= tol;
        if done || sweep == max_sweeps || sweep % 100 == 0 || sweep <= 10 {
            let g = gh(op, inst, &u);
            let contact: Vec<bool> = u.iter().zip(&inst.psi).map(|(a, p)| a <= p).collect();
            trace.push(IterationRecord {
                iter: sweep,
                contact_size: contact.iter().filter(|&&c| c).count(),
                max_update,
                min_increment: -max_update,
                entered_contact: entered(&was_contact, &contact),
                residual: max_abs(&g),
                radius: None,
            });
        }
        if done {
            return Ok(finish_perron(u, &inst.psi, trace, sweep, true));
        }
    }
    Ok(finish_perron(u, &inst.psi, trace, max_sweeps, false))
}

fn finish_perron(u: Vec<f64>, psi: &[f64], trace: Vec<IterationRecord>, sweeps: usize, converged: bool) -> SolverResult {
    let contact = u.iter().zip(psi).enumerate().filter_map(|(k, (a, p))| (a <= p).then_some(k)).collect();
    SolverResult { u, contact, trace, iterations: sweeps, set_updates: 0, converged }
}

/// Outcome of a pointwise complementarity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplementarityCheck {
    pub pass: bool,
    /// `max_i |min((Lu - f)_i, (u - psi)_i)|`.
    pub max_residual: f64,
    pub worst_node: usize,
    /// `min_i (u_i - psi_i)`.
    pub min_obstacle_gap: f64,
    /// `min_i ((L u)_i - f_i)`.
    pub min_pde_residual: f64,
    pub tol: f64,
}

pub fn check_complementarity(op: &DiscreteOperator, inst: &ObstacleInstance, u: &[f64], tol: f64) -> Result<ComplementarityCheck> {
    inst.check(op)?;
    if u.len() != op.size() {
        return Err(invalid(format!("u has {} entries, expected {}", u.len(), op.size())));
    }
    let lu = op.apply(u);
    let mut max_residual: f64 = 0.0;
    let mut worst_node = 0;
    let mut min_gap = f64::INFINITY;
    let mut min_pde = f64::INFINITY;
    for i in 0..u.len() {
        let pde = lu[i] - inst.f[i];
        let gap = u[i] - inst.psi[i];
        let r = pde.min(gap).abs();
        if r > max_residual {
            max_residual = r;
            worst_node = i;
        }
        min_gap = min_gap.min(gap);
        min_pde = min_pde.min(pde);
    }
    Ok(ComplementarityCheck {
        pass: max_residual <= tol && min_gap >= -tol && min_pde >= -tol,
        max_residual,
        worst_node,
        min_obstacle_gap: min_gap,
        min_pde_residual: min_pde,
        tol,
    })
}

/// Default complementarity tolerance `1e-9 (1 + |f|_inf)`.
pub fn default_complementarity_tol(inst: &ObstacleInstance) -> f64 {
    1e-9 * (1.0 + max_abs(&inst.f))
}
