//! Dense assembly of the monotone discrete fractional Laplacian.
//!
//! Row `i` of the matrix applies, to a continuous piecewise-linear function
//! `v` vanishing outside `[a, b]`,
//!
//! ```text
//!   -kappa (v(x_i + H_i) - 2 v(x_i) + v(x_i - H_i)) / H_i^(2s)
//!     + C int_{|y - x_i| > H_i} (v(x_i) - v(y)) |x_i - y|^(-1-2s) dy
//! ```
//!
//! The first term replaces the singular integral over `[x_i - H_i, x_i + H_i]`
//! and the second is evaluated exactly element by element with closed-form
//! kernel moments, so the matrix is exact on the finite element space up to
//! rounding.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::kernel::{self, FractionalOrder};
use crate::mesh::{Mesh, NodeMetrics};

/// Relative tolerance (w.r.t. the largest diagonal entry) for sign checks.
pub const ASSEMBLY_TOL: f64 = 1e-10;

/// Piecewise-linear evaluation weights at a point, indexed by mesh node
/// (boundary nodes included). Points outside `[a, b]` give the empty stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationStencil {
    nodes: [usize; 2],
    weights: [f64; 2],
    len: usize,
}

impl InterpolationStencil {
    fn empty() -> Self {
        Self { nodes: [0; 2], weights: [0.0; 2], len: 0 }
    }

    fn single(node: usize) -> Self {
        Self { nodes: [node, 0], weights: [1.0, 0.0], len: 1 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(mesh node index, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes[..self.len].iter().copied().zip(self.weights[..self.len].iter().copied())
    }

    /// Evaluate against values at all mesh nodes (boundary values included).
    pub fn apply(&self, node_values: &[f64]) -> f64 {
        self.iter().map(|(j, w)| w * node_values[j]).sum()
    }
}

pub fn interpolation_stencil(mesh: &Mesh, p: f64) -> InterpolationStencil {
    let x = mesh.nodes();
    if !(p >= mesh.a() && p <= mesh.b()) {
        return InterpolationStencil::empty();
    }
    // first node strictly greater than p
    let upper = x.partition_point(|&xj| xj <= p);
    if upper == 0 {
        return InterpolationStencil::empty();
    }
    let j = upper - 1;
    if x[j] == p || upper == x.len() {
        return InterpolationStencil::single(j);
    }
    let w = ((p - x[j]) / (x[j + 1] - x[j])).clamp(0.0, 1.0);
    InterpolationStencil { nodes: [j, j + 1], weights: [1.0 - w, w], len: 2 }
}

/// Dense matrix of the discrete operator on interior nodes, together with
/// the data it was assembled from.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: DMatrix<f64>,
    metrics: NodeMetrics,
    order: FractionalOrder,
    mesh: Mesh,
}

impl DiscreteOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn metrics(&self) -> &NodeMetrics {
        &self.metrics
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// `L u` for interior nodal values `u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut out = vec![0.0; n];
        for (j, &uj) in u.iter().enumerate() {
            if uj == 0.0 {
                continue;
            }
            let col = self.matrix.column(j);
            for (o, &l) in out.iter_mut().zip(col.iter()) {
                *o += l * uj;
            }
        }
        out
    }

    /// Same mesh and order, new scales. Rows whose radius is unchanged are
    /// copied instead of recomputed.
    pub fn with_metrics(&self, metrics: NodeMetrics) -> Result<Self> {
        check_metrics(&self.mesh, &metrics)?;
        let n = self.size();
        let changed: Vec<usize> =
            (0..n).filter(|&k| metrics.radius[k] != self.metrics.radius[k]).collect();
        let constants = self.order.constants();
        let rows: Vec<Vec<f64>> = changed
            .par_iter()
            .map(|&k| assemble_row(&self.mesh, &metrics, self.order.s(), constants, k))
            .collect();
        let mut matrix = self.matrix.clone();
        for (&k, row) in changed.iter().zip(rows) {
            for (j, v) in row.into_iter().enumerate() {
                matrix[(k, j)] = v;
            }
        }
        Ok(Self { matrix, metrics, order: self.order, mesh: self.mesh.clone() })
    }

    /// Whitespace-separated dense dump, row-major, 17 significant digits.
    pub fn write_matrix<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.size();
        for i in 0..n {
            let line: Vec<String> = (0..n).map(|j| format!("{:.16e}", self.matrix[(i, j)])).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn structure(&self) -> StructureReport {
        verify_monotone_structure(&self.matrix)
    }
}

fn check_metrics(mesh: &Mesh, metrics: &NodeMetrics) -> Result<()> {
    let n = mesh.interior_count();
    if metrics.radius.len() != n || metrics.h.len() != n || metrics.delta.len() != n {
        return Err(invalid(format!(
            "metrics describe {} nodes but the mesh has {} interior nodes",
            metrics.radius.len(),
            n
        )));
    }
    for (k, (&r, &d)) in metrics.radius.iter().zip(&metrics.delta).enumerate() {
        let dist = mesh.node_boundary_distance(k + 1);
        if !(r > 0.0) || r > dist {
            return Err(invalid(format!(
                "radius {r} at interior node {k} is not in (0, {dist}]"
            )));
        }
        if d != dist {
            return Err(invalid(format!("metrics do not belong to this mesh (interior node {k})")));
        }
    }
    Ok(())
}

/// Assemble the dense `N x N` matrix for the given mesh, order and scales.
pub fn assemble_operator(mesh: &Mesh, order: FractionalOrder, metrics: NodeMetrics) -> Result<DiscreteOperator> {
    if order.dimension() != 1 {
        return Err(invalid("only one-dimensional assembly is implemented"));
    }
    check_metrics(mesh, &metrics)?;
    let n = mesh.interior_count();
    let constants = order.constants();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| assemble_row(mesh, &metrics, order.s(), constants, k))
        .collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(DiscreteOperator { matrix, metrics, order, mesh: mesh.clone() })
}

/// Piecewise-linear weights at `p` for increasing (possibly tied) positions `z`.
fn frame_stencil(z: &[f64], p: f64) -> InterpolationStencil {
    if !(p >= z[0] && p <= z[z.len() - 1]) {
        return InterpolationStencil::empty();
    }
    let upper = z.partition_point(|&zj| zj <= p);
    let j = upper - 1;
    if z[j] == p || upper == z.len() {
        return InterpolationStencil::single(j);
    }
    let w = ((p - z[j]) / (z[j + 1] - z[j])).clamp(0.0, 1.0);
    InterpolationStencil { nodes: [j, j + 1], weights: [1.0 - w, w], len: 2 }
}

/// Row of interior node `k`, computed in the frame of its nearer endpoint.
fn assemble_row(mesh: &Mesh, metrics: &NodeMetrics, s: f64, kc: kernel::KernelConstants, k: usize) -> Vec<f64> {
    let n = mesh.interior_count();
    let m_total = mesh.element_count();
    let node = k + 1;
    let (z, mirrored) = mesh.local_frame(node);
    // local index -> mesh node index
    let to_mesh = |m: usize| if mirrored { m_total - m } else { m };
    let local = if mirrored { m_total - node } else { node };
    let zi = z[local];
    let radius = metrics.radius[k];
    let mut row = vec![0.0; n];
    let mut diag = 0.0;
    let add_off = |m: usize, v: f64, row: &mut Vec<f64>| {
        let j = to_mesh(m);
        if (1..=n).contains(&j) {
            row[j - 1] -= v;
        }
    };

    // singular part: scaled centered second difference
    let coef = kc.kappa * radius.powf(-2.0 * s);
    diag += 2.0 * coef;
    for p in [zi - radius, zi + radius] {
        for (m, w) in frame_stencil(z, p).iter() {
            if m == local {
                diag -= coef * w;
            } else {
                add_off(m, coef * w, &mut row);
            }
        }
    }

    // exterior of [a, b]: v vanishes there, only v(x_i) contributes
    let (da, db) = (mesh.distances_from_a()[node], mesh.distances_from_b()[node]);
    diag += kc.c * (da.powf(-2.0 * s) + db.powf(-2.0 * s)) / (2.0 * s);

    // tail inside [a, b] minus the singular interval, element by element
    let lo_cut = zi - radius;
    let hi_cut = zi + radius;
    for m in 0..m_total {
        let (zl, zr) = (z[m], z[m + 1]);
        if !(zr > zl) {
            continue;
        }
        let segments = [(zl, zr.min(lo_cut)), (zl.max(hi_cut), zr)];
        for (lo, hi) in segments {
            if !(hi > lo) {
                continue;
            }
            // distances of the segment ends from x_i; `near` weights the closer end
            let (t_lo, t_hi) = ((lo - zi).abs(), (hi - zi).abs());
            // far end from the segment length: the two distances may round together
            let t_min = t_lo.min(t_hi);
            let (near, far) = kernel::distance_hat_weights(t_min, hi - lo, s);
            let (w_lo, w_hi) = if t_lo < t_hi { (near, far) } else { (far, near) };
            let len = zr - zl;
            // hat of local node m is (zr - y)/len, hat of m+1 is (y - zl)/len
            let left_hat = ((zr - lo) / len, (zr - hi) / len);
            let right_hat = ((lo - zl) / len, (hi - zl) / len);
            for (j, (v_lo, v_hi)) in [(m, left_hat), (m + 1, right_hat)] {
                if j == local {
                    diag += kc.c * (w_lo * (1.0 - v_lo) + w_hi * (1.0 - v_hi));
                } else {
                    add_off(j, kc.c * (w_lo * v_lo + w_hi * v_hi), &mut row);
                }
            }
            if m != local && m + 1 != local {
                diag += kc.c * (w_lo + w_hi);
            }
        }
    }
    row[k] = diag;
    row
}

/// Restrict the singular radius of every non-contact node to `theta` times
/// its distance to the nearest contact node.
///
/// Contact nodes keep their radius, and an empty contact set leaves the
/// metrics unchanged. `contact` holds interior indices.
pub fn improved_scales(metrics: &NodeMetrics, contact: &[usize], mesh: &Mesh, theta: f64) -> Result<NodeMetrics> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1) (got {theta})")));
    }
    let n = mesh.interior_count();
    if metrics.len() != n {
        return Err(invalid("metrics do not match the mesh"));
    }
    if let Some(&k) = contact.iter().find(|&&k| k >= n) {
        return Err(invalid(format!("contact index {k} out of range (N = {n})")));
    }
    let mut out = metrics.clone();
    if contact.is_empty() {
        return Ok(out);
    }
    let xs = mesh.interior();
    let mut contact_x: Vec<f64> = contact.iter().map(|&k| xs[k]).collect();
    contact_x.sort_by(f64::total_cmp);
    let mut is_contact = vec![false; n];
    for &k in contact {
        is_contact[k] = true;
    }
    for k in 0..n {
        if is_contact[k] {
            continue;
        }
        let x = xs[k];
        let pos = contact_x.partition_point(|&c| c < x);
        let mut dist = f64::INFINITY;
        if pos < contact_x.len() {
            dist = dist.min(contact_x[pos] - x);
        }
        if pos > 0 {
            dist = dist.min(x - contact_x[pos - 1]);
        }
        out.radius[k] = out.radius[k].min(theta * dist);
    }
    Ok(out)
}

/// Diagnostics for the M-matrix / strict diagonal dominance structure.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StructureReport {
    pub size: usize,
    /// Largest off-diagonal entry (should be `<= tolerance`).
    pub max_offdiagonal: f64,
    pub min_diagonal: f64,
    pub max_diagonal: f64,
    /// `min_i (L_ii - sum_{j != i} |L_ij|)`.
    pub min_dominance_gap: f64,
    pub worst_gap_row: usize,
    /// Absolute tolerance applied to off-diagonal signs.
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_monotone_structure(matrix: &DMatrix<f64>) -> StructureReport {
    let n = matrix.nrows();
    let mut max_off = f64::NEG_INFINITY;
    let mut min_diag = f64::INFINITY;
    let mut max_diag = f64::NEG_INFINITY;
    let mut min_gap = f64::INFINITY;
    let mut worst = 0;
    for i in 0..n {
        let d = matrix[(i, i)];
        min_diag = min_diag.min(d);
        max_diag = max_diag.max(d);
        let mut off_abs = 0.0;
        for j in 0..matrix.ncols() {
            if j != i {
                let v = matrix[(i, j)];
                max_off = max_off.max(v);
                off_abs += v.abs();
            }
        }
        let gap = d - off_abs;
        if gap < min_gap {
            min_gap = gap;
            worst = i;
        }
    }
    if n < 2 {
        max_off = 0.0;
    }
    let tolerance = ASSEMBLY_TOL * max_diag.abs();
    let pass = n > 0 && min_diag > 0.0 && max_off <= tolerance && min_gap > 0.0;
    StructureReport {
        size: n,
        max_offdiagonal: max_off,
        min_diagonal: min_diag,
        max_diagonal: max_diag,
        min_dominance_gap: min_gap,
        worst_gap_row: worst,
        tolerance,
        pass,
    }
}

/// Convenience: mesh, default scales with exponent `alpha`, and assembly.
pub fn build_operator(mesh: &Mesh, s: f64, alpha: f64) -> Result<DiscreteOperator> {
    let order = FractionalOrder::new(s)?;
    let metrics = NodeMetrics::new(mesh, alpha, None)?;
    assemble_operator(mesh, order, metrics)
}
