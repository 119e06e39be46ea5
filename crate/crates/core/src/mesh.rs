//! One-dimensional meshes of an interval `[a, b]` and the per-node scales
//! used by the discrete operator.

use crate::error::{invalid, Result};

/// Partition `a = x_0 < x_1 < ... < x_M = b` of a closed interval.
///
/// Interior nodes are `x_1 .. x_{M-1}`. Throughout the crate an *interior
/// index* `k` in `0..N` refers to mesh node `k + 1`.
///
/// Besides the coordinates, every node keeps its distances to both endpoints.
/// Strongly graded meshes put nodes within `1e-20` of an endpoint, far below
/// the spacing of `f64` coordinates near `a` or `b`; the distances keep full
/// relative precision and are what assembly works with.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    from_a: Vec<f64>,
    from_b: Vec<f64>,
    /// `from_b` in reverse order (increasing).
    mirrored: Vec<f64>,
    grading: f64,
}

impl Mesh {
    /// Uniform mesh with `elements` equal elements.
    pub fn uniform(a: f64, b: f64, elements: usize) -> Result<Self> {
        check_interval(a, b)?;
        if elements < 2 {
            return Err(invalid(format!(
                "uniform mesh needs at least 2 elements (got {elements}), otherwise there is no interior node"
            )));
        }
        let len = b - a;
        let m = elements as f64;
        let from_a: Vec<f64> = (0..=elements).map(|j| j as f64 * len / m).collect();
        let from_b: Vec<f64> = (0..=elements).map(|j| (elements - j) as f64 * len / m).collect();
        Self::from_distances(a, b, from_a, from_b, 1.0)
    }

    /// Symmetric graded mesh refined algebraically toward both endpoints.
    ///
    /// The left half is the power map `x_j = a + (b-a)/2 * (2j/M)^mu` and the
    /// right half is its mirror image, so the element touching each endpoint
    /// has length `(b-a)/2 * (2/M)^mu`. `mu = 1` gives the uniform mesh.
    pub fn graded(a: f64, b: f64, elements: usize, mu: f64) -> Result<Self> {
        check_interval(a, b)?;
        if elements < 4 || !elements.is_multiple_of(2) {
            return Err(invalid(format!(
                "graded mesh needs an even element count >= 4 (got {elements})"
            )));
        }
        if !(mu >= 1.0) || !mu.is_finite() {
            return Err(invalid(format!("grading exponent must be >= 1 (got {mu})")));
        }
        let len = b - a;
        let half = 0.5 * len;
        let m = elements as f64;
        let mid = elements / 2;
        let mut from_a = vec![0.0; elements + 1];
        let mut from_b = vec![0.0; elements + 1];
        for j in 0..=mid {
            let offset = if j == mid { half } else { half * (2.0 * j as f64 / m).powf(mu) };
            from_a[j] = offset;
            from_b[j] = len - offset;
            from_b[elements - j] = offset;
            from_a[elements - j] = len - offset;
        }
        from_b[mid] = half;
        Self::from_distances(a, b, from_a, from_b, mu)
    }

    /// Mesh from an explicit node list (first and last entries are the endpoints).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(invalid("a mesh needs at least 3 nodes"));
        }
        let a = nodes[0];
        let b = nodes[nodes.len() - 1];
        check_interval(a, b)?;
        let from_a = nodes.iter().map(|x| x - a).collect();
        let from_b = nodes.iter().map(|x| b - x).collect();
        Self::from_distances(a, b, from_a, from_b, 1.0)
    }

    fn from_distances(a: f64, b: f64, from_a: Vec<f64>, from_b: Vec<f64>, grading: f64) -> Result<Self> {
        let nodes = from_a
            .iter()
            .zip(&from_b)
            .map(|(&da, &db)| if da <= db { a + da } else { b - db })
            .collect();
        let mirrored = from_b.iter().rev().copied().collect();
        let mesh = Self { a, b, nodes, from_a, from_b, mirrored, grading };
        mesh.check_increasing()?;
        Ok(mesh)
    }

    fn check_increasing(&self) -> Result<()> {
        let m = self.element_count();
        for j in 0..m {
            // each pair must be separated in the frame of its nearer endpoint
            let separated = if self.from_a[j] <= self.from_b[j + 1] {
                self.from_a[j + 1] > self.from_a[j]
            } else {
                self.from_b[j] > self.from_b[j + 1]
            };
            if !separated {
                return Err(invalid(format!(
                    "mesh nodes not strictly increasing at index {} ({} >= {})",
                    j,
                    self.nodes[j],
                    self.nodes[j + 1]
                )));
            }
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// All node coordinates including both endpoints.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Distance of every node to `a`.
    pub fn distances_from_a(&self) -> &[f64] {
        &self.from_a
    }

    /// Distance of every node to `b`.
    pub fn distances_from_b(&self) -> &[f64] {
        &self.from_b
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of interior nodes `N = M - 1`.
    pub fn interior_count(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Interior node coordinates `x_1 .. x_{M-1}`.
    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// Interior nodes with their accurate endpoint distances.
    pub fn interior_points(&self) -> impl Iterator<Item = MeshPoint> + '_ {
        (1..self.nodes.len() - 1).map(|j| MeshPoint {
            x: self.nodes[j],
            from_a: self.from_a[j],
            from_b: self.from_b[j],
        })
    }

    /// Grading exponent the mesh was built with (1 for uniform or explicit meshes).
    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Grading parameter `h = (b - a) / M`.
    pub fn nominal_h(&self) -> f64 {
        (self.b - self.a) / self.element_count() as f64
    }

    /// Length of element `j`, i.e. `x_{j+1} - x_j`, measured in the frame of
    /// the nearer endpoint.
    pub fn element_length(&self, j: usize) -> f64 {
        if self.from_a[j] <= self.from_b[j + 1] {
            self.from_a[j + 1] - self.from_a[j]
        } else {
            self.from_b[j] - self.from_b[j + 1]
        }
    }

    /// Distance from node `j` to the nearest endpoint.
    pub fn node_boundary_distance(&self, j: usize) -> f64 {
        self.from_a[j].min(self.from_b[j])
    }

    /// Distance from a coordinate `x` to the nearest endpoint.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        (x - self.a).min(self.b - x)
    }

    /// Node positions measured from the endpoint nearest to node `j`, in
    /// increasing order, together with the flag telling whether that frame is
    /// mirrored (measured from `b`, so local index `m` is mesh node `M - m`).
    pub(crate) fn local_frame(&self, j: usize) -> (&[f64], bool) {
        if self.from_a[j] <= self.from_b[j] {
            (&self.from_a, false)
        } else {
            (&self.mirrored, true)
        }
    }
}

/// An interior node with its distances to both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPoint {
    pub x: f64,
    pub from_a: f64,
    pub from_b: f64,
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || !(a < b) {
        return Err(invalid(format!("interval endpoints must satisfy a < b (got a = {a}, b = {b})")));
    }
    Ok(())
}

/// Per-interior-node geometric scales.
///
/// `radius[k]` is the half-width `H` of the singular interval
/// `[x - H, x + H]` around interior node `k`; it never exceeds the boundary
/// distance, so the interval stays inside `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub h: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: f64,
    pub radius: Vec<f64>,
}

impl NodeMetrics {
    /// Compute `h_i`, `delta_i` and `H_i = min(h_i^alpha delta_i^(1-alpha), delta_i)`.
    ///
    /// `h_i` is the larger of the two elements adjacent to node `i`. When
    /// `override_radii` is given, each radius is additionally capped by the
    /// corresponding entry.
    pub fn new(mesh: &Mesh, alpha: f64, override_radii: Option<&[f64]>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1] (got {alpha})")));
        }
        let n = mesh.interior_count();
        if let Some(r) = override_radii {
            if r.len() != n {
                return Err(invalid(format!(
                    "override radii has length {} but the mesh has {} interior nodes",
                    r.len(),
                    n
                )));
            }
            if let Some(k) = r.iter().position(|&v| !(v > 0.0)) {
                return Err(invalid(format!("override radius at interior node {k} is not positive")));
            }
        }
        let mut h = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n);
        let mut radius = Vec::with_capacity(n);
        for k in 0..n {
            let j = k + 1;
            let hk = mesh.element_length(j - 1).max(mesh.element_length(j));
            let dk = mesh.node_boundary_distance(j);
            let mut hr = base_radius(hk, dk, alpha);
            if let Some(r) = override_radii {
                hr = hr.min(r[k]);
            }
            h.push(hk);
            delta.push(dk);
            radius.push(hr);
        }
        Ok(Self { h, delta, alpha, radius })
    }

    pub fn len(&self) -> usize {
        self.radius.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radius.is_empty()
    }

    /// Radius from the scaling law alone, before any contact-set restriction.
    pub fn base_radius(&self, k: usize) -> f64 {
        base_radius(self.h[k], self.delta[k], self.alpha)
    }
}

/// `min(h^alpha * delta^(1-alpha), delta)`.
pub fn base_radius(h: f64, delta: f64, alpha: f64) -> f64 {
    (h.powf(alpha) * delta.powf(1.0 - alpha)).min(delta)
}
