//! Independent reference computations shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision, clippy::approx_constant)]

/// 30-digit reference values of `C_{1,s}`.
pub const C1: [(f64, f64); 7] = [
    (0.1, 0.0903139828714556134524064984014),
    (0.25, 0.199471140200716338969973029967),
    (0.3, 0.230096381681632104648051729597),
    (0.5, 0.318309886183790671537767526745),
    (0.6, 0.333549429912248113855925701713),
    (0.75, 0.299206710301074508454959544951),
    (0.9, 0.164904938818302724898991634897),
];

pub fn c1_reference(s: f64) -> f64 {
    C1.iter().find(|(t, _)| *t == s).expect("no reference constant for this order").1
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`, refined by
/// bisection until the local error estimates sum below `rel * |I| + abs`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut pieces = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..20_000 {
        let total: f64 = pieces.iter().map(|p| p.2 .0).sum();
        let err: f64 = pieces.iter().map(|p| p.2 .1).sum();
        if err <= rel * total.abs() + abs {
            return total;
        }
        let (k, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = pieces.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(&f, lo, mid)));
        pieces.push((mid, hi, gk15(&f, mid, hi)));
    }
    let total: f64 = pieces.iter().map(|p| p.2 .0).sum();
    let err: f64 = pieces.iter().map(|p| p.2 .1).sum();
    panic!("quadrature did not reach the requested accuracy on [{a}, {b}]: {total:e} err {err:e} abs {abs:e}");
}

/// `int g(t) t^(-1-2s) dt` over `[t0, t1]`, `0 < t0 < t1`.
///
/// Pieces spanning a large distance ratio use `t = e^v`, which flattens the
/// kernel; short pieces are integrated in `t` so `g` sees exact arguments.
/// Accuracy is relative to `max|g| int t^(-1-2s)`, since `g` may itself be a
/// difference that cancels.
pub fn kernel_integral<G: Fn(f64) -> f64>(g: G, t0: f64, t1: f64, s: f64) -> f64 {
    let gmax = [t0, 0.5 * (t0 + t1), t1].iter().map(|&t| g(t).abs()).fold(0.0, f64::max);
    if t1 > 4.0 * t0 {
        let (v0, v1) = (t0.ln(), t1.ln());
        let mass = integrate(|v| (-2.0 * s * v).exp(), v0, v1, 1e-12, 0.0);
        integrate(|v| g(v.exp()) * (-2.0 * s * v).exp(), v0, v1, 1e-12, 1e-13 * gmax * mass)
    } else {
        let k = |t: f64| t.powf(-1.0 - 2.0 * s);
        let mass = integrate(k, t0, t1, 1e-12, 0.0);
        integrate(|t| g(t) * k(t), t0, t1, 1e-12, 1e-13 * gmax * mass)
    }
}

/// `int_d^inf t^(-1-2s) dt` with `t = d e^v`, truncated where the
/// integrand drops below `1e-20` of its start.
pub fn kernel_tail(d: f64, s: f64) -> f64 {
    let end = 46.0 / (2.0 * s);
    d.powf(-2.0 * s) * integrate(|v| (-2.0 * s * v).exp(), 0.0, end, 1e-14, 0.0)
}

/// Hat function of node `j` on the sorted node list.
pub fn hat(nodes: &[f64], j: usize, y: f64) -> f64 {
    let x = nodes[j];
    if j > 0 && y >= nodes[j - 1] && y <= x {
        return (y - nodes[j - 1]) / (x - nodes[j - 1]);
    }
    if j + 1 < nodes.len() && y >= x && y <= nodes[j + 1] {
        return (nodes[j + 1] - y) / (nodes[j + 1] - x);
    }
    0.0
}

/// Node positions relative to node `i`, from the mesh's stored boundary
/// distances in the frame of the endpoint nearer to node `i`. Subtracting
/// absolute coordinates instead leaves rounding slivers at the ball edge
/// on strongly graded meshes.
pub fn relative_positions(mesh: &frac_obstacle::Mesh, i: usize) -> Vec<f64> {
    let (da, db) = (mesh.distances_from_a(), mesh.distances_from_b());
    if da[i] <= db[i] {
        da.iter().map(|d| d - da[i]).collect()
    } else {
        db.iter().map(|d| db[i] - d).collect()
    }
}

/// Entry `(i, j)` of the discrete operator, from its definition: the scaled
/// second difference of the hat of node `j` over radius `radius` at node
/// `i`, plus the kernel integral of the hat outside that ball, with the
/// hat taken as zero outside the interval.
pub fn operator_entry(mesh: &frac_obstacle::Mesh, i: usize, j: usize, radius: f64, s: f64) -> f64 {
    let c = c1_reference(s);
    let kappa = c / (2.0 - 2.0 * s);
    let rel = relative_positions(mesh, i);
    let phi = |t: f64| hat(&rel, j, t);
    let px = phi(0.0);
    let singular = -kappa * (phi(radius) - 2.0 * px + phi(-radius)) / radius.powf(2.0 * s);

    // inside the interval, split at nodes so the integrand is smooth on each piece
    let mut tail = 0.0;
    for w in rel.windows(2) {
        for (p, q) in [(w[0], w[1].min(-radius)), (w[0].max(radius), w[1])] {
            if q <= p {
                continue;
            }
            tail += if p >= 0.0 {
                kernel_integral(|t| px - phi(t), p, q, s)
            } else {
                kernel_integral(|t| px - phi(-t), -q, -p, s)
            };
        }
    }
    let exterior = px * (kernel_tail(-rel[0], s) + kernel_tail(*rel.last().unwrap(), s));
    singular + c * (tail + exterior)
}
