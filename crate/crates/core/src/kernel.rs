//! Closed-form kernel quantities for the one-dimensional fractional Laplacian
//! with kernel `|x - y|^(-1-2s)`.

use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

/// Fractional order `s` in `(0, 1)` together with the spatial dimension.
///
/// Only `n = 1` is used for assembly; the dimension is carried so the
/// normalization constant can be evaluated for any `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    s: f64,
    n: u32,
}

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        Self::with_dimension(s, 1)
    }

    pub fn with_dimension(s: f64, n: u32) -> Result<Self> {
        check_order(s)?;
        if n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { s, n })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn constants(&self) -> KernelConstants {
        let c = normalization_unchecked(self.n, self.s);
        KernelConstants { c, kappa: c / (2.0 - 2.0 * self.s) }
    }
}

/// Normalization constant and the coefficient of the centered second
/// difference that replaces the singular part of the integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub c: f64,
    pub kappa: f64,
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("fractional order must lie in (0, 1) (got {s})")));
    }
    Ok(())
}

fn normalization_unchecked(n: u32, s: f64) -> f64 {
    let half_n = 0.5 * n as f64;
    4f64.powf(s) * s * gamma(s + half_n) / (std::f64::consts::PI.powf(half_n) * gamma(1.0 - s))
}

/// `C_{n,s} = 2^(2s) s Gamma(s + n/2) / (pi^(n/2) Gamma(1 - s))`.
pub fn normalization_constant(n: u32, s: f64) -> Result<f64> {
    check_order(s)?;
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(normalization_unchecked(n, s))
}

/// Coefficient `kappa = C_{1,s} / (2 - 2s)`.
///
/// With it, `-kappa (u(x+H) - 2u(x) + u(x-H)) / H^(2s)` reproduces
/// `C_{1,s} P.V. int_{x-H}^{x+H} (u(x) - u(y)) |x - y|^(-1-2s) dy` for every
/// quadratic `u`.
pub fn singular_coefficient(s: f64) -> Result<f64> {
    Ok(normalization_constant(1, s)? / (2.0 - 2.0 * s))
}

/// `expm1(c * l) / c`, continuous at `c = 0`.
fn expm1_ratio(c: f64, l: f64) -> f64 {
    if c == 0.0 {
        l
    } else {
        (c * l).exp_m1() / c
    }
}

/// `expm1_ratio(1 - 2s, l) - expm1_ratio(-2s, l)`, i.e. `int_0^R r (1+r)^(-1-2s) dr`
/// with `l = ln(1 + R)`. Summed as a series for small `l` where the two
/// terms nearly cancel.
fn first_moment_factor(s: f64, l: f64) -> f64 {
    let c1 = 1.0 - 2.0 * s;
    let c2 = -2.0 * s;
    if l >= 0.5 {
        return expm1_ratio(c1, l) - expm1_ratio(c2, l);
    }
    // sum_{k>=2} (c1^(k-1) - c2^(k-1)) l^k / k!
    let mut p1 = c1;
    let mut p2 = c2;
    let mut lk = l * l / 2.0;
    let mut sum = lk;
    for k in 3..60 {
        lk *= l / k as f64;
        p1 *= c1;
        p2 *= c2;
        sum += (p1 - p2) * lk;
        // bound the term rather than test it: it vanishes for some k when |c1| = |c2|
        if (p1.abs() + p2.abs()) * lk <= 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Integrals of the kernel against the two linear shape functions of a
/// segment `[t0, t0 + len]` in the distance variable `t = |y - x|`, `t0, len > 0`.
/// The length is passed separately so very short far segments keep their mass.
///
/// Returns `(near, far)` where `near = int K (t0 + len - t)/len` and
/// `far = int K (t - t0)/len`. Both are nonnegative and sum to the
/// zeroth moment.
pub(crate) fn distance_hat_weights(t0: f64, len: f64, s: f64) -> (f64, f64) {
    debug_assert!(t0 > 0.0 && len > 0.0, "t0 = {t0:e}, len = {len:e}, s = {s}");
    let l = (len / t0).ln_1p();
    let m0 = t0.powf(-2.0 * s) * expm1_ratio(-2.0 * s, l);
    let far = (t0.powf(1.0 - 2.0 * s) * first_moment_factor(s, l) / len).clamp(0.0, m0);
    (m0 - far, far)
}

/// `(m0, m1)` with `m0 = int_a^b |x - y|^(-1-2s) dy` and
/// `m1 = int_a^b (y - a) |x - y|^(-1-2s) dy`.
///
/// The segment must lie on one side of `x` and must not touch it.
pub fn segment_kernel_moments(x: f64, a: f64, b: f64, s: f64) -> Result<(f64, f64)> {
    check_order(s)?;
    if !(a < b) {
        return Err(invalid(format!("segment endpoints must satisfy a < b (got [{a}, {b}])")));
    }
    if a < x && x < b {
        return Err(invalid(format!(
            "segment [{a}, {b}] contains the evaluation point {x}; split it first"
        )));
    }
    if a == x || b == x {
        return Err(invalid(format!(
            "segment [{a}, {b}] touches the evaluation point {x}; the kernel moment diverges"
        )));
    }
    let len = b - a;
    if a > x {
        let (near, far) = distance_hat_weights(a - x, len, s);
        Ok((near + far, far * len))
    } else {
        // t = x - y runs from x - b (at y = b) to x - a (at y = a); y - a = t1 - t.
        let (near, far) = distance_hat_weights(x - b, len, s);
        Ok((near + far, near * len))
    }
}

/// Kernel mass outside `[a, b]` seen from `x`:
/// `int_{-inf}^a + int_b^inf |x - y|^(-1-2s) dy = ((x-a)^(-2s) + (b-x)^(-2s)) / (2s)`.
pub fn exterior_tail_weight(x: f64, a: f64, b: f64, s: f64) -> Result<f64> {
    check_order(s)?;
    if !(a < x && x < b) {
        return Err(invalid(format!("point {x} is not inside ({a}, {b})")));
    }
    Ok(((x - a).powf(-2.0 * s) + (b - x).powf(-2.0 * s)) / (2.0 * s))
}
