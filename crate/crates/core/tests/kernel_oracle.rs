mod common;

use common::{c1_reference, integrate, kernel_integral, kernel_tail};
use frac_obstacle::kernel::{exterior_tail_weight, normalization_constant, segment_kernel_moments, singular_coefficient};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn quadrature_oracle_sanity() {
    // int_0^1 x^2 = 1/3 and int_1^2 t^-2 dt = 1/2
    assert!(rel(integrate(|x| x * x, 0.0, 1.0, 1e-14, 0.0), 1.0 / 3.0) < 1e-14);
    assert!(rel(kernel_integral(|_| 1.0, 1.0, 2.0, 0.5), 0.5) < 1e-13);
    assert!(rel(kernel_tail(2.0, 0.5), 0.5) < 1e-13);
}

#[test]
fn normalization_matches_reference_table() {
    for &(s, c) in &common::C1 {
        assert!(rel(normalization_constant(1, s).unwrap(), c) < 1e-13, "s = {s}");
        assert!(rel(singular_coefficient(s).unwrap(), c / (2.0 - 2.0 * s)) < 1e-13, "s = {s}");
    }
}

#[test]
fn segment_moments_match_quadrature_on_random_segments() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let s = match trial % 5 {
            0 => 0.5 + if rng.random_bool(0.5) { 1e-6 } else { -1e-6 },
            // orders where the two exponents have equal magnitude
            1 => if rng.random_bool(0.5) { 0.25 } else { 0.75 },
            _ => rng.random_range(0.02..0.98),
        };
        let x = rng.random_range(-2.0..2.0);
        let gap = 10f64.powf(rng.random_range(-6.0..0.5));
        let len = gap * 10f64.powf(rng.random_range(-3.0..3.0));
        let right = rng.random_bool(0.5);
        let (a, b) = if right { (x + gap, x + gap + len) } else { (x - gap - len, x - gap) };
        let (m0, m1) = segment_kernel_moments(x, a, b, s).unwrap();
        // exact distance range, independent of how a and b rounded
        let (t0, t1) = if right { (a - x, b - x) } else { (x - b, x - a) };
        let o0 = kernel_integral(|_| 1.0, t0, t1, s);
        let o1 = if right {
            kernel_integral(|t| t - t0, t0, t1, s)
        } else {
            kernel_integral(|t| t1 - t, t0, t1, s)
        };
        let e = rel(m0, o0).max(rel(m1, o1));
        worst = worst.max(e);
        assert!(e < 1e-10, "trial {trial}: x={x} [{a}, {b}] s={s}: ({m0}, {m1}) vs ({o0}, {o1})");
    }
    eprintln!("worst relative deviation {worst:.2e}");
}

#[test]
fn exterior_weight_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let s = rng.random_range(0.05..0.95);
        let a = rng.random_range(-3.0..0.0);
        let b = a + rng.random_range(0.1..4.0);
        let x = a + (b - a) * rng.random_range(1e-4..1.0 - 1e-4);
        let w = exterior_tail_weight(x, a, b, s).unwrap();
        let o = kernel_tail(x - a, s) + kernel_tail(b - x, s);
        assert!(rel(w, o) < 1e-10, "x={x} [{a}, {b}] s={s}: {w} vs {o}");
    }
}

#[test]
fn singular_part_exact_for_quadratics() {
    // C P.V. int_{-H}^{H} (u(x) - u(x+t)) |t|^(-1-2s) dt for u = y^2 is
    // -2 C int_0^H t^(1-2s) dt; the scaled second difference gives -2 kappa H^(2-2s).
    for &(s, c) in &common::C1 {
        for h in [1e-3, 0.1, 0.7] {
            let pv = -2.0 * c * integrate(|t| t.powf(1.0 - 2.0 * s), 0.0, h, 1e-13, 0.0);
            let kappa = singular_coefficient(s).unwrap();
            let x: f64 = 0.3;
            let u = |y: f64| y * y;
            let fd = -kappa * (u(x + h) - 2.0 * u(x) + u(x - h)) / h.powf(2.0 * s);
            assert!(rel(fd, pv) < 1e-9, "s = {s}, H = {h}: {fd} vs {pv}");
            // linear functions are annihilated
            let lin = |y: f64| 3.0 * y - 1.0;
            assert!((lin(x + h) - 2.0 * lin(x) + lin(x - h)).abs() < 1e-14);
        }
        assert_eq!(c1_reference(s), c);
    }
}
