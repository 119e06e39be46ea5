mod common;

use frac_obstacle::mesh::{Mesh, NodeMetrics};
use frac_obstacle::operator::{assemble_operator, build_operator};
use frac_obstacle::FractionalOrder;

fn meshes() -> Vec<Mesh> {
    vec![
        Mesh::uniform(-1.0, 1.0, 8).unwrap(),
        Mesh::uniform(0.0, 3.0, 16).unwrap(),
        Mesh::graded(-1.0, 1.0, 12, 2.5).unwrap(),
        Mesh::graded(-1.0, 1.0, 16, 7.0).unwrap(),
        Mesh::from_nodes(vec![-0.5, -0.41, -0.2, -0.17, 0.05, 0.3, 0.33, 0.6, 0.91, 1.2]).unwrap(),
    ]
}

fn compare(mesh: &Mesh, s: f64, metrics: NodeMetrics) -> f64 {
    let radius = metrics.radius.clone();
    let op = assemble_operator(mesh, FractionalOrder::new(s).unwrap(), metrics).unwrap();
    let l = op.matrix();
    let n = op.size();
    assert!(n <= 15);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let o = common::operator_entry(mesh, i + 1, j + 1, radius[i], s);
            // relative 1e-8, with a rounding-level floor for entries that vanish exactly
            let e = if (l[(i, j)] - o).abs() <= 1e-14 * l[(i, i)] { 0.0 } else { (l[(i, j)] - o).abs() / o.abs() };
            worst = worst.max(e);
            assert!(e < 1e-8, "s={s} entry ({i}, {j}): {} vs {o}", l[(i, j)]);
        }
    }
    worst
}

#[test]
fn assembled_entries_match_hat_function_oracle() {
    for s in [0.25, 0.5, 0.75] {
        for mesh in meshes() {
            let metrics = NodeMetrics::new(&mesh, 0.5, None).unwrap();
            compare(&mesh, s, metrics);
        }
    }
}

#[test]
fn shrunken_radii_match_oracle() {
    // radii that do not sit on nodes, as produced by contact-adapted scales
    for s in [0.25, 0.5, 0.75] {
        let mesh = Mesh::uniform(-1.0, 1.0, 12).unwrap();
        let base = NodeMetrics::new(&mesh, 0.5, None).unwrap();
        let over: Vec<f64> = base.radius.iter().enumerate().map(|(k, r)| r * (0.2 + 0.07 * k as f64)).collect();
        let metrics = NodeMetrics::new(&mesh, 0.5, Some(&over)).unwrap();
        compare(&mesh, s, metrics);
    }
}

#[test]
fn operator_on_hat_sum_reproduces_row_sums() {
    // L 1 equals the kernel mass outside the interval plus nothing else on a uniform mesh centre row
    let mesh = Mesh::uniform(-1.0, 1.0, 10).unwrap();
    let op = build_operator(&mesh, 0.5, 0.5).unwrap();
    let ones = vec![1.0; op.size()];
    let sums = op.apply(&ones);
    for (k, v) in sums.iter().enumerate() {
        let o: f64 = (0..op.size())
            .map(|j| common::operator_entry(&mesh, k + 1, j + 1, op.metrics().radius[k], 0.5))
            .sum();
        assert!((v - o).abs() < 1e-8 * o.abs(), "row {k}: {v} vs {o}");
        assert!(*v > 0.0);
    }
}

