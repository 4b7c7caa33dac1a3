//! Comparisons against extended-precision references generated by
//! `tests/data/gen_fixtures.py`.

use num_complex::Complex64;
use opplab_core::dirichlet::{eval_s, DirichletPoly};
use opplab_core::numeric::{ln_dd, reduce_phase};
use std::f64::consts::PI;

fn rows(name: &str) -> Vec<Vec<f64>> {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path)
        .expect("fixture present")
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|x| x.parse().expect("numeric field"))
                .collect()
        })
        .collect()
}

fn wrap(d: f64) -> f64 {
    d - 2.0 * PI * (d / (2.0 * PI)).round()
}

#[test]
fn phase_reduction_within_microradian() {
    let rows = rows("phase_reference.csv");
    assert_eq!(rows.len(), 10_000);
    let mut worst: f64 = 0.0;
    for r in &rows {
        let got = reduce_phase(r[1], ln_dd(r[0]));
        worst = worst.max(wrap(got - r[2]).abs());
    }
    assert!(worst < 1e-6, "worst phase error {worst:e}");
    // Far below the contract in practice.
    assert!(worst < 1e-12, "worst phase error {worst:e}");
}

fn coeff(n: u64, j: u64) -> f64 {
    (((n * 7919 + j * 104729) % 2001) as f64 - 1000.0) / 1000.0
}

#[test]
fn dirichlet_sums_match_reference() {
    let rows = rows("dirichlet_reference.csv");
    assert_eq!(rows.len(), 100);
    for r in &rows {
        let (j, lo, hi, t) = (r[0] as u64, r[1] as u64, r[2] as u64, r[3]);
        let coeffs = (lo..hi).map(|n| Complex64::new(coeff(n, j), 0.0)).collect();
        let p = DirichletPoly::new(lo, hi, coeffs).unwrap();
        let want = Complex64::new(r[4], r[5]);
        let got = eval_s(&p, t).unwrap();
        assert!(
            (got - want).norm() <= 1e-9 * want.norm(),
            "poly {j}: t = {t}, got {got}, want {want}"
        );
    }
}
