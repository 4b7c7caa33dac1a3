#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(α₂, α₃, ξ)` triples valid for every `N ≥ 2`: rationals, near-rationals,
/// quadratic irrationals and seeded random values.
pub fn oracle_battery() -> Vec<(f64, f64, f64)> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let rationals = [0.5, 2.0 / 3.0, 0.75, 1.0, 3.0, 5.0 / 7.0, 2.0, 1.25];
    let irrationals = [
        s2,
        s3,
        s5,
        (1.0 + s5) / 2.0,
        s2 / 2.0,
        s3 / 2.0,
        (s5 - 1.0) / 2.0,
        1.0 + s2,
    ];
    let near: Vec<f64> = rationals
        .iter()
        .flat_map(|r| [r + 1e-9, r - 1e-6, r + 1e-3])
        .collect();
    let xis = [0.0, 0.37, -1.5];
    let mut out = Vec::new();
    for (k, &a3) in rationals
        .iter()
        .chain(&irrationals)
        .chain(&near)
        .enumerate()
    {
        let a2 = [1.0, 0.5, s2, 0.75][k % 4];
        for &xi in &xis {
            out.push((a2, a3, xi));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    while out.len() < 220 {
        out.push((
            rng.random_range(0.3..3.0),
            rng.random_range(0.3..3.0),
            rng.random_range(-1.9..1.9),
        ));
    }
    out
}

/// ζ(½ + it) by Euler–Maclaurin at twice the library cutoff, with
/// corrections through `B₁₀` and plain `f64` logarithms.
pub fn zeta_oracle(t: f64) -> Complex64 {
    let m = 2 * 50usize.max((4.0 * t.abs()).ceil() as usize);
    let s = Complex64::new(0.5, t);
    let pow = |n: f64| (-s * n.ln()).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (1..m).rev() {
        acc += pow(n as f64);
    }
    let mf = m as f64;
    acc += pow(mf) * mf / (s - 1.0) + 0.5 * pow(mf);
    // B_{2k} / (2k)!
    let coeffs = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let mut rising = s;
    let mut mpow = pow(mf) / mf;
    for (k, c) in coeffs.iter().enumerate() {
        acc += c * rising * mpow;
        let j = 2.0 * k as f64 + 1.0;
        rising *= (s + j) * (s + j + 1.0);
        mpow /= mf * mf;
    }
    acc
}

/// Smallest `q ≤ q_max` with `min_p |qα − p| < 1/(2 q_max)`, by full scan.
pub fn near_rational_scan(alpha: f64, q_max: u64) -> u64 {
    (1..=q_max)
        .find(|&q| {
            let qa = q as f64 * alpha;
            (qa - qa.round()).abs() < 1.0 / (2.0 * q_max as f64)
        })
        .unwrap_or(0)
}
