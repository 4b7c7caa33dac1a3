//! Fast engines and closed-form claims checked against independent oracles.

mod common;

use num_complex::Complex64;
use opplab_core::dirichlet::{
    eval_epstein_sum, eval_h, level_set_stats, mean_square, resolving_spacing, zeta_critical_line,
    zeta_envelope, DirichletPoly, EpsteinSum,
};
use opplab_core::forms::{brute_force_min, count_solutions_sharp, eval_form};
use opplab_core::numeric::ln_dd;
use opplab_core::search::{
    count_main_term_band, delta_count_sharp, density_check, two_pointer_min, DensityQuery,
};
use opplab_core::spectral::{
    eval_f2, integrate_samples, pole_term, smoothed_count_direct, smoothed_count_spectral,
    split_main_oscillatory, SpectralGrid, SpectralProblem,
};
use opplab_core::sweep::{alpha_grid, average_f1_over_alpha2, flag_near_rational};
use opplab_core::windows::Interval;
use opplab_core::{FormParams, LatticePoint, WindowSpec};

#[test]
fn two_pointer_equals_brute_force_on_battery() {
    let battery = common::oracle_battery();
    assert!(battery.len() >= 200);
    for &(a2, a3, xi) in &battery {
        for n in [2, 3, 5, 8, 13, 21, 34, 48] {
            let p = FormParams::new(a2, a3, xi, n).unwrap();
            let o = brute_force_min(&p).unwrap();
            let t = two_pointer_min(&p).unwrap().witness;
            assert_eq!(o.abs_value, t.abs_value, "{p:?}");
            assert_eq!(eval_form(&p, t.point), t.value);
        }
    }
}

#[test]
fn sharp_counts_equal_oracle_counts() {
    for &(a2, a3, xi) in common::oracle_battery().iter().step_by(7) {
        for n in [4, 11, 24] {
            let p = FormParams::new(a2, a3, xi, n).unwrap();
            for d in [0.05, 0.3, 1.1] {
                assert_eq!(
                    delta_count_sharp(&p, d).unwrap(),
                    count_solutions_sharp(&p, d).unwrap(),
                    "{p:?} {d}"
                );
            }
        }
    }
}

#[test]
fn sharp_count_grows_like_delta_n() {
    let mut ratios = Vec::new();
    for k in 6..=10 {
        let n = 1u32 << k;
        let p = FormParams::new(1.0, 0.5f64.sqrt(), 0.0, n).unwrap();
        let d = (n as f64).powf(-0.5);
        ratios.push(delta_count_sharp(&p, d).unwrap() as f64 / (d * n as f64));
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(lo > 0.0 && hi / lo < 4.0, "{ratios:?}");
}

#[test]
fn main_band_count_matches_box_enumeration() {
    for &(a2, a3) in &[(1.0, 0.9), (2f64.sqrt(), 0.6), (0.5, 1.3)] {
        for n in [8u32, 12, 17] {
            let p = FormParams::new(a2, a3, 0.0, n).unwrap();
            let thr = (n as f64).powf(1.5);
            let lo = (n as i64 + 3) / 4;
            let mut c = 0;
            for x1 in lo..n as i64 {
                for x2 in lo..n as i64 {
                    for x3 in lo..n as i64 {
                        if eval_form(&p, LatticePoint::new(x1, x2, x3)).abs() <= thr {
                            c += 1;
                        }
                    }
                }
            }
            assert_eq!(count_main_term_band(&p).unwrap(), c);
        }
    }
}

#[test]
fn isotropic_density_passes() {
    for a in [1.0, 2.5, 4.0] {
        let n = (3.0 * a) as u32 + 3;
        let q = DensityQuery {
            a,
            delta: 0.5,
            params: FormParams::new(1.0, 1.0, 0.0, n).unwrap(),
        };
        assert!(density_check(&q, 0.5).unwrap().pass);
    }
}

#[test]
fn generic_density_fails_rarely() {
    // Reduced battery: 16 α₃ points at N = 2¹⁰, A = 1, δ = N^{-1/2}.
    let n = 1024u32;
    let delta = (n as f64).powf(-0.5);
    let fails = alpha_grid(Interval::new(0.5, 1.0), 16, Some((3, 1)))
        .into_iter()
        .filter(|&a3| {
            let q = DensityQuery {
                a: 1.0,
                delta,
                params: FormParams::new(1.0, a3, 0.0, n).unwrap(),
            };
            !density_check(&q, delta).unwrap().pass
        })
        .count();
    assert!(fails <= 2, "{fails} of 16 failed");
}

#[test]
fn flag_matches_denominator_scan() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..400 {
        let a: f64 = rng.random_range(0.0..3.0);
        let q = rng.random_range(1..2000u64);
        assert_eq!(
            flag_near_rational(a, q).unwrap(),
            common::near_rational_scan(a, q),
            "{a} {q}"
        );
    }
    for (a, q) in [
        (0.75, 10),
        (2.0 / 3.0 + 1e-12, 1000),
        (0.5f64.sqrt(), 10_000),
    ] {
        assert_eq!(
            flag_near_rational(a, q).unwrap(),
            common::near_rational_scan(a, q)
        );
    }
    // Convergent 5741/8119 lies inside the detection window.
    assert_eq!(flag_near_rational(0.5f64.sqrt(), 10_000).unwrap(), 8119);
}

#[test]
fn zeta_matches_independent_oracle() {
    let z = zeta_critical_line(0.0).unwrap();
    let o = common::zeta_oracle(0.0);
    assert!((z - o).norm() < 1e-10);
    assert!((z.re + 1.46035451).abs() < 1e-6);
    for t in [1.0, 14.134725141734693, 77.7, 512.0, 3000.0] {
        let (z, o) = (zeta_critical_line(t).unwrap(), common::zeta_oracle(t));
        assert!((z - o).norm() < 1e-8, "t = {t}: {z} vs {o}");
    }
}

#[test]
fn zeta_growth_headroom() {
    for t in opplab_core::dirichlet::log_grid(1.0, 1e4, 120) {
        let r = zeta_critical_line(t).unwrap().norm() / (1.0 + t).powf(1.0 / 6.0);
        assert!(r <= 5.0, "t = {t}: ratio {r}");
    }
}

#[test]
fn envelope_is_dominated_by_the_core() {
    let full = zeta_envelope(0.0, 8.0).unwrap();
    let core = zeta_envelope(0.0, 3.0).unwrap();
    assert!(full.value > 0.0);
    assert!(core.value > 0.95 * full.value);
    assert!(full.value - core.value <= core.remainder);
}

#[test]
fn h_and_epstein_at_zero() {
    assert_eq!(eval_h(1024, 0.0).unwrap(), Complex64::new(1024.0, 0.0));
    assert_eq!(eval_epstein_sum(0.5, 16, 0.0).unwrap().re, 256.0);
    let e = EpsteinSum::new(1.0, 16).unwrap();
    assert_eq!(e.term_count(), 256);
}

#[test]
fn mean_square_examples() {
    let p = DirichletPoly::rademacher(256, 512, 17).unwrap();
    let energy = p.coeff_energy();
    let t = 2048.0;
    let m = mean_square(&p, t, resolving_spacing(&p)).unwrap();
    assert!(m <= 10.0 * (256.0 + t) * energy);
    assert!(m >= 0.01 * t * energy);

    let e = EpsteinSum::new(1.0, 16).unwrap();
    let t = 2.0 * 256.0;
    let m = mean_square(&e, t, resolving_spacing(&e)).unwrap();
    assert!(m <= 10.0 * (256.0 + t) * 256.0);
}

#[test]
fn rademacher_mean_square_is_diagonal() {
    let (lo, hi) = (64u64, 128u64);
    let t = 10.0 * lo as f64;
    let mut acc = 0.0;
    for seed in 0..32 {
        let p = DirichletPoly::rademacher(lo, hi, seed).unwrap();
        acc += mean_square(&p, t, resolving_spacing(&p)).unwrap() / (2.0 * t * p.coeff_energy());
    }
    let r = acc / 32.0;
    assert!((0.25..=4.0).contains(&r), "{r}");
}

#[test]
fn level_measure_converges_under_refinement() {
    let p = DirichletPoly::rademacher(128, 256, 2).unwrap();
    let range = Interval::new(100.0, 400.0);
    let dt = std::f64::consts::PI / (8.0 * 255f64.ln());
    let th = [6.0, 12.0, 18.0];
    let a = level_set_stats(&p, range, dt, &th).unwrap();
    let b = level_set_stats(&p, range, dt / 2.0, &th).unwrap();
    for (x, y) in a.iter().zip(&b) {
        if y.grid_measure > 1.0 {
            assert!((x.grid_measure - y.grid_measure).abs() < 0.05 * y.grid_measure);
        }
    }
}

#[test]
fn spectral_alpha3_cache_reuse() {
    let w = WindowSpec::default();
    let p = FormParams::new(1.0, 0.7, 0.0, 24).unwrap();
    let grid = SpectralGrid::for_params(&p, &w, 32.0).unwrap();
    let samples = SpectralProblem::new(&p, &w).unwrap().samples(&grid);
    for a3 in [0.61, 0.83] {
        let q = FormParams { alpha3: a3, ..p };
        let cached = integrate_samples(&samples, ln_dd(a3), 32.0).unwrap();
        let full = smoothed_count_spectral(&q, &w, &grid).unwrap();
        assert!((cached - full).abs() <= 1e-10 * full.abs().max(1.0));
    }
    let zeroed: Vec<_> = samples
        .iter()
        .map(|s| opplab_core::spectral::SpectrumSample {
            f2: Complex64::new(0.0, 0.0),
            ..*s
        })
        .collect();
    assert_eq!(integrate_samples(&zeroed, ln_dd(0.7), 32.0).unwrap(), 0.0);
}

#[test]
fn spectral_identity_and_main_term_order() {
    let w = WindowSpec::default();
    let p = FormParams::new(1.0, 0.7, 0.0, 32).unwrap();
    let grid = SpectralGrid::for_params(&p, &w, 64.0).unwrap();
    let s = smoothed_count_spectral(&p, &w, &grid).unwrap();
    let d = smoothed_count_direct(&p, &w, 64.0).unwrap();
    assert!((s - d).abs() <= 0.01 * d);
    let split = split_main_oscillatory(&p, &w, 64.0, 32f64.sqrt()).unwrap();
    let r = split.main / (32f64.powi(3) / 64.0);
    assert!((0.01..=100.0).contains(&r), "{r}");
    assert!((split.main + split.osc - s).abs() <= 1e-8 * s.abs());
}

#[test]
fn pole_term_decays() {
    let w = WindowSpec::default();
    let n = 4096u32;
    for k in 0..=20 {
        let t = 40.0 + 2.0 * k as f64;
        assert!(
            pole_term(&w, n, t).unwrap().norm() < (n as f64).sqrt(),
            "t = {t}"
        );
    }
}

#[test]
fn pole_term_tracks_f2_near_zero() {
    let w = WindowSpec::default();
    for n in [256u32, 1024] {
        for k in 0..=8 {
            let t = -2.0 + 0.5 * k as f64;
            let d = (eval_f2(&w, n, t).unwrap() - pole_term(&w, n, t).unwrap()).norm();
            assert!(d <= 10.0 * (n as f64).sqrt(), "n = {n}, t = {t}: {d}");
        }
    }
}

#[test]
fn alpha2_average_refinement_is_stable() {
    let w = WindowSpec::default();
    let p = FormParams::new(1.0, 0.7, 0.0, 32).unwrap();
    let t = 1024.0;
    let iv = Interval::new(0.5, 1.0);
    let a = average_f1_over_alpha2(&alpha_grid(iv, 256, None), &p, &w, t).unwrap();
    let b = average_f1_over_alpha2(&alpha_grid(iv, 512, None), &p, &w, t).unwrap();
    assert!((a - b).abs() < 0.1 * b, "{a} vs {b}");
}
