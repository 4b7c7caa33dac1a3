//! Sweep-level behaviour on recorded batteries.

use opplab_core::search::{two_pointer_min, xi_grid};
use opplab_core::sweep::{
    exceptional_fraction, fit_exponent, run_sweep, write_sweep_csv, AlphaAxis, Statistic,
    SweepPlan, SweepRecord,
};
use opplab_core::windows::Interval;
use opplab_core::FormParams;

fn csv(records: &[SweepRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_sweep_csv(records, &mut buf).unwrap();
    buf
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn sweep_csv_is_identical_for_any_thread_count() {
    let plan = SweepPlan {
        alpha_axis: AlphaAxis::Both,
        grid_points: 6,
        n_values: vec![16, 40],
        seed: 99,
        ..SweepPlan::default()
    };
    let one = in_pool(1, || csv(&run_sweep(&plan).unwrap()));
    let four = in_pool(4, || csv(&run_sweep(&plan).unwrap()));
    assert_eq!(one, four);
    assert_eq!(one.iter().filter(|&&b| b == b'\n').count(), 1 + 36 * 2);
}

#[test]
fn anisotropic_control_is_always_exceptional() {
    let plan = SweepPlan {
        grid_points: 4,
        delta: 0.99,
        delta_exponent: 0.0,
        extra_points: vec![3.0],
        n_values: vec![8, 32, 128, 512],
        count: false,
        ..SweepPlan::default()
    };
    let recs = run_sweep(&plan).unwrap();
    let ctrl: Vec<_> = recs.iter().filter(|r| r.alpha3 == 3.0).collect();
    assert_eq!(ctrl.len(), 4);
    assert!(ctrl.iter().all(|r| r.exceptional && r.min_abs == 1.0));
    let fit = fit_exponent(
        &ctrl.into_iter().copied().collect::<Vec<_>>(),
        Statistic::Median,
    )
    .unwrap();
    assert_eq!(fit.slope, 0.0);
}

#[test]
fn fraction_does_not_grow_with_n_at_large_fixed_delta_n() {
    // δN = 20 sits in the δN ≫ 1 regime; at δN ≲ 10 the fraction drifts upward with N.
    let ns: Vec<u32> = (5..=12).map(|k| 1 << k).collect();
    let plan = SweepPlan {
        grid_points: 256,
        delta: 20.0,
        delta_exponent: -1.0,
        n_values: ns.clone(),
        count: false,
        ..SweepPlan::default()
    };
    let recs = run_sweep(&plan).unwrap();
    let fr: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let rs: Vec<_> = recs.iter().filter(|r| r.n == n).copied().collect();
            exceptional_fraction(&rs, plan.delta_for(n), plan.interval).unwrap()
        })
        .collect();
    let inversions = fr.windows(2).filter(|w| w[1] > w[0]).count();
    let allowed = 1 + (fr.len() - 1) / 10;
    assert!(inversions <= allowed, "{fr:?}");
}

#[test]
fn generic_fraction_is_small_at_root_delta() {
    // Reduced battery (64 points) of the N = 2¹², δ = N^{-1/2} check.
    let n = 4096u32;
    let plan = SweepPlan {
        grid_points: 64,
        n_values: vec![n],
        count: false,
        ..SweepPlan::default()
    };
    let recs = run_sweep(&plan).unwrap();
    let d = plan.delta_for(n);
    let f = exceptional_fraction(&recs, d, plan.interval).unwrap();
    assert!(f <= 10.0 * 2.0 / (d * n as f64), "{f}");
}

#[test]
fn density_pass_rate_is_monotone() {
    let alphas = opplab_core::sweep::alpha_grid(Interval::new(0.5, 1.0), 12, Some((4, 1)));
    let deltas = [0.002, 0.004, 0.008, 0.016, 0.032];
    let step = deltas[0];
    let xis = xi_grid(0.25, step);
    let worst = |n: u32, a3: f64| {
        xis.iter()
            .map(|&xi| {
                let p = FormParams::new(1.0, a3, xi, n).unwrap();
                two_pointer_min(&p).unwrap().witness.abs_value
            })
            .fold(0.0, f64::max)
    };
    let mut rates = Vec::new();
    for n in [32u32, 64, 128] {
        let w: Vec<f64> = alphas.iter().map(|&a| worst(n, a)).collect();
        let r: Vec<usize> = deltas
            .iter()
            .map(|d| w.iter().filter(|&&x| x < *d).count())
            .collect();
        assert!(r.windows(2).all(|p| p[0] <= p[1]), "n = {n}: {r:?}");
        rates.push(r);
    }
    for k in 0..deltas.len() {
        let col: Vec<usize> = rates.iter().map(|r| r[k]).collect();
        let inversions = col.windows(2).filter(|p| p[1] < p[0]).count();
        assert!(inversions <= 1, "delta {}: {col:?}", deltas[k]);
    }
}

#[test]
fn flagged_records_are_over_represented_among_exceptional() {
    let n = 256u32;
    let plan = SweepPlan {
        grid_points: 256,
        delta: 1.0,
        delta_exponent: -1.0,
        n_values: vec![n],
        count: false,
        cf_q_max: 16,
        ..SweepPlan::default()
    };
    let recs = run_sweep(&plan).unwrap();
    let rate = |flag: bool| {
        let g: Vec<_> = recs.iter().filter(|r| (r.cf_flag != 0) == flag).collect();
        g.iter().filter(|r| r.exceptional).count() as f64 / g.len().max(1) as f64
    };
    let (flagged, plain) = (rate(true), rate(false));
    assert!(recs.iter().any(|r| r.exceptional));
    assert!(flagged >= plain, "flagged {flagged} vs plain {plain}");
}
