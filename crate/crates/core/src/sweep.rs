//! Parameter sweeps over `α₃` (and `α₂`), exceptional-set fractions,
//! decay-exponent fits and the `α₂`-average of `|F₁|²`.

use crate::error::{Error, Result};
use crate::forms::FormParams;
use crate::numeric::{fmt17, linear_fit, neumaier_sum};
use crate::search::{delta_count_sharp, two_pointer_min};
use crate::spectral::SpectralProblem;
use crate::windows::{Interval, WindowSpec};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaAxis {
    Alpha3,
    Alpha2,
    /// Full product grid, `α₂` outer.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepPlan {
    pub alpha_axis: AlphaAxis,
    pub interval: Interval,
    pub grid_points: usize,
    pub jitter: bool,
    /// `δ(N) = delta · N^delta_exponent`.
    pub delta: f64,
    pub delta_exponent: f64,
    pub xi: f64,
    /// Value of whichever coefficient is not swept.
    pub alpha2: f64,
    pub alpha3: f64,
    /// Points appended to the swept axis after the grid (controls).
    pub extra_points: Vec<f64>,
    pub n_values: Vec<u32>,
    pub seed: u64,
    /// Compute `count_delta` (one sharp δ-count per record).
    pub count: bool,
    /// Denominator bound for `cf_flag`.
    pub cf_q_max: u64,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            alpha_axis: AlphaAxis::Alpha3,
            interval: Interval::new(0.5, 1.0),
            grid_points: 512,
            jitter: true,
            delta: 1.0,
            delta_exponent: -0.5,
            xi: 0.0,
            alpha2: 1.0,
            alpha3: 0.5f64.sqrt(),
            extra_points: Vec::new(),
            n_values: (6..=13).map(|k| 1 << k).collect(),
            seed: 0,
            count: true,
            cf_q_max: 1000,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        let iv = self.interval;
        if !(iv.lo.is_finite() && iv.hi.is_finite() && 0.0 < iv.lo && iv.lo < iv.hi) {
            return Err(Error::invalid("interval", "need 0 < lo < hi"));
        }
        if self.grid_points == 0 {
            return Err(Error::invalid(
                "grid_points",
                "grid_points must be positive",
            ));
        }
        if !(self.delta.is_finite() && self.delta > 0.0 && self.delta_exponent.is_finite()) {
            return Err(Error::invalid("delta", "delta must be positive"));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("n_values", "n_values must be nonempty"));
        }
        if self.cf_q_max == 0 {
            return Err(Error::invalid("cf_q_max", "cf_q_max must be positive"));
        }
        if self
            .extra_points
            .iter()
            .any(|a| !(*a > 0.0 && a.is_finite()))
        {
            return Err(Error::invalid(
                "extra_points",
                "coefficients must be positive",
            ));
        }
        for &n in &self.n_values {
            FormParams::new(self.alpha2, self.alpha3, self.xi, n)?;
        }
        Ok(())
    }

    pub fn delta_for(&self, n: u32) -> f64 {
        self.delta * (n as f64).powf(self.delta_exponent)
    }

    /// The swept axis: jittered grid followed by the extra points.
    pub fn axis_points(&self, axis_stream: u64) -> Vec<f64> {
        let mut v = alpha_grid(
            self.interval,
            self.grid_points,
            self.jitter.then_some((self.seed, axis_stream)),
        );
        v.extend_from_slice(&self.extra_points);
        v
    }

    /// `(α₂, α₃)` pairs in output order.
    pub fn alpha_pairs(&self) -> Vec<(f64, f64)> {
        match self.alpha_axis {
            AlphaAxis::Alpha3 => self
                .axis_points(1)
                .into_iter()
                .map(|a| (self.alpha2, a))
                .collect(),
            AlphaAxis::Alpha2 => self
                .axis_points(0)
                .into_iter()
                .map(|a| (a, self.alpha3))
                .collect(),
            AlphaAxis::Both => {
                let a3 = self.axis_points(1);
                self.axis_points(0)
                    .into_iter()
                    .flat_map(|a2| a3.iter().map(move |&a3| (a2, a3)))
                    .collect()
            }
        }
    }
}

/// Midpoints `lo + (k + ½) h`, optionally shifted by `U(−h/2, h/2)` (open) drawn
/// from ChaCha stream `(axis << 32) | k` of `seed`.
pub fn alpha_grid(interval: Interval, points: usize, jitter: Option<(u64, u64)>) -> Vec<f64> {
    let h = interval.len() / points as f64;
    (0..points)
        .map(|k| {
            let mid = interval.lo + (k as f64 + 0.5) * h;
            match jitter {
                None => mid,
                Some((seed, axis)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((axis << 32) | k as u64);
                    let u: f64 = rng.sample(Open01);
                    mid + (u - 0.5) * h
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha2: f64,
    pub alpha3: f64,
    pub n: u32,
    pub min_abs: f64,
    pub count_delta: Option<u64>,
    pub exceptional: bool,
    pub cf_flag: u64,
}

/// One record per `(α point, N)`, ordered by α index then N index.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    let pairs = plan.alpha_pairs();
    let jobs: Vec<(f64, f64, u32)> = pairs
        .iter()
        .flat_map(|&(a2, a3)| plan.n_values.iter().map(move |&n| (a2, a3, n)))
        .collect();
    jobs.into_par_iter()
        .map(|(alpha2, alpha3, n)| {
            let params = FormParams::new(alpha2, alpha3, plan.xi, n)?;
            let delta = plan.delta_for(n);
            let min_abs = two_pointer_min(&params)?.witness.abs_value;
            let count_delta = if plan.count {
                Some(delta_count_sharp(&params, delta)?)
            } else {
                None
            };
            let flagged = match plan.alpha_axis {
                AlphaAxis::Alpha2 => alpha2,
                _ => alpha3,
            };
            Ok(SweepRecord {
                alpha2,
                alpha3,
                n,
                min_abs,
                count_delta,
                exceptional: min_abs >= delta,
                cf_flag: flag_near_rational(flagged, plan.cf_q_max)?,
            })
        })
        .collect()
}

fn single_n(records: &[SweepRecord]) -> Result<u32> {
    let ns: std::collections::BTreeSet<u32> = records.iter().map(|r| r.n).collect();
    match ns.len() {
        1 => Ok(*ns.iter().next().expect("one element")),
        0 => Err(Error::invalid("records", "no records")),
        _ => Err(Error::MixedN(ns.into_iter().collect())),
    }
}

/// `|interval| · #{min_abs ≥ δ} / #records` for records sharing one `N`.
pub fn exceptional_fraction(
    records: &[SweepRecord],
    delta: f64,
    interval: Interval,
) -> Result<f64> {
    single_n(records)?;
    let bad = records.iter().filter(|r| r.min_abs >= delta).count();
    Ok(interval.len() * bad as f64 / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    Median,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_values: Vec<u32>,
    pub statistic: Statistic,
    /// `log₂ stat − (intercept + slope log₂ N)` per N.
    pub residuals: Vec<f64>,
}

impl ExponentFit {
    /// Sanity bound on measured decay exponents.
    pub fn is_sane(&self) -> bool {
        self.slope.abs() <= 3.0
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// OLS of `log₂ stat(min_abs)` against `log₂ N` across the record groups.
pub fn fit_exponent(records: &[SweepRecord], statistic: Statistic) -> Result<ExponentFit> {
    let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n).or_default().push(r.min_abs);
    }
    let n_values: Vec<u32> = groups.keys().copied().collect();
    let span = match (n_values.first(), n_values.last()) {
        (Some(&a), Some(&b)) => b as f64 / a as f64,
        _ => 0.0,
    };
    if n_values.len() < 4 || span < 4.0 {
        return Err(Error::InsufficientRange(n_values));
    }
    let mut x = Vec::with_capacity(groups.len());
    let mut y = Vec::with_capacity(groups.len());
    for (&n, vals) in &groups {
        let s = match statistic {
            Statistic::Median => median(vals.clone()),
            Statistic::Mean => neumaier_sum(vals.iter().copied()) / vals.len() as f64,
        };
        if !(s > 0.0) {
            return Err(Error::invalid(
                "records",
                format!("statistic of min_abs at n = {n} is not positive"),
            ));
        }
        x.push((n as f64).log2());
        y.push(s.log2());
    }
    let fit = linear_fit(&x, &y);
    let residuals = x
        .iter()
        .zip(&y)
        .map(|(x, y)| y - (fit.intercept + fit.slope * x))
        .collect();
    Ok(ExponentFit {
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: fit.stderr,
        n_values,
        statistic,
        residuals,
    })
}

/// Mean of `|F₁(t)|²` over `α₂ ∈ alpha2_grid`, with `ξ = 0`.
pub fn average_f1_over_alpha2(
    alpha2_grid: &[f64],
    template: &FormParams,
    windows: &WindowSpec,
    t: f64,
) -> Result<f64> {
    if template.xi != 0.0 {
        return Err(Error::invalid(
            "xi",
            "the alpha2 average is taken at xi = 0",
        ));
    }
    if t == 0.0 || !t.is_finite() {
        return Err(Error::invalid("t", "t must be finite and nonzero"));
    }
    if alpha2_grid.is_empty() {
        return Err(Error::invalid(
            "alpha2_grid",
            "alpha2_grid must be nonempty",
        ));
    }
    let vals = alpha2_grid
        .par_iter()
        .map(|&a2| {
            let p = FormParams {
                alpha2: a2,
                ..*template
            };
            Ok(SpectralProblem::new(&p, windows)?.f1(t).norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(neumaier_sum(vals.iter().copied()) / vals.len() as f64)
}

/// Smallest `q ≤ q_max` with `|α − p/q| < 1/(2 q q_max)` for some integer
/// `p`, or 0. Such `p/q` satisfies `|α − p/q| < 1/(2q²)`, so it is a
/// continued-fraction convergent; only convergents are examined.
pub fn flag_near_rational(alpha: f64, q_max: u64) -> Result<u64> {
    if q_max == 0 {
        return Err(Error::invalid("q_max", "q_max must be at least 1"));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha", "alpha must be finite"));
    }
    let qm = q_max as f64;
    let close = |p: f64, q: f64| (q.mul_add(alpha, -p)).abs() < 1.0 / (2.0 * qm);
    let (mut p0, mut q0, mut p1, mut q1) = (1.0f64, 0.0f64, alpha.floor(), 1.0f64);
    let mut x = alpha - alpha.floor();
    loop {
        if q1 > qm {
            return Ok(0);
        }
        if close(p1, q1) {
            return Ok(q1 as u64);
        }
        if x == 0.0 {
            return Ok(0);
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        x = inv - a;
        (p0, q0, p1, q1) = (p1, q1, a.mul_add(p1, p0), a.mul_add(q1, q0));
    }
}

/// CSV `alpha2,alpha3,n,min_abs,count_delta,exceptional,cf_flag`.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "alpha2,alpha3,n,min_abs,count_delta,exceptional,cf_flag"
    )?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(r.alpha2),
            fmt17(r.alpha3),
            r.n,
            fmt17(r.min_abs),
            r.count_delta.map(|c| c.to_string()).unwrap_or_default(),
            u8::from(r.exceptional),
            r.cf_flag
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionRow {
    pub n: u32,
    pub delta: f64,
    pub fraction: f64,
}

/// Exceptional fractions per N at the plan's `δ(N)`.
pub fn fractions_by_n(plan: &SweepPlan, records: &[SweepRecord]) -> Result<Vec<FractionRow>> {
    let mut groups: BTreeMap<u32, Vec<SweepRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n).or_default().push(*r);
    }
    groups
        .into_iter()
        .map(|(n, rs)| {
            let delta = plan.delta_for(n);
            Ok(FractionRow {
                n,
                delta,
                fraction: exceptional_fraction(&rs, delta, plan.interval)?,
            })
        })
        .collect()
}

/// gnuplot script for `log₂ N` against `log₂ min_abs` from a sweep CSV.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set logscale xy 2\n\
         set xlabel 'N'\n\
         set ylabel 'min |Q(x)|'\n\
         plot '{csv_path}' using 3:4 every ::1 with points title 'records'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: u32, min_abs: f64) -> SweepRecord {
        SweepRecord {
            alpha2: 1.0,
            alpha3: 0.7,
            n,
            min_abs,
            count_delta: None,
            exceptional: false,
            cf_flag: 0,
        }
    }

    #[test]
    fn grid_points_stay_in_cells() {
        let iv = Interval::new(0.5, 1.0);
        let h = 0.5 / 64.0;
        let plain = alpha_grid(iv, 64, None);
        let jit = alpha_grid(iv, 64, Some((9, 1)));
        for (k, (a, b)) in plain.iter().zip(&jit).enumerate() {
            assert!(iv.lo < *a && *a < iv.hi);
            assert!((a - b).abs() <= 0.5 * h);
            assert!((a - (0.5 + (k as f64 + 0.5) * h)).abs() < 1e-15);
        }
        assert_eq!(jit, alpha_grid(iv, 64, Some((9, 1))));
        assert_ne!(jit, alpha_grid(iv, 64, Some((10, 1))));
    }

    #[test]
    fn flag_examples() {
        assert_eq!(flag_near_rational(0.75, 10).unwrap(), 4);
        assert_eq!(flag_near_rational(2.0 / 3.0 + 1e-12, 1000).unwrap(), 3);
        assert_eq!(flag_near_rational(0.5, 1).unwrap(), 0);
        assert_eq!(flag_near_rational(3.0, 1).unwrap(), 1);
        assert!(flag_near_rational(0.5, 0).is_err());
    }

    #[test]
    fn synthetic_power_laws() {
        let recs: Vec<_> = (4..10)
            .map(|k| rec(1 << k, 1.0 / (1 << k) as f64))
            .collect();
        let f = fit_exponent(&recs, Statistic::Median).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
        assert!(f.is_sane());
        let ctrl: Vec<_> = (4..10).map(|k| rec(1 << k, 1.0)).collect();
        assert_eq!(fit_exponent(&ctrl, Statistic::Mean).unwrap().slope, 0.0);
        let short: Vec<_> = (4..7).map(|k| rec(1 << k, 1.0)).collect();
        assert!(matches!(
            fit_exponent(&short, Statistic::Median),
            Err(Error::InsufficientRange(_))
        ));
    }

    #[test]
    fn fraction_examples() {
        let iv = Interval::new(0.5, 1.0);
        let all: Vec<_> = (0..8).map(|_| rec(64, 2.0)).collect();
        assert_eq!(exceptional_fraction(&all, 1.0, iv).unwrap(), 0.5);
        assert_eq!(exceptional_fraction(&all, 3.0, iv).unwrap(), 0.0);
        let mixed = vec![rec(64, 1.0), rec(128, 1.0)];
        assert!(matches!(
            exceptional_fraction(&mixed, 1.0, iv),
            Err(Error::MixedN(_))
        ));
    }

    #[test]
    fn sweep_control_and_large_delta() {
        let plan = SweepPlan {
            grid_points: 8,
            delta: 10.0,
            delta_exponent: 0.0,
            extra_points: vec![3.0],
            n_values: vec![8, 16],
            ..SweepPlan::default()
        };
        let recs = run_sweep(&plan).unwrap();
        assert_eq!(recs.len(), 18);
        let ctrl: Vec<_> = recs.iter().filter(|r| r.alpha3 == 3.0).collect();
        assert_eq!(ctrl.len(), 2);
        for r in &recs {
            assert_eq!(r.exceptional, r.min_abs >= 10.0);
            assert!(r.count_delta.unwrap() >= 1);
        }
        assert!(recs
            .iter()
            .filter(|r| r.alpha3 != 3.0)
            .all(|r| !r.exceptional));
        let strict = SweepPlan { delta: 0.9, ..plan };
        for r in run_sweep(&strict)
            .unwrap()
            .iter()
            .filter(|r| r.alpha3 == 3.0)
        {
            assert!(r.exceptional);
        }
    }

    #[test]
    fn alpha2_average_rejects_bad_inputs() {
        let w = WindowSpec::default();
        let p = FormParams::new(1.0, 0.7, 0.0, 16).unwrap();
        assert!(average_f1_over_alpha2(&[0.6], &p, &w, 0.0).is_err());
        let shifted = FormParams { xi: 1.0, ..p };
        assert!(average_f1_over_alpha2(&[0.6], &shifted, &w, 5.0).is_err());
        let grid = alpha_grid(Interval::new(0.5, 1.0), 16, None);
        let avg = average_f1_over_alpha2(&grid, &p, &w, 256.0).unwrap();
        let min = grid
            .iter()
            .map(|&a| {
                let q = FormParams { alpha2: a, ..p };
                SpectralProblem::new(&q, &w).unwrap().f1(256.0).norm_sqr()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(avg >= min);
    }

    #[test]
    fn csv_round_trips() {
        let mut r = rec(64, 0.1);
        r.count_delta = Some(12);
        let mut buf = Vec::new();
        write_sweep_csv(&[r, rec(64, 0.2)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(
            lines[0],
            "alpha2,alpha3,n,min_abs,count_delta,exceptional,cf_flag"
        );
        let f: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.1);
        assert_eq!(f[4], "12");
        assert_eq!(lines[2].split(',').nth(4), Some(""));
    }
}
