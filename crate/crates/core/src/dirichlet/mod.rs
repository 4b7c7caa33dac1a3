//! Dirichlet polynomials `S(t) = Σ aₙ n^{it}`, Epstein partial sums
//! `Σ (m² + α n²)^{it}`, their mean squares and level sets, and ζ on the
//! critical line.
//!
//! `n ∼ N` means the dyadic range `[N, 2N)`. Every evaluator is an
//! [`ExpSum`] in `ln n`, so phases follow the double-double reduction.

mod zeta;

pub use zeta::{zeta_critical_line, zeta_envelope, EnvelopeReport, ZETA_T_CAP};

use crate::error::{Error, Result};
use crate::numeric::{fmt17, ln_dd, Dd, ExpSum, Neumaier};
use crate::windows::{Interval, WindowSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{self, Write};

/// Anything sampled on a uniform `t`-grid.
pub trait Evaluator {
    fn eval_grid(&self, t0: f64, dt: f64, count: usize) -> Vec<Complex64>;
    /// Largest `|λ|` among the frequencies; sets the resolving spacing.
    fn max_frequency(&self) -> f64;
}

impl Evaluator for ExpSum {
    fn eval_grid(&self, t0: f64, dt: f64, count: usize) -> Vec<Complex64> {
        ExpSum::eval_grid(self, t0, dt, count)
    }

    fn max_frequency(&self) -> f64 {
        self.max_abs_freq()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPoly {
    pub n_lo: u64,
    /// Exclusive.
    pub n_hi: u64,
    pub coeffs: Vec<Complex64>,
}

/// Coefficient bound `|aₙ| ≤ 1` up to rounding.
pub const COEFF_BOUND: f64 = 1.0 + 1e-12;

impl DirichletPoly {
    pub fn new(n_lo: u64, n_hi: u64, coeffs: Vec<Complex64>) -> Result<Self> {
        let p = Self { n_lo, n_hi, coeffs };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lo < 1 || self.n_hi <= self.n_lo {
            return Err(Error::invalid("n_hi", "need 1 <= n_lo < n_hi"));
        }
        if self.coeffs.len() as u64 != self.n_hi - self.n_lo {
            return Err(Error::invalid(
                "coeffs",
                "one coefficient per n in [n_lo, n_hi)",
            ));
        }
        if self.coeffs.iter().any(|a| !(a.norm() <= COEFF_BOUND)) {
            return Err(Error::invalid(
                "coeffs",
                "coefficients must satisfy |a_n| <= 1",
            ));
        }
        Ok(())
    }

    /// `aₙ ≡ 1` on `[N, 2N)`.
    pub fn ones(n: u64) -> Result<Self> {
        Self::new(n, 2 * n, vec![Complex64::new(1.0, 0.0); n as usize])
    }

    /// The single term `n0^{it}`.
    pub fn single(n0: u64) -> Result<Self> {
        Self::new(n0, n0 + 1, vec![Complex64::new(1.0, 0.0)])
    }

    /// Independent ±1 coefficients drawn from a seeded ChaCha stream.
    pub fn rademacher(n_lo: u64, n_hi: u64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (n_lo..n_hi)
            .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Self::new(n_lo, n_hi, coeffs)
    }

    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_expsum(&self) -> ExpSum {
        let mut s = ExpSum::with_capacity(self.coeffs.len());
        for (n, &a) in (self.n_lo..self.n_hi).zip(&self.coeffs) {
            s.push(ln_dd(n as f64), a);
        }
        s
    }
}

impl Evaluator for DirichletPoly {
    fn eval_grid(&self, t0: f64, dt: f64, count: usize) -> Vec<Complex64> {
        self.to_expsum().eval_grid(t0, dt, count)
    }

    fn max_frequency(&self) -> f64 {
        ((self.n_hi - 1) as f64).ln()
    }
}

pub fn eval_s(poly: &DirichletPoly, t: f64) -> Result<Complex64> {
    poly.validate()?;
    Ok(poly.to_expsum().eval(t))
}

/// `H_N(t) = Σ_{N ≤ n < 2N} n^{it}`.
pub fn eval_h(n: u64, t: f64) -> Result<Complex64> {
    if n < 1 {
        return Err(Error::invalid("n", "N must be positive"));
    }
    eval_s(&DirichletPoly::ones(n)?, t)
}

/// `Σ_{m,n ∈ [N, 2N)} (m² + α n²)^{it}` as an exponential sum.
#[derive(Debug, Clone)]
pub struct EpsteinSum {
    pub alpha: f64,
    pub n: u64,
    sum: ExpSum,
}

impl EpsteinSum {
    pub fn new(alpha: f64, n: u64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", "alpha must be positive"));
        }
        if n < 4 {
            return Err(Error::invalid("n", "N must be at least 4"));
        }
        let mut sum = ExpSum::with_capacity((n * n) as usize);
        let one = Complex64::new(1.0, 0.0);
        for m in n..2 * n {
            for k in n..2 * n {
                let (bh, bl) = crate::numeric::dd::two_prod(alpha, (k * k) as f64);
                let v = Dd::from_f64((m * m) as f64) + Dd { hi: bh, lo: bl };
                sum.push(v.ln(), one);
            }
        }
        Ok(Self { alpha, n, sum })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.sum.eval(t)
    }

    pub fn term_count(&self) -> usize {
        self.sum.len()
    }
}

impl Evaluator for EpsteinSum {
    fn eval_grid(&self, t0: f64, dt: f64, count: usize) -> Vec<Complex64> {
        self.sum.eval_grid(t0, dt, count)
    }

    fn max_frequency(&self) -> f64 {
        self.sum.max_abs_freq()
    }
}

pub fn eval_epstein_sum(alpha: f64, n: u64, t: f64) -> Result<Complex64> {
    Ok(EpsteinSum::new(alpha, n)?.eval(t))
}

/// `F₂(t)²` for the window `w₁`, a Dirichlet polynomial over `n ∼ N²`.
#[derive(Debug, Clone)]
pub struct F2Squared {
    f2: ExpSum,
}

impl F2Squared {
    pub fn new(windows: &WindowSpec, n: u32) -> Result<Self> {
        windows.validate()?;
        if n < 4 {
            return Err(Error::invalid("n", "N must be at least 4"));
        }
        let nf = n as f64;
        let mut f2 = ExpSum::new();
        for k in 1..=n as u64 {
            let w = windows.eval_w1(k as f64 / nf);
            if w > 0.0 {
                f2.push(ln_dd(k as f64), Complex64::new(w, 0.0));
            }
        }
        Ok(Self { f2 })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let z = self.f2.eval(t);
        z * z
    }
}

impl Evaluator for F2Squared {
    fn eval_grid(&self, t0: f64, dt: f64, count: usize) -> Vec<Complex64> {
        let mut v = self.f2.eval_grid(t0, dt, count);
        for z in &mut v {
            *z = *z * *z;
        }
        v
    }

    fn max_frequency(&self) -> f64 {
        2.0 * self.f2.max_abs_freq()
    }
}

/// Spacing `π / (4 λ_max)` that resolves the fastest oscillation.
pub fn resolving_spacing<E: Evaluator + ?Sized>(e: &E) -> f64 {
    PI / (4.0 * e.max_frequency().max(1.0))
}

/// Trapezoid estimate of `∫_{|t|<T} |S(t)|² dt` with spacing at most `dt`.
pub fn mean_square<E: Evaluator + ?Sized>(e: &E, t_half: f64, dt: f64) -> Result<f64> {
    if !(t_half.is_finite() && t_half > 0.0) {
        return Err(Error::invalid("t_half", "T must be positive"));
    }
    if !(dt > 0.0 && dt <= resolving_spacing(e) * (1.0 + 1e-12)) {
        return Err(Error::invalid(
            "dt",
            "dt must resolve the fastest oscillation: dt <= pi / (4 ln n_hi)",
        ));
    }
    let cells = (2.0 * t_half / dt).ceil() as usize;
    let h = 2.0 * t_half / cells as f64;
    let vals = e.eval_grid(-t_half, h, cells + 1);
    let mut acc = Neumaier::new();
    for (k, z) in vals.iter().enumerate() {
        let w = if k == 0 || k == cells { 0.5 } else { 1.0 };
        acc.add(w * z.norm_sqr());
    }
    Ok(h * acc.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub threshold: f64,
    /// `dt` times the number of cells whose midpoint exceeds the threshold.
    pub grid_measure: f64,
    /// Greedy left-to-right 1-separated representatives.
    pub separated_count: u64,
    /// Maximal runs of consecutive exceeding cells.
    pub components: u64,
    pub t_range: Interval,
    pub dt: f64,
}

/// Cell midpoints `lo + (k + ½) dt`, `k < ⌊len/dt⌋`.
fn midpoint_count(range: &Interval, dt: f64) -> Result<usize> {
    if !(range.hi > range.lo) {
        return Err(Error::invalid(
            "t_range",
            "t_range must have positive length",
        ));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= range.len()) {
        return Err(Error::invalid("dt", "dt must lie in (0, |t_range|]"));
    }
    Ok((range.len() / dt).floor() as usize)
}

/// `|S|` at the cell midpoints of `t_range`.
pub fn sample_abs<E: Evaluator + ?Sized>(e: &E, t_range: Interval, dt: f64) -> Result<Vec<f64>> {
    let count = midpoint_count(&t_range, dt)?;
    Ok(e.eval_grid(t_range.lo + 0.5 * dt, dt, count)
        .into_iter()
        .map(|z| z.norm())
        .collect())
}

/// Level-set statistics of sampled magnitudes on the midpoint grid.
pub fn level_sets_from_samples(
    abs: &[f64],
    t_range: Interval,
    dt: f64,
    thresholds: &[f64],
) -> Result<Vec<LevelSetReport>> {
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid(
            "thresholds",
            "thresholds must be sorted ascending",
        ));
    }
    if thresholds.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("thresholds", "thresholds must be positive"));
    }
    Ok(thresholds
        .iter()
        .map(|&v| {
            let mut hits = 0u64;
            let mut r = 0u64;
            let mut comps = 0u64;
            let mut last: Option<f64> = None;
            let mut prev_hit = false;
            for (k, &a) in abs.iter().enumerate() {
                let hit = a > v;
                if hit {
                    hits += 1;
                    let t = t_range.lo + (k as f64 + 0.5) * dt;
                    if last.is_none_or(|l| t - l >= 1.0) {
                        r += 1;
                        last = Some(t);
                    }
                    if !prev_hit {
                        comps += 1;
                    }
                }
                prev_hit = hit;
            }
            LevelSetReport {
                threshold: v,
                grid_measure: hits as f64 * dt,
                separated_count: r,
                components: comps,
                t_range,
                dt,
            }
        })
        .collect())
}

pub fn level_set_stats<E: Evaluator + ?Sized>(
    e: &E,
    t_range: Interval,
    dt: f64,
    thresholds: &[f64],
) -> Result<Vec<LevelSetReport>> {
    let abs = sample_abs(e, t_range, dt)?;
    level_sets_from_samples(&abs, t_range, dt, thresholds)
}

/// CSV `t,abs,above_<k>...` with one 0/1 flag per threshold.
pub fn write_scan_csv<W: Write>(
    abs: &[f64],
    t_range: Interval,
    dt: f64,
    thresholds: &[f64],
    mut out: W,
) -> io::Result<()> {
    write!(out, "t,abs")?;
    for k in 0..thresholds.len() {
        write!(out, ",above_{k}")?;
    }
    writeln!(out)?;
    for (k, &a) in abs.iter().enumerate() {
        write!(
            out,
            "{},{}",
            fmt17(t_range.lo + (k as f64 + 0.5) * dt),
            fmt17(a)
        )?;
        for &v in thresholds {
            write!(out, ",{}", u8::from(a > v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// CSV `threshold,grid_measure,separated_count,components,t_lo,t_hi,dt`.
pub fn write_level_csv<W: Write>(reports: &[LevelSetReport], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "threshold,grid_measure,separated_count,components,t_lo,t_hi,dt"
    )?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(r.threshold),
            fmt17(r.grid_measure),
            r.separated_count,
            r.components,
            fmt17(r.t_range.lo),
            fmt17(r.t_range.hi),
            fmt17(r.dt)
        )?;
    }
    Ok(())
}

/// Log-spaced points `lo · (hi/lo)^{k/(count−1)}`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let r = (hi / lo).ln() / (count - 1) as f64;
            let mut g: Vec<f64> = (0..count).map(|k| lo * (r * k as f64).exp()).collect();
            g[count - 1] = hi;
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_validation() {
        let one = Complex64::new(1.0, 0.0);
        assert!(DirichletPoly::new(0, 3, vec![one; 3]).is_err());
        assert!(DirichletPoly::new(2, 4, vec![one; 3]).is_err());
        assert!(DirichletPoly::new(2, 3, vec![Complex64::new(1.0, 0.1)]).is_err());
        assert!(DirichletPoly::new(2, 3, vec![Complex64::from_polar(1.0, 0.3)]).is_ok());
    }

    #[test]
    fn s_examples() {
        let p = DirichletPoly::ones(100).unwrap();
        assert_eq!(eval_s(&p, 0.0).unwrap(), Complex64::new(100.0, 0.0));
        let r = DirichletPoly::rademacher(50, 100, 7).unwrap();
        let bound: f64 = r.coeffs.iter().map(|a| a.norm()).sum();
        for t in [1.0, 17.5, 1e3, 1e6] {
            assert!(eval_s(&r, t).unwrap().norm() <= bound + 1e-9);
        }
        let s = eval_s(&DirichletPoly::ones(1000).unwrap(), 1e6)
            .unwrap()
            .norm();
        assert!(s <= 10.0 * (1000.0 / 1e6 + 1e3));
    }

    #[test]
    fn h_examples() {
        assert_eq!(eval_h(64, 0.0).unwrap().re, 64.0);
        for t in [3.0, 120.0, 5e4] {
            let (a, b) = (eval_h(64, t).unwrap(), eval_h(64, -t).unwrap());
            assert!((a.norm() - b.norm()).abs() < 1e-12 * 64.0);
        }
    }

    #[test]
    fn rademacher_is_seeded() {
        let a = DirichletPoly::rademacher(10, 40, 3).unwrap();
        assert_eq!(a, DirichletPoly::rademacher(10, 40, 3).unwrap());
        assert_ne!(a, DirichletPoly::rademacher(10, 40, 4).unwrap());
    }

    #[test]
    fn epstein_examples() {
        let e = EpsteinSum::new(0.5, 8).unwrap();
        assert_eq!(e.eval(0.0).re, 64.0);
        let (a, b) = (e.eval(91.0), e.eval(-91.0));
        assert!((a - b.conj()).norm() < 1e-12 * 64.0);
        assert!(EpsteinSum::new(0.5, 3).is_err());
        assert!(EpsteinSum::new(-1.0, 8).is_err());
    }

    #[test]
    fn single_term_mean_square_is_2t() {
        let p = DirichletPoly::single(37).unwrap();
        let dt = resolving_spacing(&p);
        let m = mean_square(&p, 100.0, dt).unwrap();
        assert!((m - 200.0).abs() < 1e-10);
        assert!(mean_square(&p, 100.0, 2.0 * dt).is_err());
    }

    #[test]
    fn level_sets_nest_and_vanish_above_sup() {
        let p = DirichletPoly::rademacher(64, 128, 11).unwrap();
        let range = Interval::new(0.0, 200.0);
        let dt = resolving_spacing(&p);
        let abs = sample_abs(&p, range, dt).unwrap();
        let sup = abs.iter().cloned().fold(0.0, f64::max);
        let th = [0.1 * sup, 0.3 * sup, 0.6 * sup, 0.9 * sup, sup * 1.0001];
        let reps = level_sets_from_samples(&abs, range, dt, &th).unwrap();
        for w in reps.windows(2) {
            assert!(w[0].grid_measure >= w[1].grid_measure);
        }
        let last = reps.last().unwrap();
        assert_eq!((last.grid_measure, last.separated_count), (0.0, 0));
        for r in &reps {
            assert!(r.grid_measure <= range.len());
            assert!(r.separated_count as f64 <= r.grid_measure + r.components as f64);
        }
        assert!(level_sets_from_samples(&abs, range, dt, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn scan_csv_flags() {
        let mut buf = Vec::new();
        write_scan_csv(&[0.5, 2.0], Interval::new(0.0, 2.0), 1.0, &[1.0], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,abs,above_0");
        assert!(lines[1].ends_with(",0") && lines[2].ends_with(",1"));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(10.0, 1e7, 7);
        assert_eq!(g.len(), 7);
        assert_eq!((g[0], g[6]), (10.0, 1e7));
    }
}
