//! The exponential sums
//!
//! ```text
//! F₁(t) = Σ_{x1,x2} w₁(x1/N) w₁(x2/N) e^{it ln(x1² + α2 x2² − ξ)}
//! F₂(t) = Σ_n w₁(n/N) e^{it ln n}
//! ```
//!
//! and the smoothed count
//! `Σ w₁w₁w₁ · w₂(T u)`, `u = ln(x1² + α2 x2² − ξ) − 2 ln x3 − ln α3`,
//! both as a direct triple sum and as the frequency integral
//! `(1/2πT) ∫ ŵ₂(t/T) F₁(t) conj(F₂(2t)) e^{−it ln α3} dt`.
//!
//! The integral is discretised by the trapezoid rule. Each term of the
//! integrand is `ŵ₂(t/T) e^{itu}`, whose Fourier transform is supported in
//! `|u| ≤ 2/T`; with `2π/dt > |u|_max + 2/T` the rule has no aliasing and
//! truncation at `t_max` is the only error.

use crate::error::{Error, Result};
use crate::forms::{scaled_square, FormParams};
use crate::numeric::{cis_phase, fmt17, ln_dd, ComplexNeumaier, Dd, ExpSum, Neumaier};
use crate::windows::{TransformTable, WindowSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::{Arc, Mutex};

/// Relative ŵ₂ tail mass left beyond `t_max`.
pub const TAIL_MASS: f64 = 1e-8;
/// Imaginary part tolerated in the spectral integral, relative to its scale.
pub const IMBALANCE_TOL: f64 = 1e-6;

/// ŵ₂ tables are expensive; keep one per window shape.
fn w2_table(windows: &WindowSpec) -> Result<Arc<TransformTable>> {
    static CACHE: Mutex<Vec<(WindowSpec, Arc<TransformTable>)>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, t)) = cache.iter().find(|(w, _)| w == windows) {
        return Ok(t.clone());
    }
    let t = Arc::new(windows.fourier_w2_table()?);
    cache.push((*windows, t.clone()));
    Ok(t)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralGrid {
    /// Smoothing scale `T`.
    pub t_scale: f64,
    pub t_max: f64,
    pub dt: f64,
    /// `(t, dt · ŵ₂(t/T))`, symmetric about 0.
    pub nodes: Vec<(f64, f64)>,
}

/// The spacing bound `π / (4 ln 2N²)`.
pub fn max_spacing(n: u32) -> f64 {
    let nf = n as f64;
    PI / (4.0 * (2.0 * nf * nf).ln())
}

impl SpectralGrid {
    /// Grid for scale `T` with spacing `dt` and `t_max = T · s_tail`, where
    /// `s_tail` cuts the ŵ₂ tail at [`TAIL_MASS`].
    pub fn with_spacing(t_scale: f64, dt: f64, windows: &WindowSpec) -> Result<Self> {
        if !(t_scale.is_finite() && t_scale > 0.0) {
            return Err(Error::invalid("t_scale", "T must be positive"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", "dt must be positive"));
        }
        let table = w2_table(windows)?;
        let half = (t_scale * table.tail_cutoff(TAIL_MASS) / dt).ceil() as usize;
        let nodes = (0..=2 * half)
            .map(|k| {
                let t = (k as f64 - half as f64) * dt;
                (t, dt * table.eval(t / t_scale).re)
            })
            .collect();
        Ok(Self {
            t_scale,
            t_max: half as f64 * dt,
            dt,
            nodes,
        })
    }

    /// Default grid for a problem: spacing [`max_spacing`], tightened
    /// further if `ln α3` pushes `|u|` towards the aliasing limit.
    pub fn for_params(params: &FormParams, windows: &WindowSpec, t_scale: f64) -> Result<Self> {
        params.validate()?;
        let dt = alias_free_spacing(params, windows, t_scale);
        Self::with_spacing(t_scale, dt, windows)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn t0(&self) -> f64 {
        self.nodes[0].0
    }

    pub fn validate(&self, n: u32, windows: &WindowSpec) -> Result<()> {
        if self.dt > max_spacing(n) {
            return Err(Error::invalid("dt", "dt must not exceed pi / (4 ln 2N^2)"));
        }
        let table = w2_table(windows)?;
        if self.t_max < self.t_scale * table.tail_cutoff(TAIL_MASS) - self.dt {
            return Err(Error::invalid(
                "t_max",
                "t_max leaves more than 1e-8 of the w2 transform mass",
            ));
        }
        Ok(())
    }
}

fn alias_free_spacing(params: &FormParams, windows: &WindowSpec, smallest_scale: f64) -> f64 {
    let nf = params.n_bound as f64;
    let lo_v = ((1.0 + params.alpha2) * (windows.w1_support.lo * nf).powi(2) - params.xi).max(1.0);
    let hi_v = ((1.0 + params.alpha2) * (windows.w1_support.hi * nf).powi(2) - params.xi).max(lo_v);
    let lo_x3 = (windows.w1_support.lo * nf).max(1.0);
    let hi_x3 = windows.w1_support.hi * nf;
    let la = params.alpha3.ln();
    let u_max = (hi_v.ln() - 2.0 * lo_x3.ln() - la)
        .abs()
        .max((lo_v.ln() - 2.0 * hi_x3.ln() - la).abs());
    max_spacing(params.n_bound).min(PI / (u_max + 2.0 / smallest_scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub t: f64,
    pub f1: Complex64,
    /// `F₂(2t)`, the argument the integrand uses.
    pub f2: Complex64,
    pub weight: f64,
}

/// Integer points `x` with `w₁(x/N) > 0`, paired with their weights.
fn window_points(windows: &WindowSpec, n: u32) -> Vec<(i64, f64)> {
    let nf = n as f64;
    (1..=n as i64)
        .map(|x| (x, windows.eval_w1(x as f64 / nf)))
        .filter(|&(_, w)| w > 0.0)
        .collect()
}

/// Largest `ξ` keeping `x1² + α2 x2² − ξ` positive on the window support.
pub fn positivity_limit(params: &FormParams, windows: &WindowSpec) -> f64 {
    let m = windows.w1_support.lo * params.n_bound as f64;
    (1.0 + params.alpha2) * m * m
}

/// Precomputed sums for one `(FormParams, WindowSpec)` pair.
#[derive(Debug, Clone)]
pub struct SpectralProblem {
    params: FormParams,
    windows: WindowSpec,
    /// Terms of F₁: `ln v` and `w₁ w₁`.
    f1: ExpSum,
    /// `(x3, weight)` for the third slot; F₂ is built from these.
    x3: Vec<(i64, f64)>,
    f2: ExpSum,
}

fn build_f2(points: &[(i64, f64)]) -> ExpSum {
    let mut f2 = ExpSum::with_capacity(points.len());
    for &(x, w) in points {
        f2.push(ln_dd(x as f64), Complex64::new(w, 0.0));
    }
    f2
}

impl SpectralProblem {
    pub fn new(params: &FormParams, windows: &WindowSpec) -> Result<Self> {
        params.validate()?;
        windows.validate()?;
        let limit = positivity_limit(params, windows);
        if params.xi >= limit {
            return Err(Error::PositivityViolated {
                xi: params.xi,
                limit,
            });
        }
        let pts = window_points(windows, params.n_bound);
        let xi = Dd::from_f64(params.xi);
        let mut f1 = ExpSum::with_capacity(pts.len() * pts.len());
        for &(x1, w1) in &pts {
            for &(x2, w2) in &pts {
                let (bh, bl) = scaled_square(params.alpha2, x2);
                let v = Dd::from_f64((x1 * x1) as f64) + Dd { hi: bh, lo: bl } - xi;
                if v.hi <= 0.0 {
                    return Err(Error::PositivityViolated {
                        xi: params.xi,
                        limit,
                    });
                }
                f1.push(v.ln(), Complex64::new(w1 * w2, 0.0));
            }
        }
        let f2 = build_f2(&pts);
        Ok(Self {
            params: *params,
            windows: *windows,
            f1,
            x3: pts,
            f2,
        })
    }

    /// Replace the third-slot weights `w₁(x3/N)` by `f(x3/N)`, support kept.
    pub fn with_x3_weights(mut self, f: impl Fn(f64) -> f64) -> Self {
        let nf = self.params.n_bound as f64;
        for (x, w) in &mut self.x3 {
            *w = f(*x as f64 / nf);
        }
        self.f2 = build_f2(&self.x3);
        self
    }

    pub fn params(&self) -> &FormParams {
        &self.params
    }

    pub fn windows(&self) -> &WindowSpec {
        &self.windows
    }

    pub fn f1(&self, t: f64) -> Complex64 {
        self.f1.eval(t)
    }

    /// F₂ with the (possibly replaced) third-slot weights.
    pub fn f2(&self, t: f64) -> Complex64 {
        self.f2.eval(t)
    }

    /// Direct triple sum `Σ w w w · w₂(T u)`.
    pub fn direct(&self, t_scale: f64) -> Result<f64> {
        if !(t_scale > 0.0) {
            return Err(Error::invalid("t_scale", "T must be positive"));
        }
        let ln_a3 = ln_dd(self.params.alpha3);
        let partials: Vec<f64> = self
            .x3
            .par_iter()
            .map(|&(x3, w3)| {
                let shift = ln_dd(x3 as f64).ldexp(1) + ln_a3;
                let mut acc = Neumaier::new();
                for (ln_v, c) in self.f1.terms() {
                    let u = (ln_v - shift).to_f64();
                    let k = self.windows.eval_w2(t_scale * u);
                    if k != 0.0 {
                        acc.add(c.re * w3 * k);
                    }
                }
                acc.value()
            })
            .collect();
        Ok(partials.into_iter().collect::<Neumaier>().value())
    }

    /// F₁ and F₂(2·) on the grid nodes.
    pub fn samples(&self, grid: &SpectralGrid) -> Vec<SpectrumSample> {
        if grid.is_empty() {
            return Vec::new();
        }
        let count = grid.len();
        let f1 = self.f1.eval_grid(grid.t0(), grid.dt, count);
        let f2 = self.f2.eval_grid(2.0 * grid.t0(), 2.0 * grid.dt, count);
        grid.nodes
            .iter()
            .zip(f1.into_iter().zip(f2))
            .map(|(&(t, weight), (f1, f2))| SpectrumSample { t, f1, f2, weight })
            .collect()
    }
}

/// `(1/2πT) Σ weight · F₁ · conj(F₂(2t)) · e^{−it ln α3}` with the weights
/// supplied by `kernel(sample)`. Returns the complex value and the L¹ scale.
fn integrate_with(
    samples: &[SpectrumSample],
    ln_alpha3: Dd,
    t_scale: f64,
    kernel: impl Fn(&SpectrumSample) -> f64,
) -> (Complex64, f64) {
    let mut acc = ComplexNeumaier::new();
    let mut scale = Neumaier::new();
    for s in samples {
        let (c, sn) = cis_phase(-s.t, ln_alpha3);
        let z = s.f1 * s.f2.conj() * Complex64::new(c, sn) * kernel(s);
        scale.add(z.norm());
        acc.add(z);
    }
    let norm = 1.0 / (2.0 * PI * t_scale);
    (acc.value() * norm, scale.value() * norm)
}

/// Accept the real part when `|Im| ≤ tol · max(|Re|, tol · L¹ scale)`.
fn checked_real(z: Complex64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMBALANCE_TOL * z.re.abs().max(IMBALANCE_TOL * scale) {
        return Err(Error::QuadratureImbalance { re: z.re, im: z.im });
    }
    Ok(z.re)
}

/// Spectral integral from cached samples; only `ln α3` enters here.
pub fn integrate_samples(samples: &[SpectrumSample], ln_alpha3: Dd, t_scale: f64) -> Result<f64> {
    let (z, scale) = integrate_with(samples, ln_alpha3, t_scale, |s| s.weight);
    checked_real(z, scale)
}

pub fn eval_f1(params: &FormParams, windows: &WindowSpec, t: f64) -> Result<Complex64> {
    Ok(SpectralProblem::new(params, windows)?.f1(t))
}

pub fn eval_f2(windows: &WindowSpec, n: u32, t: f64) -> Result<Complex64> {
    windows.validate()?;
    if n < 4 {
        return Err(Error::invalid("n_bound", "F2 needs n_bound >= 4"));
    }
    Ok(build_f2(&window_points(windows, n)).eval(t))
}

/// `W(1+it) N^{1+it}` with `W(s) = ∫ w₁(x) x^{s−1} dx`.
pub fn pole_term(windows: &WindowSpec, n: u32, t: f64) -> Result<Complex64> {
    let w = windows.mellin_w1_classical(Complex64::new(1.0, t))?;
    let (c, s) = cis_phase(t, ln_dd(n as f64));
    Ok(w * n as f64 * Complex64::new(c, s))
}

pub fn smoothed_count_direct(
    params: &FormParams,
    windows: &WindowSpec,
    t_scale: f64,
) -> Result<f64> {
    SpectralProblem::new(params, windows)?.direct(t_scale)
}

pub fn smoothed_count_spectral(
    params: &FormParams,
    windows: &WindowSpec,
    grid: &SpectralGrid,
) -> Result<f64> {
    let problem = SpectralProblem::new(params, windows)?;
    grid.validate(params.n_bound, windows)?;
    integrate_samples(&problem.samples(grid), ln_dd(params.alpha3), grid.t_scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub main: f64,
    pub osc: f64,
}

/// Split the kernel `ŵ₂(t/T)` into `ŵ₂(t/t_split)` (main term) and the
/// difference (oscillatory term), integrated on one common grid.
pub fn split_main_oscillatory(
    params: &FormParams,
    windows: &WindowSpec,
    t_scale: f64,
    t_split: f64,
) -> Result<Split> {
    if !(t_split > 0.0 && t_split <= t_scale) {
        return Err(Error::invalid("t_split", "t_split must lie in (0, T]"));
    }
    let problem = SpectralProblem::new(params, windows)?;
    let dt = alias_free_spacing(params, windows, t_split);
    let grid = SpectralGrid::with_spacing(t_scale, dt, windows)?;
    let table = w2_table(windows)?;
    let samples = problem.samples(&grid);
    let ln_a3 = ln_dd(params.alpha3);
    let main_weight = |s: &SpectrumSample| grid.dt * table.eval(s.t / t_split).re;
    let (total, scale) = integrate_with(&samples, ln_a3, t_scale, |s| s.weight);
    checked_real(total, scale)?;
    let (main, _) = integrate_with(&samples, ln_a3, t_scale, main_weight);
    let (osc, _) = integrate_with(&samples, ln_a3, t_scale, |s| s.weight - main_weight(s));
    Ok(Split {
        main: main.re,
        osc: osc.re,
    })
}

/// CSV `t,re_f1,im_f1,re_f2,im_f2,weight`, 17 significant digits.
pub fn write_spectrum_csv<W: Write>(samples: &[SpectrumSample], mut out: W) -> io::Result<()> {
    writeln!(out, "t,re_f1,im_f1,re_f2,im_f2,weight")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt17(s.t),
            fmt17(s.f1.re),
            fmt17(s.f1.im),
            fmt17(s.f2.re),
            fmt17(s.f2.im),
            fmt17(s.weight)
        )?;
    }
    Ok(())
}
