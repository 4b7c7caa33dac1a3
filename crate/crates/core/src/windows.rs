//! Smooth plateau windows `w₁`, `w₂` and their Fourier/Mellin transforms.
//!
//! Both windows are built from the smooth step
//! `h(u) = g(u) / (g(u) + g(1 − u))`, `g(u) = exp(−κ/u)` for `u > 0`,
//! which is C^∞, exactly 0 for `u ≤ 0` and exactly 1 for `u ≥ 1`.
//! `κ` is the `ramp_sharpness` knob (1 by default).

use crate::error::{Error, Result};
use crate::numeric::dd::Dd;
use crate::numeric::expsum::ExpSum;
use crate::numeric::fmt17;
use crate::numeric::quad::{integrate_segments, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

const QUAD_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub w1_plateau: Interval,
    pub w1_support: Interval,
    pub w2_plateau: Interval,
    pub w2_support: Interval,
    pub ramp_sharpness: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            w1_plateau: Interval::new(0.5, 0.75),
            w1_support: Interval::new(0.25, 1.0),
            w2_plateau: Interval::new(-1.0, 1.0),
            w2_support: Interval::new(-2.0, 2.0),
            ramp_sharpness: 1.0,
        }
    }
}

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, C^∞ in between.
#[inline]
pub fn smooth_step(u: f64, sharpness: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-sharpness / u).exp();
        let b = (-sharpness / (1.0 - u)).exp();
        a / (a + b)
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        let nested = |p: &Interval, s: &Interval| s.lo < p.lo && p.lo < p.hi && p.hi < s.hi;
        if !nested(&self.w1_plateau, &self.w1_support) {
            return Err(Error::invalid(
                "w1_plateau",
                "plateau must lie strictly inside the support",
            ));
        }
        if self.w1_support.lo < 0.0 {
            return Err(Error::invalid(
                "w1_support",
                "w1 must be supported in x >= 0",
            ));
        }
        if !nested(&self.w2_plateau, &self.w2_support) {
            return Err(Error::invalid(
                "w2_plateau",
                "plateau must lie strictly inside the support",
            ));
        }
        if self.w2_plateau.lo != -self.w2_plateau.hi || self.w2_support.lo != -self.w2_support.hi {
            return Err(Error::invalid(
                "w2_support",
                "w2 intervals must be symmetric about 0",
            ));
        }
        if !(self.ramp_sharpness.is_finite() && self.ramp_sharpness > 0.0) {
            return Err(Error::invalid(
                "ramp_sharpness",
                "ramp_sharpness must be positive",
            ));
        }
        Ok(())
    }

    pub fn eval_w1(&self, x: f64) -> f64 {
        let (p, s) = (self.w1_plateau, self.w1_support);
        if x <= s.lo || x >= s.hi {
            0.0
        } else if x < p.lo {
            smooth_step((x - s.lo) / (p.lo - s.lo), self.ramp_sharpness)
        } else if x <= p.hi {
            1.0
        } else {
            smooth_step((s.hi - x) / (s.hi - p.hi), self.ramp_sharpness)
        }
    }

    /// Even by construction: depends on `|t|` only.
    pub fn eval_w2(&self, t: f64) -> f64 {
        let a = t.abs();
        let (p, s) = (self.w2_plateau.hi, self.w2_support.hi);
        if a <= p {
            1.0
        } else if a >= s {
            0.0
        } else {
            smooth_step((s - a) / (s - p), self.ramp_sharpness)
        }
    }

    fn w1_breaks(&self) -> [f64; 4] {
        [
            self.w1_support.lo,
            self.w1_plateau.lo,
            self.w1_plateau.hi,
            self.w1_support.hi,
        ]
    }

    fn w2_breaks(&self) -> [f64; 4] {
        [
            self.w2_support.lo,
            self.w2_plateau.lo,
            self.w2_plateau.hi,
            self.w2_support.hi,
        ]
    }

    /// `∫ w₁(x) dx`.
    pub fn w1_integral(&self) -> Result<f64> {
        integrate_segments(
            |x| Complex64::new(self.eval_w1(x), 0.0),
            &self.w1_breaks(),
            1,
            QUAD_TOL,
            MAX_PANELS,
        )
        .map(|c| c.value.re)
        .ok_or_else(|| Error::QuadratureNotConverged {
            what: "integral of w1".into(),
        })
    }

    /// `ŵ₂(s) = ∫ w₂(t) e^{−ist} dt`, real because `w₂` is even.
    pub fn fourier_w2(&self, s: f64) -> Result<f64> {
        let start = 1 + (s.abs() / 8.0).ceil() as usize;
        let c = integrate_segments(
            |t| Complex64::from_polar(self.eval_w2(t), -s * t),
            &self.w2_breaks(),
            start,
            QUAD_TOL,
            MAX_PANELS,
        )
        .ok_or_else(|| Error::QuadratureNotConverged {
            what: format!("fourier_w2({s})"),
        })?;
        if c.value.im.abs() >= 1e-12 {
            return Err(Error::QuadratureImbalance {
                re: c.value.re,
                im: c.value.im,
            });
        }
        Ok(c.value.re)
    }

    /// Mellin transform in the normalisation `w̌₁(s) = (1/s) ∫₀^∞ w₁(x) x^s dx`.
    pub fn mellin_w1(&self, s: Complex64) -> Result<Complex64> {
        if s == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero("mellin_w1 at s = 0"));
        }
        Ok(self.mellin_moment(s)? / s)
    }

    /// Classical Mellin transform `W(s) = ∫₀^∞ w₁(x) x^{s−1} dx`.
    ///
    /// `W(1 + it) N^{1+it}` is the residue that the pole of ζ contributes
    /// to `F₂(t) = Σ w₁(n/N) n^{it}`.
    pub fn mellin_w1_classical(&self, s: Complex64) -> Result<Complex64> {
        self.mellin_moment(s - 1.0)
    }

    /// `∫ w₁(x) x^s dx` over the support.
    fn mellin_moment(&self, s: Complex64) -> Result<Complex64> {
        let log_span = (self.w1_support.hi / self.w1_support.lo).ln();
        let start = 1 + (s.im.abs() * log_span / 8.0).ceil() as usize;
        integrate_segments(
            |x| self.eval_w1(x) * (s * x.ln()).exp(),
            &self.w1_breaks(),
            start,
            QUAD_TOL,
            MAX_PANELS,
        )
        .map(|c| c.value)
        .ok_or_else(|| Error::QuadratureNotConverged {
            what: format!("mellin_w1({s})"),
        })
    }

    /// Cached ŵ₂ on `[0, s_max]`, node spacing `1/256`, cubic interpolation.
    pub fn fourier_w2_table(&self) -> Result<TransformTable> {
        TransformTable::fourier_w2(self, FOURIER_TABLE_SMAX, FOURIER_TABLE_STEP)
    }
}

pub const FOURIER_TABLE_SMAX: f64 = 256.0;
pub const FOURIER_TABLE_STEP: f64 = 1.0 / 256.0;
/// Interpolation error budget for cached transforms.
pub const TABLE_ERROR_BUDGET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    FourierW2,
    /// `w̌₁(σ + iy)` sampled in `y` along a vertical line.
    MellinW1 {
        sigma_bits: u64,
    },
}

#[derive(Debug, Clone)]
pub struct TransformTable {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub kind: TransformKind,
    pub interpolation_order: u8,
    /// Largest deviation between the interpolant and direct quadrature at
    /// the checked off-grid abscissae.
    pub error_estimate: f64,
    step: f64,
}

impl TransformTable {
    /// Tabulate ŵ₂ at `k h`, `0 ≤ k h ≤ s_max`, by a fixed composite
    /// Gauss–Legendre rule fine enough for frequency `s_max`; then check the
    /// interpolant against adaptive quadrature at off-grid points.
    pub fn fourier_w2(spec: &WindowSpec, s_max: f64, h: f64) -> Result<Self> {
        spec.validate()?;
        let rule = GaussLegendre::order16();
        let breaks = spec.w2_breaks();
        let mut sum = ExpSum::new();
        for w in breaks.windows(2) {
            let panels = ((w[1] - w[0]) * s_max / 4.0).ceil().max(4.0) as usize;
            let ph = (w[1] - w[0]) / panels as f64;
            for p in 0..panels {
                let mid = w[0] + (p as f64 + 0.5) * ph;
                for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let t = mid + 0.5 * ph * x;
                    let c = 0.5 * ph * wt * spec.eval_w2(t);
                    if c != 0.0 {
                        sum.push(Dd::from_f64(-t), Complex64::new(c, 0.0));
                    }
                }
            }
        }
        let count = (s_max / h).round() as usize + 1;
        let values: Vec<Complex64> = sum
            .eval_grid(0.0, h, count)
            .into_iter()
            .map(|v| Complex64::new(v.re, 0.0))
            .collect();
        let grid = (0..count).map(|k| k as f64 * h).collect();
        let mut table = Self {
            grid,
            values,
            kind: TransformKind::FourierW2,
            interpolation_order: 3,
            error_estimate: f64::INFINITY,
            step: h,
        };
        // Off-grid checks, dense near the origin where derivatives are largest.
        let mut err: f64 = 0.0;
        for j in 0..48 {
            let s = if j < 24 {
                (j as f64 + 0.37) * 0.21
            } else {
                (j - 24) as f64 * (s_max / 24.0) + 0.41 * h
            };
            if s >= s_max {
                continue;
            }
            err = err.max((table.eval(s).re - spec.fourier_w2(s)?).abs());
        }
        table.error_estimate = err;
        if err > TABLE_ERROR_BUDGET {
            return Err(Error::QuadratureNotConverged {
                what: format!("fourier_w2 table (interpolation error {err:e})"),
            });
        }
        Ok(table)
    }

    /// Tabulate `w̌₁(σ + iy)` for `y` in `[-y_max, y_max]` with spacing `h`
    /// by direct quadrature at every node.
    pub fn mellin_w1(spec: &WindowSpec, sigma: f64, y_max: f64, h: f64) -> Result<Self> {
        spec.validate()?;
        let count = (2.0 * y_max / h).round() as usize + 1;
        let grid: Vec<f64> = (0..count).map(|k| -y_max + k as f64 * h).collect();
        let values = grid
            .iter()
            .map(|&y| spec.mellin_w1(Complex64::new(sigma, y)))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self {
            grid,
            values,
            kind: TransformKind::MellinW1 {
                sigma_bits: sigma.to_bits(),
            },
            interpolation_order: 3,
            error_estimate: f64::INFINITY,
            step: h,
        };
        let mut err: f64 = 0.0;
        for j in 0..16 {
            let y = -y_max + (j as f64 + 0.5) * (2.0 * y_max / 16.0) + 0.3 * h;
            if y.abs() < y_max {
                let direct = spec.mellin_w1(Complex64::new(sigma, y))?;
                err = err.max((table.eval(y) - direct).norm());
            }
        }
        table.error_estimate = err;
        Ok(table)
    }

    fn value_at(&self, k: isize) -> Complex64 {
        match self.kind {
            TransformKind::FourierW2 => {
                // Even function: reflect through the origin.
                let k = k.unsigned_abs();
                self.values.get(k).copied().unwrap_or_default()
            }
            TransformKind::MellinW1 { .. } => {
                let k = k.clamp(0, self.values.len() as isize - 1) as usize;
                self.values[k]
            }
        }
    }

    /// Four-point Lagrange interpolation; ŵ₂ is taken as 0 beyond the grid.
    pub fn eval(&self, x: f64) -> Complex64 {
        let (origin, x) = match self.kind {
            TransformKind::FourierW2 => (0.0, x.abs()),
            TransformKind::MellinW1 { .. } => (self.grid[0], x),
        };
        let last = *self.grid.last().expect("nonempty table");
        if x >= last {
            return match self.kind {
                TransformKind::FourierW2 => Complex64::new(0.0, 0.0),
                TransformKind::MellinW1 { .. } => self.values[self.values.len() - 1],
            };
        }
        let u = (x - origin) / self.step;
        let k = u.floor() as isize;
        let f = u - k as f64;
        let (p0, p1, p2, p3) = (
            self.value_at(k - 1),
            self.value_at(k),
            self.value_at(k + 1),
            self.value_at(k + 2),
        );
        let c0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let c1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let c2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let c3 = (f + 1.0) * f * (f - 1.0) / 6.0;
        p0 * c0 + p1 * c1 + p2 * c2 + p3 * c3
    }

    /// Smallest tabulated `s` such that `∫_{|σ|>s} |ŵ₂(σ)| dσ` is below
    /// `rel · ŵ₂(0)`. Only meaningful for the ŵ₂ table.
    pub fn tail_cutoff(&self, rel: f64) -> f64 {
        let target = rel * self.values[0].re.abs();
        let mut cum = 0.0;
        for k in (0..self.values.len() - 1).rev() {
            let piece = 0.5 * self.step * (self.values[k].norm() + self.values[k + 1].norm());
            if 2.0 * (cum + piece) >= target {
                return self.grid[k + 1];
            }
            cum += piece;
        }
        0.0
    }

    /// CSV with header `abscissa,real,imag`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "abscissa,real,imag")?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{},{},{}", fmt17(*x), fmt17(v.re), fmt17(v.im))?;
        }
        Ok(())
    }
}
