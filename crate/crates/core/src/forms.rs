//! Diagonal ternary forms `Q(x) = x1² + α2 x2² − α3 x3²` and the
//! exhaustive small-value oracle.
//!
//! Every engine evaluates `Q(x) − ξ` through the same error-free kernel
//! ([`form_value`]), so two engines that visit the same point obtain the
//! bit-identical value and agree on ties.

use crate::error::{Error, Result};
use crate::numeric::dd::{fast_two_sum, two_prod, two_sum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Default cap on `n_bound` for the O(N³) oracle.
pub const DEFAULT_ORACLE_CAP: u32 = 64;

/// Largest `n_bound` for which `x²` is exact in binary64 with headroom.
pub const MAX_N_BOUND: u32 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormParams {
    pub alpha2: f64,
    pub alpha3: f64,
    pub xi: f64,
    pub n_bound: u32,
}

impl FormParams {
    pub fn new(alpha2: f64, alpha3: f64, xi: f64, n_bound: u32) -> Result<Self> {
        let p = Self {
            alpha2,
            alpha3,
            xi,
            n_bound,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha2.is_finite() && self.alpha2 > 0.0) {
            return Err(Error::invalid("alpha2", "alpha2 must be positive"));
        }
        if !(self.alpha3.is_finite() && self.alpha3 > 0.0) {
            return Err(Error::invalid("alpha3", "alpha3 must be positive"));
        }
        if self.n_bound < 2 {
            return Err(Error::invalid("n_bound", "n_bound must be at least 2"));
        }
        if self.n_bound > MAX_N_BOUND {
            return Err(Error::invalid(
                "n_bound",
                format!("n_bound must not exceed {MAX_N_BOUND}"),
            ));
        }
        let n = self.n_bound as f64;
        if !(self.xi.is_finite() && self.xi.abs() < 0.5 * n * n) {
            return Err(Error::invalid(
                "xi",
                format!("|xi| must be below n_bound^2/2 = {}", 0.5 * n * n),
            ));
        }
        Ok(())
    }

    pub fn with_n(self, n_bound: u32) -> Result<Self> {
        Self::new(self.alpha2, self.alpha3, self.xi, n_bound)
    }

    pub fn with_xi(self, xi: f64) -> Result<Self> {
        Self::new(self.alpha2, self.alpha3, xi, self.n_bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x1: i64,
    pub x2: i64,
    pub x3: i64,
}

impl LatticePoint {
    pub const fn new(x1: i64, x2: i64, x3: i64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn is_zero(&self) -> bool {
        self.x1 == 0 && self.x2 == 0 && self.x3 == 0
    }

    pub fn sup_norm(&self) -> i64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }

    /// Representative with nonnegative coordinates.
    pub fn canonical(&self) -> Self {
        Self::new(self.x1.abs(), self.x2.abs(), self.x3.abs())
    }

    /// Number of points obtained by flipping signs: 2^(nonzero coordinates).
    pub fn orbit_size(&self) -> u64 {
        1 << [self.x1, self.x2, self.x3]
            .iter()
            .filter(|&&c| c != 0)
            .count()
    }

    fn tie_key(&self) -> (i64, i64, i64, bool, bool, bool) {
        (
            self.x1.abs(),
            self.x2.abs(),
            self.x3.abs(),
            self.x1 < 0,
            self.x2 < 0,
            self.x3 < 0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: LatticePoint,
    pub value: f64,
    pub abs_value: f64,
}

impl Witness {
    pub fn new(params: &FormParams, point: LatticePoint) -> Self {
        let value = eval_form(params, point);
        Self {
            point,
            value,
            abs_value: value.abs(),
        }
    }

    /// Minimiser order: smaller |Q − ξ|, then lexicographically smaller
    /// (|x1|, |x2|, |x3|), then nonnegative signs.
    pub fn cmp_minimizer(&self, other: &Self) -> Ordering {
        self.abs_value
            .total_cmp(&other.abs_value)
            .then_with(|| self.point.tie_key().cmp(&other.point.tie_key()))
    }

    pub fn better_of(self, other: Self) -> Self {
        if other.cmp_minimizer(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

/// `α x²` as an unevaluated double-double (exact).
#[inline]
pub(crate) fn scaled_square(alpha: f64, x: i64) -> (f64, f64) {
    two_prod(alpha, (x * x) as f64)
}

/// `α3 x3² + ξ` as a double-double.
#[inline]
pub(crate) fn target(alpha3: f64, xi: f64, x3: i64) -> (f64, f64) {
    let (th, tl) = scaled_square(alpha3, x3);
    let (s, e) = two_sum(th, xi);
    fast_two_sum(s, e + tl)
}

/// `x1² + b − τ` with `b`, `τ` as double-doubles; the final rounding is
/// the only one that matters for values near zero.
#[inline]
pub(crate) fn form_value(x1_sq: f64, b: (f64, f64), tau: (f64, f64)) -> f64 {
    let (s1, e1) = two_sum(x1_sq, b.0);
    let (s2, e2) = two_sum(s1, -tau.0);
    s2 + ((e1 + e2) + (b.1 - tau.1))
}

/// `Q(x) − ξ` for `Q(x) = x1² + α2 x2² − α3 x3²`.
pub fn eval_form(params: &FormParams, p: LatticePoint) -> f64 {
    form_value(
        (p.x1 * p.x1) as f64,
        scaled_square(params.alpha2, p.x2),
        target(params.alpha3, params.xi, p.x3),
    )
}

fn check_cap(params: &FormParams, cap: u32) -> Result<()> {
    if params.n_bound > cap {
        Err(Error::CapExceeded {
            n: params.n_bound,
            cap,
        })
    } else {
        Ok(())
    }
}

/// Exhaustive minimiser of `|Q(x) − ξ|` over nonzero `x` with
/// sup-norm `< n_bound`, using the default oracle cap.
pub fn brute_force_min(params: &FormParams) -> Result<Witness> {
    brute_force_min_with_cap(params, DEFAULT_ORACLE_CAP)
}

/// As [`brute_force_min`] with an explicit cap.
///
/// `Q` depends only on `x_i²`, so every sign pattern of a point gives the
/// same binary64 value; scanning the nonnegative octant visits every
/// attainable value and yields the canonical representative directly.
pub fn brute_force_min_with_cap(params: &FormParams, cap: u32) -> Result<Witness> {
    params.validate()?;
    check_cap(params, cap)?;
    let n = params.n_bound as i64;
    let best = (0..n)
        .into_par_iter()
        .map(|x3| {
            let mut best: Option<Witness> = None;
            for x1 in 0..n {
                for x2 in 0..n {
                    let p = LatticePoint::new(x1, x2, x3);
                    if p.is_zero() {
                        continue;
                    }
                    let w = Witness::new(params, p);
                    best = Some(match best {
                        Some(b) => b.better_of(w),
                        None => w,
                    });
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(a.better_of(b)),
                (a, None) => a,
                (None, b) => b,
            },
        );
    Ok(best.expect("n_bound >= 2 leaves nonzero points"))
}

/// Number of nonzero `x` with sup-norm `< n_bound` and `|Q(x) − ξ| < δ`,
/// by enumeration of the full signed cube.
pub fn count_solutions_sharp(params: &FormParams, delta: f64) -> Result<u64> {
    count_solutions_sharp_with_cap(params, delta, DEFAULT_ORACLE_CAP)
}

pub fn count_solutions_sharp_with_cap(params: &FormParams, delta: f64, cap: u32) -> Result<u64> {
    params.validate()?;
    check_cap(params, cap)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid(
            "delta",
            "delta must be a nonnegative number",
        ));
    }
    let n = params.n_bound as i64;
    let count = (-(n - 1)..n)
        .into_par_iter()
        .map(|x3| {
            let mut c = 0u64;
            for x1 in -(n - 1)..n {
                for x2 in -(n - 1)..n {
                    let p = LatticePoint::new(x1, x2, x3);
                    if !p.is_zero() && eval_form(params, p).abs() < delta {
                        c += 1;
                    }
                }
            }
            c
        })
        .sum();
    Ok(count)
}
