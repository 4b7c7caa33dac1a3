//! Double-double arithmetic and accurate phase evaluation.
//!
//! A [`Dd`] stores an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand. Only the handful of operations
//! needed for logarithms and phase reduction are provided.

use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum for `|a| >= |b|`.
#[inline]
pub fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product: `a * b = p + e` exactly (via fused multiply-add).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;
pub const TWO_PI: Dd = Dd {
    hi: std::f64::consts::TAU,
    lo: 2.449_293_598_294_706_4e-16,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: LN_2,
        lo: LN2_LO,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = fast_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    /// Scale by a power of two (exact).
    #[inline]
    pub fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// Natural logarithm of a positive double-double, accurate to a few
    /// units of 1e-32 relative.
    ///
    /// Reduces to `m * 2^k` with `m` in `[1/sqrt2, sqrt2)` and sums the
    /// `atanh` series of `(m - 1)/(m + 1)`.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive value {}", self.hi);
        let mut k = self.hi.log2().floor() as i32;
        let mut m = self.ldexp(-k);
        if m.hi > std::f64::consts::SQRT_2 {
            m = m.ldexp(-1);
            k += 1;
        } else if m.hi < std::f64::consts::FRAC_1_SQRT_2 {
            m = m.ldexp(1);
            k -= 1;
        }
        let z = (m - Dd::ONE) / (m + Dd::ONE);
        let z2 = z * z;
        // |z| <= 0.172, so z^2 <= 0.0295; 24 terms leave < 1e-36.
        let mut term = z;
        let mut acc = z;
        for j in 1..24 {
            term = term * z2;
            let c = term / Dd::from_f64((2 * j + 1) as f64);
            acc = acc.add(c);
            if c.hi.abs() < 1e-40 {
                break;
            }
        }
        acc.ldexp(1).add(Dd::LN2.mul_f64(k as f64))
    }
}

impl Add for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = fast_two_sum(s, e + t);
        let (s, e) = fast_two_sum(s, e + f);
        Dd { hi: s, lo: e }
    }
}

impl Neg for Dd {
    type Output = Dd;

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = fast_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = fast_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// `ln(x)` for an `f64` argument, in double-double.
pub fn ln_dd(x: f64) -> Dd {
    Dd::from_f64(x).ln()
}

/// Reduce `t * freq` modulo `2π` into `[-π, π]`, carrying the product in
/// double-double so the result stays accurate for `|t|` up to ~1e12.
#[inline]
pub fn reduce_phase(t: f64, freq: Dd) -> f64 {
    let (p, e) = two_prod(t, freq.hi);
    let e = e + t * freq.lo;
    let k = (p / TWO_PI.hi).round();
    // Product k*2π_hi is exact inside the fma; the difference is small.
    let r = (-k).mul_add(TWO_PI.hi, p);
    r + (e - k * TWO_PI.lo)
}

/// `exp(i t freq)` with the accurate phase reduction.
#[inline]
pub fn cis_phase(t: f64, freq: Dd) -> (f64, f64) {
    let (s, c) = reduce_phase(t, freq).sin_cos();
    (c, s)
}
