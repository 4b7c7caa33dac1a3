//! ζ(½ + it) by Euler–Maclaurin summation.

use crate::error::{Error, Result};
use crate::numeric::quad::GaussLegendre;
use crate::numeric::{cis_phase, ln_dd, ComplexNeumaier, Dd};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Largest `|t|` accepted.
pub const ZETA_T_CAP: f64 = 1e4;
const MIN_CUTOFF: usize = 50;
/// Growth model `|ζ(½+iu)| ≤ 5 (1+|u|)^{1/6}` used for envelope tails.
const GROWTH_CONSTANT: f64 = 5.0;
/// GL panels per unit length in the envelope quadrature.
const PANELS_PER_UNIT: f64 = 8.0;

fn cutoff(t: f64) -> usize {
    MIN_CUTOFF.max((4.0 * t.abs()).ceil() as usize)
}

/// `ln n` for `1 ≤ n ≤ 4·ZETA_T_CAP + 1`, double-double.
fn ln_table() -> &'static [Dd] {
    static TABLE: OnceLock<Vec<Dd>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let max = cutoff(ZETA_T_CAP);
        (0..=max)
            .map(|n| if n == 0 { Dd::ZERO } else { ln_dd(n as f64) })
            .collect()
    })
}

/// `n^{−s}` for `s = ½ + it`.
#[inline]
fn inv_pow(n: usize, ln_n: Dd, t: f64) -> Complex64 {
    let (c, s) = cis_phase(-t, ln_n);
    Complex64::new(c, s) / (n as f64).sqrt()
}

/// `ζ(½ + it)`, `|t| ≤ 10⁴`: the partial sum to `M − 1`, `M = max(50, 4|t|)`,
/// plus the integral, midpoint and `B₂`, `B₄` corrections at `M`.
pub fn zeta_critical_line(t: f64) -> Result<Complex64> {
    if !(t.abs() <= ZETA_T_CAP) {
        return Err(Error::BudgetExceeded {
            t: t.abs(),
            cap: ZETA_T_CAP,
        });
    }
    let m = cutoff(t);
    let ln = ln_table();
    let mut acc = ComplexNeumaier::new();
    for n in (1..m).rev() {
        acc.add(inv_pow(n, ln[n], t));
    }
    let s = Complex64::new(0.5, t);
    let mf = m as f64;
    let m_s = inv_pow(m, ln[m], t);
    acc.add(m_s * mf / (s - 1.0));
    acc.add(0.5 * m_s);
    acc.add(s * m_s / (12.0 * mf));
    acc.add(-s * (s + 1.0) * (s + 2.0) * m_s / (720.0 * mf * mf * mf));
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `∫_{|y|<y_cut} |ζ(½ + i(y − t))| / (1 + |y|^10) dy`.
    pub value: f64,
    /// Upper bound on the omitted `|y| > y_cut` contribution.
    pub remainder: f64,
}

/// Bound on `∫_{|y|>y_cut} 5 (1+|y−t|)^{1/6} / (1+y^10) dy` via
/// `(1+|y−t|) ≤ (1+|t|)(1+y)`, `1+y ≤ 2y` and `1+y^10 ≥ y^10`.
fn tail_bound(t: f64, y_cut: f64) -> f64 {
    2.0 * GROWTH_CONSTANT
        * (1.0 + t.abs()).powf(1.0 / 6.0)
        * 2f64.powf(1.0 / 6.0)
        * (6.0 / 53.0)
        * y_cut.powf(-53.0 / 6.0)
}

pub fn zeta_envelope(t: f64, y_cut: f64) -> Result<EnvelopeReport> {
    if !(y_cut.is_finite() && y_cut >= 1.0) {
        return Err(Error::invalid("y_cut", "y_cut must be at least 1"));
    }
    if !(t.abs() + y_cut <= ZETA_T_CAP) {
        return Err(Error::BudgetExceeded {
            t: t.abs() + y_cut,
            cap: ZETA_T_CAP,
        });
    }
    let panels = (2.0 * y_cut * PANELS_PER_UNIT).ceil() as usize;
    let mut err = None;
    let v = GaussLegendre::order16().integrate(
        |y| match zeta_critical_line(y - t) {
            Ok(z) => Complex64::new(z.norm() / (1.0 + y.abs().powi(10)), 0.0),
            Err(e) => {
                err.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        -y_cut,
        y_cut,
        panels,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(EnvelopeReport {
        value: v.re,
        remainder: tail_bound(t, y_cut),
    })
}
