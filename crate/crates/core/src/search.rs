//! Fast engines for `min |Q(x) − ξ|` and δ-counts at large N.
//!
//! All engines work on the nonnegative octant and account for signs by
//! orbit size. `A = {x1²}` and `B = {α2 x2²}` are already sorted by
//! index, so the "sorted arrays" are the index ranges themselves.

use crate::error::{Error, Result};
use crate::forms::{
    brute_force_min_with_cap, form_value, scaled_square, target, FormParams, LatticePoint, Witness,
    DEFAULT_ORACLE_CAP,
};
use crate::numeric::neumaier_sum;
use crate::windows::WindowSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    BruteForce,
    TwoPointer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub witness: Witness,
    pub engine: Engine,
    pub points_scanned: u64,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

/// Per-x2 pieces `α2 x2²` (double-double) and `x1²`.
struct Tables {
    squares: Vec<f64>,
    scaled: Vec<(f64, f64)>,
}

impl Tables {
    fn new(params: &FormParams) -> Self {
        let n = params.n_bound as i64;
        Self {
            squares: (0..n).map(|i| (i * i) as f64).collect(),
            scaled: (0..n).map(|j| scaled_square(params.alpha2, j)).collect(),
        }
    }

    #[inline]
    fn value(&self, i: usize, j: usize, tau: (f64, f64)) -> f64 {
        form_value(self.squares[i], self.scaled[j], tau)
    }
}

fn merge_best(a: Option<Witness>, b: Option<Witness>) -> Option<Witness> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.better_of(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// O(N²) minimiser of `|Q(x) − ξ|` over nonzero `x` with sup-norm `< N`.
///
/// For each `x3`, `x1` ascends while the `x2` pointer descends to the last
/// index with `x1² + α2 x2² ≤ α3 x3² + ξ`; the minimiser for that `x1` is
/// at the pointer or one past it. Candidates are scored with the exact
/// kernel shared with the oracle, and one extra neighbour is checked
/// whenever the pointer's floating comparison disagrees with the exact sign.
pub fn two_pointer_min(params: &FormParams) -> Result<SearchReport> {
    params.validate()?;
    let start = Instant::now();
    let n = params.n_bound as usize;
    let tables = Tables::new(params);
    let (best, scanned) = (0..n)
        .into_par_iter()
        .map(|x3| {
            let tau = target(params.alpha3, params.xi, x3 as i64);
            let mut best: Option<Witness> = None;
            let mut best_abs = f64::INFINITY;
            let mut scanned = 0u64;
            let mut consider = |i: usize, j: usize, v: f64, best: &mut Option<Witness>| {
                if (i | j | x3) == 0 {
                    return;
                }
                let a = v.abs();
                if a > best_abs {
                    return;
                }
                let w = Witness {
                    point: LatticePoint::new(i as i64, j as i64, x3 as i64),
                    value: v,
                    abs_value: a,
                };
                let merged = merge_best(*best, Some(w)).expect("nonempty");
                best_abs = merged.abs_value;
                *best = Some(merged);
            };
            let mut j = n - 1;
            for i in 0..n {
                while j > 0 && tables.squares[i] + tables.scaled[j].0 > tau.0 {
                    j -= 1;
                }
                let v0 = tables.value(i, j, tau);
                consider(i, j, v0, &mut best);
                scanned += 1;
                if v0 > 0.0 && j > 0 {
                    consider(i, j - 1, tables.value(i, j - 1, tau), &mut best);
                    scanned += 1;
                }
                if j + 1 < n {
                    let v1 = tables.value(i, j + 1, tau);
                    consider(i, j + 1, v1, &mut best);
                    scanned += 1;
                    if v1 <= 0.0 && j + 2 < n {
                        consider(i, j + 2, tables.value(i, j + 2, tau), &mut best);
                        scanned += 1;
                    }
                }
            }
            (best, scanned)
        })
        .reduce(|| (None, 0), |a, b| (merge_best(a.0, b.0), a.1 + b.1));
    Ok(SearchReport {
        witness: best.expect("n_bound >= 2 leaves nonzero points"),
        engine: Engine::TwoPointer,
        points_scanned: scanned,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Oracle wrapped as a [`SearchReport`].
pub fn brute_force_report(params: &FormParams, cap: u32) -> Result<SearchReport> {
    let start = Instant::now();
    let witness = brute_force_min_with_cap(params, cap)?;
    let n = params.n_bound as u64;
    Ok(SearchReport {
        witness,
        engine: Engine::BruteForce,
        points_scanned: n * n * n - 1,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

pub fn min_search(params: &FormParams, engine: Engine) -> Result<SearchReport> {
    match engine {
        Engine::BruteForce => brute_force_report(params, DEFAULT_ORACLE_CAP),
        Engine::TwoPointer => two_pointer_min(params),
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "delta",
            "delta must be a nonnegative number",
        ))
    }
}

/// Visit every `x2` in `range` with `|x1² + α2 x2² − τ| < δ` (or `≤ δ` when
/// `closed`), locating the window by binary search on `α2 x2²`.
#[inline]
fn for_each_in_band(
    tables: &Tables,
    i: usize,
    tau: (f64, f64),
    delta: f64,
    closed: bool,
    range: std::ops::Range<usize>,
    mut visit: impl FnMut(usize),
) {
    let scaled = &tables.scaled[range.clone()];
    let lower = tau.0 - tables.squares[i] - delta;
    let first = scaled.partition_point(|b| b.0 < lower);
    let inside = |v: f64| {
        if closed {
            v.abs() <= delta
        } else {
            v.abs() < delta
        }
    };
    // Step back one slot: the float key can misplace the edge by one.
    let mut k = first.saturating_sub(1);
    while k < scaled.len() {
        let j = range.start + k;
        let v = tables.value(i, j, tau);
        if inside(v) {
            visit(j);
        } else if v > 0.0 {
            break;
        }
        k += 1;
    }
}

/// Sharp count: nonzero `x`, sup-norm `< N`, `|Q(x) − ξ| < δ`, all signs.
pub fn delta_count_sharp(params: &FormParams, delta: f64) -> Result<u64> {
    params.validate()?;
    check_delta(delta)?;
    let n = params.n_bound as usize;
    let tables = Tables::new(params);
    Ok((0..n)
        .into_par_iter()
        .map(|x3| {
            let tau = target(params.alpha3, params.xi, x3 as i64);
            let mut c = 0u64;
            for i in 0..n {
                for_each_in_band(&tables, i, tau, delta, false, 0..n, |j| {
                    let p = LatticePoint::new(i as i64, j as i64, x3 as i64);
                    if !p.is_zero() {
                        c += p.orbit_size();
                    }
                });
            }
            c
        })
        .sum())
}

/// Window-weighted count `Σ w₁(x1/N) w₁(x2/N) w₁(x3/N) 1[|Q(x) − ξ| < δ]`
/// over `x` with sup-norm `< N`. `w₁` vanishes for `x ≤ 0`, so only the
/// positive octant contributes.
pub fn delta_count_windowed(params: &FormParams, delta: f64, windows: &WindowSpec) -> Result<f64> {
    params.validate()?;
    windows.validate()?;
    check_delta(delta)?;
    let n = params.n_bound as usize;
    let nf = n as f64;
    let tables = Tables::new(params);
    let weight: Vec<f64> = (0..n).map(|x| windows.eval_w1(x as f64 / nf)).collect();
    let support: Vec<usize> = (0..n).filter(|&x| weight[x] > 0.0).collect();
    let (Some(&lo), Some(&hi)) = (support.first(), support.last()) else {
        return Ok(0.0);
    };
    let partials: Vec<f64> = support
        .par_iter()
        .map(|&x3| {
            let tau = target(params.alpha3, params.xi, x3 as i64);
            let mut terms = Vec::new();
            for &i in &support {
                for_each_in_band(&tables, i, tau, delta, false, lo..hi + 1, |j| {
                    terms.push(weight[i] * weight[j] * weight[x3]);
                });
            }
            neumaier_sum(terms)
        })
        .collect();
    Ok(neumaier_sum(partials))
}

/// Sharp or windowed δ-count, as a real number.
pub fn delta_count(
    params: &FormParams,
    delta: f64,
    windowed: bool,
    windows: &WindowSpec,
) -> Result<f64> {
    if windowed {
        delta_count_windowed(params, delta, windows)
    } else {
        delta_count_sharp(params, delta).map(|c| c as f64)
    }
}

/// Solutions with every `x_i` in `[N/4, N)` and `|Q(x) − ξ| ≤ threshold`.
pub fn count_band(params: &FormParams, threshold: f64) -> Result<u64> {
    params.validate()?;
    check_delta(threshold)?;
    let n = params.n_bound as usize;
    let lo = n.div_ceil(4);
    let tables = Tables::new(params);
    Ok((lo..n)
        .into_par_iter()
        .map(|x3| {
            let tau = target(params.alpha3, params.xi, x3 as i64);
            let mut c = 0u64;
            for i in lo..n {
                for_each_in_band(&tables, i, tau, threshold, true, lo..n, |_| c += 1);
            }
            c
        })
        .sum())
}

/// Band count at the main-term scale `|Q(x) − ξ| ≤ N^{3/2}`.
pub fn count_main_term_band(params: &FormParams) -> Result<u64> {
    let n = params.n_bound as f64;
    count_band(params, n * n.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityQuery {
    /// Half-width of the target range `[-A, A]`.
    pub a: f64,
    pub delta: f64,
    pub params: FormParams,
}

impl DensityQuery {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid("delta", "delta must be positive"));
        }
        if !(self.a.is_finite() && self.a >= self.delta) {
            return Err(Error::invalid("a", "A must be at least delta"));
        }
        let n = self.params.n_bound as f64;
        if self.a >= 0.5 * n * n {
            return Err(Error::invalid("a", "A must stay below n_bound^2/2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub xi: f64,
    pub min_abs: f64,
    pub point: LatticePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub worst_xi: f64,
    pub worst_min: f64,
    pub pass: bool,
    pub grid: Vec<DensityPoint>,
}

/// Cell midpoints `ξ_k = −A + (k + ½) h`, `h = 2A / ⌈2A/step⌉ ≤ step`:
/// every ξ in `[−A, A]` lies within `step/2` of a grid point.
pub fn xi_grid(a: f64, step: f64) -> Vec<f64> {
    let cells = ((2.0 * a / step).ceil() as usize).max(1);
    let h = 2.0 * a / cells as f64;
    (0..cells).map(|k| -a + (k as f64 + 0.5) * h).collect()
}

/// Worst `min_x |Q(x) − ξ|` over a δ-dense grid of `ξ` in `[−A, A]`.
pub fn density_check(q: &DensityQuery, xi_grid_step: f64) -> Result<DensityReport> {
    q.validate()?;
    if !(xi_grid_step > 0.0 && xi_grid_step <= q.delta) {
        return Err(Error::invalid(
            "xi_grid_step",
            "xi_grid_step must lie in (0, delta]",
        ));
    }
    let grid = xi_grid(q.a, xi_grid_step)
        .into_iter()
        .map(|xi| {
            let r = two_pointer_min(&q.params.with_xi(xi)?)?;
            Ok(DensityPoint {
                xi,
                min_abs: r.witness.abs_value,
                point: r.witness.point,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = grid
        .iter()
        .max_by(|a, b| a.min_abs.total_cmp(&b.min_abs))
        .copied()
        .expect("grid is nonempty");
    Ok(DensityReport {
        worst_xi: worst.xi,
        worst_min: worst.min_abs,
        pass: worst.min_abs < q.delta,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{brute_force_min, count_solutions_sharp};

    fn fp(a2: f64, a3: f64, xi: f64, n: u32) -> FormParams {
        FormParams::new(a2, a3, xi, n).unwrap()
    }

    #[test]
    fn two_pointer_examples() {
        let r = two_pointer_min(&fp(1.0, 0.9, 0.0, 2)).unwrap();
        assert_eq!(r.witness.point, LatticePoint::new(0, 1, 1));
        assert_eq!(r.engine, Engine::TwoPointer);
        let r = two_pointer_min(&fp(1.0, 3.0, 0.0, 1000)).unwrap();
        assert_eq!(r.witness.abs_value, 1.0);
        let r = two_pointer_min(&fp(1.0, 1.0, 0.0, 6)).unwrap();
        assert_eq!(r.witness.abs_value, 0.0);
        assert!([LatticePoint::new(0, 1, 1), LatticePoint::new(3, 4, 5)].contains(&r.witness.point));
    }

    #[test]
    fn two_pointer_matches_oracle_on_small_battery() {
        for &(a2, a3, xi) in &[
            (1.0, 0.9, 0.0),
            (2f64.sqrt(), 0.5f64.sqrt(), 0.3),
            (0.5, 0.75, -1.7),
            (1.0, 1.0, 0.5),
            (3.0, 0.61803398875, 2.0),
        ] {
            for n in [2, 3, 7, 16, 31] {
                let Ok(p) = FormParams::new(a2, a3, xi, n) else {
                    continue;
                };
                let o = brute_force_min(&p).unwrap();
                let t = two_pointer_min(&p).unwrap().witness;
                assert_eq!(o.abs_value, t.abs_value, "{p:?}");
                assert_eq!(o.point, t.point, "{p:?}");
            }
        }
    }

    #[test]
    fn sharp_delta_count_matches_oracle() {
        let p = fp(1.0, 0.9, 0.0, 2);
        assert_eq!(delta_count_sharp(&p, 0.2).unwrap(), 8);
        for &(a2, a3, xi, d) in &[
            (1.0, 0.9, 0.0, 0.35),
            (1.0, 1.0, 0.0, 0.5),
            (0.7, 0.55, 1.25, 0.8),
            (1.3, 0.95, -3.5, 2.0),
        ] {
            for n in [3, 9, 20] {
                let p = fp(a2, a3, xi, n);
                assert_eq!(
                    delta_count_sharp(&p, d).unwrap(),
                    count_solutions_sharp(&p, d).unwrap(),
                    "{p:?} {d}"
                );
            }
        }
    }

    #[test]
    fn windowed_count_ignores_points_outside_support() {
        let w = WindowSpec::default();
        let p = fp(1.0, 0.83, 0.0, 40);
        let fast = delta_count_windowed(&p, 0.2, &w).unwrap();
        let n = 40i64;
        let mut slow = 0.0;
        for x1 in -n + 1..n {
            for x2 in -n + 1..n {
                for x3 in -n + 1..n {
                    let pt = LatticePoint::new(x1, x2, x3);
                    if !pt.is_zero() && crate::forms::eval_form(&p, pt).abs() < 0.2 {
                        let wt = w.eval_w1(x1 as f64 / 40.0)
                            * w.eval_w1(x2 as f64 / 40.0)
                            * w.eval_w1(x3 as f64 / 40.0);
                        if (x1 <= 10 || x2 <= 10 || x3 <= 10) && wt != 0.0 {
                            panic!("weight outside support");
                        }
                        slow += wt;
                    }
                }
            }
        }
        assert!((fast - slow).abs() < 1e-12 * slow.max(1.0));
        assert!(fast > 0.0);
    }

    #[test]
    fn band_count_matches_enumeration() {
        let p = fp(1.0, 0.9, 0.0, 8);
        let thr = 8f64.powf(1.5);
        let mut c = 0;
        for x1 in 2..8 {
            for x2 in 2..8 {
                for x3 in 2..8 {
                    if crate::forms::eval_form(&p, LatticePoint::new(x1, x2, x3)).abs() <= thr {
                        c += 1;
                    }
                }
            }
        }
        assert_eq!(count_main_term_band(&p).unwrap(), c);
    }

    #[test]
    fn band_threshold_zero_counts_exact_zeros() {
        assert_eq!(count_band(&fp(1.0, 3.0, 0.0, 64), 0.0).unwrap(), 0);
        // 3-4-5 multiples inside [N/4, N) for N = 24: (6,8,10), (8,6,10), ...
        let c = count_band(&fp(1.0, 1.0, 0.0, 24), 0.0).unwrap();
        assert!(c > 0);
    }

    #[test]
    fn xi_grid_covers_range() {
        let g = xi_grid(1.0, 0.5);
        assert_eq!(g, vec![-0.75, -0.25, 0.25, 0.75]);
        let g = xi_grid(1.0, 0.3);
        assert_eq!(g.len(), 7);
        for k in 0..=1000 {
            let xi = -1.0 + 2.0 * k as f64 / 1000.0;
            let d = g
                .iter()
                .map(|g| (g - xi).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 0.15 + 1e-12);
        }
    }

    #[test]
    fn density_examples() {
        // Isotropic form represents every integer; quarter-integer grid points
        // sit 1/4 away from the nearest value.
        let q = DensityQuery {
            a: 4.0,
            delta: 0.5,
            params: fp(1.0, 1.0, 0.0, 12),
        };
        let r = density_check(&q, 0.5).unwrap();
        assert!(r.pass);
        assert!((r.worst_min - 0.25).abs() < 1e-15);

        let q = DensityQuery {
            a: 0.3,
            delta: 0.3,
            params: fp(1.0, 2f64.sqrt() / 2.0, 0.0, 64),
        };
        let r = density_check(&q, 0.3).unwrap();
        assert_eq!(r.grid.len(), 2);
        assert_eq!(r.pass, r.grid.iter().all(|g| g.min_abs < 0.3));

        let bad = DensityQuery {
            a: 0.1,
            delta: 0.5,
            params: fp(1.0, 1.0, 0.0, 12),
        };
        assert!(matches!(
            density_check(&bad, 0.5),
            Err(Error::Invalid { field: "a", .. })
        ));
        assert!(density_check(&q, 0.31).is_err());
    }
}
