//! Composite Gauss–Legendre quadrature with panel doubling.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of P_n by Newton iteration from the Chebyshev-like initial
    /// guesses; weights from the derivative at the root.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn order16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Integrate over [a, b] split into `panels` equal panels.
    pub fn integrate<F: FnMut(f64) -> Complex64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += f(mid + 0.5 * h * x) * *w;
            }
            total += acc * (0.5 * h);
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Outcome of a converged composite integration.
#[derive(Debug, Clone, Copy)]
pub struct Converged {
    pub value: Complex64,
    /// |I(2n) - I(n)| at the accepted level.
    pub change: f64,
    pub panels_per_segment: usize,
}

/// Integrate `f` over consecutive segments `[breaks[i], breaks[i+1]]`,
/// doubling the panel count per segment until two successive estimates
/// differ by at most `tol * max(1, |I|)`. Returns `None` when
/// `max_panels` is reached first.
pub fn integrate_segments<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breaks: &[f64],
    start_panels: usize,
    tol: f64,
    max_panels: usize,
) -> Option<Converged> {
    let rule = GaussLegendre::order16();
    let eval = |f: &mut F, panels: usize| -> Complex64 {
        breaks
            .windows(2)
            .map(|w| rule.integrate(&mut *f, w[0], w[1], panels))
            .sum()
    };
    let mut panels = start_panels.max(1);
    let mut prev = eval(&mut f, panels);
    while panels * 2 <= max_panels {
        panels *= 2;
        let cur = eval(&mut f, panels);
        let change = (cur - prev).norm();
        if change <= tol * cur.norm().max(1.0) {
            return Some(Converged {
                value: cur,
                change,
                panels_per_segment: panels,
            });
        }
        prev = cur;
    }
    None
}
