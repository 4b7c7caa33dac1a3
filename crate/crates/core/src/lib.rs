//! Numerical laboratory for small values of diagonal indefinite ternary
//! quadratic forms `Q(x) = x1² + α2 x2² − α3 x3²`.
//!
//! * [`forms`]: exact evaluation and the exhaustive oracle.
//! * [`search`]: O(N²) minimiser, δ-counts, band counts, density checks.
//! * [`windows`]: smooth windows `w₁`, `w₂` and their transforms.
//! * [`spectral`]: the exponential sums F₁, F₂ and the smoothed count,
//!   computed directly and as a frequency integral.
//! * [`dirichlet`]: Dirichlet polynomials, Epstein partial sums, ζ on the
//!   critical line, mean squares and level sets.
//! * [`sweep`]: parameter sweeps, exceptional fractions, exponent fits.

// `!(x > 0.0)` rejects NaN together with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod error;
pub mod forms;
pub mod numeric;
pub mod search;
pub mod spectral;
pub mod sweep;
pub mod windows;

pub use error::{Error, Result};
pub use forms::{FormParams, LatticePoint, Witness};
pub use windows::WindowSpec;
