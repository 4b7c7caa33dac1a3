//! Numerical building blocks shared by every module.

pub mod dd;
pub mod expsum;
pub mod fit;
pub mod quad;
pub mod sum;

pub use dd::{cis_phase, ln_dd, reduce_phase, Dd};
pub use expsum::ExpSum;
pub use fit::{linear_fit, LinearFit};
pub use sum::{neumaier_sum, ComplexNeumaier, Neumaier};

/// Format with 17 significant digits (round-trips binary64).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
