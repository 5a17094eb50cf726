//! Special-function kernel: scaled Bessel functions, gamma family,
//! hypergeometric sums, `E1`, and the Meijer-G contour engine.

mod bessel;
mod expint;
mod gamma;
mod hyper;
mod meijer;
mod policy;

pub use bessel::{bessel_i0, bessel_i0_scaled, bessel_k0, bessel_k0_scaled};
pub use expint::{exp_integral_e1, exp_integral_e1_scaled};
pub use gamma::{digamma, gamma, ln_gamma, ln_gamma_complex, ln_gamma_vertical};
pub use hyper::{hyp2f1_cross_derivative, hyp2f1_neg_int, hyp2f1_sym};
pub use meijer::{meijer_g, meijer_g_at, meijer_g_scaled, GParams, MeijerValue, ScaledMeijer};
pub use policy::AccuracyPolicy;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
