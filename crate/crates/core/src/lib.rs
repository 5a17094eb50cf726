//! Ergodic capacity of backscatter links whose forward and backward Rayleigh
//! channels are correlated.
//!
//! Four independent routes to the same number: direct quadrature of the
//! product-SNR density, a Meijer-G series, closed-form high/low-SNR
//! asymptotes, and a seedable Monte Carlo simulator.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
