//! Spectral numerics for the free and generalized Zakharov-Kuznetsov equation
//! `u_t + d_x Lap u + d_x(u^{k+1}) = 0` on periodic boxes.

pub mod counterexample_probe;
pub mod error;
pub mod estimate_probe;
pub mod fit;
pub mod gzk_solver;
pub mod mixed_norms;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
