//! Core numerics for studying how optimizer choice shapes the adversarial
//! robustness of least-squares linear classifiers.
//!
//! The crate builds a family of synthetic binary problems whose minimum-norm
//! and adaptive-method limit solutions are known in closed form, certifies
//! their decision margins under L2 and L-infinity perturbations, and exposes
//! the geometry of the adversarially robust square loss: its piecewise
//! structure over sign cells, exact Hessians, zero-curvature segments, and the
//! stationarity threshold of the interpolating solution.
//!
//! Everything here is pure computation on `f64` vectors and matrices; IO,
//! serialization, and the command-line front end live in the companion crate.
//! The crate is `no_std`-compatible with `alloc` (enable the `libm` feature
//! when building without `std`).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("linrobust-core needs either the `std` or the `libm` feature for f64 math");

pub mod attack;
pub mod closed_form;
pub mod convexity;
pub mod error;
pub mod landscape;
pub mod linalg;
pub mod optim;
pub mod problem;
pub mod radii;
pub mod robust_loss;
pub mod stationarity;

pub use error::{Error, Result};
pub use linalg::{Matrix, Norm, Vector};
