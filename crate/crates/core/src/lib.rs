//! Numerical core for the dispersive-diffusive Kudryashov-Sinelshchikov
//! (KS) equation
//!
//! ```text
//! u_t + A u u_x + β u_xxx − Bβ (u u_xx)_x − Cβ u_x u_xx − ε u_xx − Dβ (u u_x)_x = 0
//! ```
//!
//! and its vanishing dispersion-diffusion limit towards the entropy
//! solution of the Burgers equation `u_t + A u u_x = 0`.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It is split
//! into:
//!
//! - [`grid`]: periodic grids, fields, spectral calculus, norms and quadrature.
//! - [`datum`]: initial data and Gaussian mollification.
//! - [`params`]: coefficient tuples, the energy-preserving constraint and the
//!   root analysis for `A = (C + α)^{2n}`.
//! - [`solver`]: integrating-factor RK4 pseudo-spectral time stepping.
//! - [`estimates`]: a priori energy functionals evaluated on trajectories.
//! - [`burgers`]: Godunov reference solutions, exact Riemann solutions and
//!   entropy/weak-form residuals.
//! - [`limit`]: the ε → 0 sweep with β = cε⁴ and its convergence tables.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod burgers;
pub mod datum;
mod error;
pub mod estimates;
pub mod fft;
pub mod grid;
pub mod limit;
pub(crate) mod math;
pub mod params;
pub mod solver;

pub use error::{Error, Result};
