//! Linearized spatially homogeneous Landau operator with soft potentials
//! (`-3 < gamma < 0`) on a truncated velocity grid, together with the
//! machinery to measure the constants of its energy estimates and of the
//! analytic-in-time smoothing bound
//! `||d_t^k f(t)|| <= C^{k+1} t^{-k} k!`.
//!
//! Layout:
//! - [`kernel`]: the Landau kernel, the Maxwellian, `A = a * mu` and the
//!   convolution tables.
//! - [`field`]: the grid, sampled fields, discrete calculus and norms.
//! - [`operator`]: `L_1`, `L_2`, `L` and `Q`.
//! - [`evolution`]: sources, RK4 time stepping and the derivative ladder.
//! - [`verify`]: constant estimation and verification reports.
//! - [`io`]: binary snapshot/cache formats and CSV writers.

pub mod error;
pub mod evolution;
pub mod field;
pub mod io;
pub mod kernel;
pub mod operator;
pub mod summation;
pub mod verify;

pub use error::{LandauError, Result};
