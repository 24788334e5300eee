//! Independent reference values: closed forms for a one- and a
//! two-dimensional instrument, and a brute-force fit of directly solved
//! constrained states.

mod brute;
mod comatrix;
mod one_d;
mod two_d;

pub use brute::{brute_force_oracle, chebyshev_grid, equispaced_grid, BruteFit, FIT_RESIDUAL_LIMIT};
pub use comatrix::{codeterminant, comatrix, det2};
pub use one_d::{one_d_oracle, OneDValues};
pub use two_d::{TwoDConstants, TwoDInstance};
