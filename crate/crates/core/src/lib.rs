//! Spectral toolkit for the stability of two-dimensional Taylor-Couette flow
//! `u = (A r + B / r) e_theta` in the annulus `1 <= r <= R`.
//!
//! The perturbation vorticity is expanded in Fourier modes `k` in the angle
//! and discretized by Chebyshev collocation in the radius. Per mode the
//! linearized operator is
//!
//! ```text
//! L_k = -nu (d_r^2 - (k^2 - 1/4) / r^2) + i k B / r^2
//! ```
//!
//! acting on the weighted vorticity `w_k = r^{1/2} e^{ikAt} \hat w_k` with
//! homogeneous Dirichlet data. The modules cover the grid, the operators,
//! resolvent and semigroup analysis, the closed-form weighted eigenbasis,
//! the nonlinear solver, the threshold scanner and the functional
//! inequality checks. `cli` wires them into the `tcflow` binary.

pub mod cli;
pub mod config;
pub mod eigenbasis;
pub mod error;
pub mod grid;
pub mod inequalities;
pub mod linalg;
pub mod operators;
pub mod output;
pub mod solver;
pub mod spectral;
pub mod threshold;

pub use error::{Error, Result};
pub use grid::{build_grid, weighted_inner, RadialGrid};
pub use operators::{assemble_mode_operator, solve_stream, FlowParams, ModeOperator};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type RVector = DVector<f64>;
pub type RMatrix = DMatrix<f64>;
pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Version string embedded in every output artifact.
pub const VERSION: &str = concat!("tcflow ", env!("CARGO_PKG_VERSION"));
