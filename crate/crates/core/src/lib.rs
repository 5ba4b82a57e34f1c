//! Backstepping kernel functions for 1-D linear parabolic PDEs with
//! space-time-varying reaction coefficients.
//!
//! The plant is
//!
//! ```text
//! w_t = w_xx + c(x,t) w + ∫_0^x w(y,t) f(x,y) dy,   w_x(0,t) = 0,  w_x(1,t) = U(t),
//! ```
//!
//! with `c(x,t) = c1(x) + c2(t) + c3(x,t)`. The stabilizing feedback
//! `U(t) = -k(1,1) w(1,t) - ∫_0^1 k_x(1,y) w(y,t) dy` is built from a
//! time-invariant kernel `k` on the triangle `D = {0 ≤ y ≤ x ≤ 1}`, which this
//! crate computes by successive approximations on the Goursat-transformed
//! integral equation. Every estimate of the construction (factorial envelope,
//! maximum bound, uniqueness estimate) is checked numerically, a modified
//! Bessel closed form serves as independent ground truth for the
//! constant-coefficient case, and a Crank–Nicolson simulator closes the loop.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]
// index-based loops mirror the stencil notation and keep multi-array
// quadrature kernels readable
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod bessel;
pub mod coefficients;
pub mod descriptor;
pub mod error;
pub mod goursat;
pub mod phi;
pub mod simulator;
pub mod solver;

mod math;

pub use coefficients::{compute_constants, eval_mu, validate_spec, DerivedConstants, ProblemSpec};
pub use descriptor::{Function1, Function2, Term, TermKind};
pub use error::CoreError;
pub use goursat::{from_goursat, to_goursat, GoursatField, GoursatGrid};
pub use solver::{solve_kernel, ControlGains, KernelSolution};
