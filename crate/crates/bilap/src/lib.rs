//! Numerical toolkit for nonnegative radial solutions of the fourth-order problem
//!
//! ```text
//! Δ²u + V(|x|) u = K(|x|) f(u) + Q(|x|)   on ℝ^N,  N ≥ 5,
//! ```
//!
//! where the potential `V ≥ 0` may vanish or blow up at the origin and at
//! infinity, `K > 0` weights the nonlinearity and `Q ≥ 0` is a forcing term.
//!
//! The crate has two halves that feed each other:
//!
//! * **Certification** ([`exponents`]): a closed-form calculus over growth
//!   parameters `(alpha, beta, gamma)` of the ratio `K / (r^alpha V^beta)` and of
//!   the potential floor `r^gamma V`, producing the open exponent windows
//!   `(q1, q2)` for which the energy space embeds compactly into the weighted
//!   sum space `L^{q1}_K + L^{q2}_K`. Everything here is exact arithmetic on
//!   `f64`, no quadrature involved.
//! * **Computation** ([`grid`], [`energy`], [`solve`], [`verify`]): a radial
//!   finite-difference discretization with `r^{N-1}`-weighted quadrature, the
//!   energy functional `I(u) = ½‖u‖² − ∫ K F(u) − ∫ Q u` and its gradient,
//!   a coercive minimizer and a path-deformation saddle search, and numerical
//!   checks of the explicit pointwise decay bounds and embedding trends.
//!
//! Start from the runnable examples, one per capability:
//!
//! ```text
//! cargo run --example exponent_windows    admissible windows, certificates, CSV report
//! cargo run --example grid_convergence    quadrature and operator convergence orders
//! cargo run --example sublinear_minimize  coercive minimization, q < 2
//! cargo run --example mountain_pass       saddle search for superlinear q > 2
//! cargo run --example decay_bounds        pointwise decay estimates on random fields
//! cargo run --example embedding_trends    sampled embedding functionals S0 / Sinf
//! ```
//!
//! The thin `bilap` binary drives the same library from a TOML config file
//! (`bilap exponents|solve|verify|sweep --config FILE`); see the README.

// `!(x > 0.0)` is used throughout as the NaN-rejecting form of `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod energy;
pub mod exponents;
pub mod grid;
mod linalg;
pub mod solve;
pub mod verify;
