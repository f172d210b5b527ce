//! Two-step nonautonomous Hopf bifurcation in quasiperiodically and randomly
//! forced planar maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`base`]: invertible driving dynamics (circle rotation, seeded symbol shift).
//! * [`cocycle`]: SL(2,ℝ) cocycles: products, Lyapunov exponents, Oseledets directions.
//! * [`polar`]: the projective/radial double skew product obtained in polar coordinates.
//! * [`model`]: the planar fibre maps `h(β‖v‖) A(θ) v/‖v‖` and critical parameters.
//! * [`attractor`]: pullback computation of the upper bounding graph, regime
//!   classification and forward two-point attractors.
//! * [`ctime`]: continuous-time vector fields whose time-one maps share the same structure.
//! * [`cli`]: configuration, commands and file output used by the `nahopf` binary.
//!
//! Grid evaluation runs on rayon when the `parallel` feature is enabled (the
//! default) and falls back to sequential iteration otherwise. Results are
//! bit-identical either way.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod base;
pub mod cli;
pub mod cocycle;
pub mod ctime;
mod error;
pub mod linalg;
pub mod model;
mod par;
pub mod polar;

pub use error::{Error, Result};
