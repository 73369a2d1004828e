//! Self-similar transonic shock workbench.
//!
//! Computes pseudo-potential solutions of the self-similar potential flow
//! equation for the two canonical reflection problems (shock reflection off a
//! wedge, and supersonic flow past a solid ramp), by shock fitting: an outer
//! free-boundary iteration around an inner Newton solve of the nonlinear
//! degenerate-elliptic equation on a mapped grid.
//!
//! On every converged solution the [`verifier`] runs a battery of structural
//! audits: entropy and ellipticity margins, convexity and uniform convexity of
//! the fitted shock, cone monotonicity of directional derivatives, derivative
//! identities on the shock, and minimal/maximal chain diagnostics.
//!
//! The [`cli`] module implements the batch front end used by the `shockfit`
//! binary; the library surface is exercised directly by the `examples/`
//! directory.

pub mod cli;
pub mod field;
pub mod gas;
pub mod num;
pub mod solver;
pub mod verifier;

pub use gas::{ConstantState, GasParams, SonicCircle};
pub use num::Vec2;
pub use solver::{Configuration, Problem, Regime, ShockGraph, Solution};
pub use verifier::{Chain, ChainKind, Cone, VerificationReport};
