//! Semiquantum MaxEnt dynamics: a quantum oscillator `(x̂, p̂)` coupled to a
//! classical pair `(A, P_A)`, described either by the Lagrange multipliers of
//! its maximum-entropy statistical operator or by the second moments they fix.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod chaos;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod limit;
pub mod shell;

pub use algebra::{ExpectationState, InvariantSet, Mode, ModelParams, MultiplierState};
pub use error::{Error, Result};
