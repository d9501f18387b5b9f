//! Capacity of noisy computations over finite alphabets.
//!
//! A noisy device `F` computes a perfect function `f` of an i.i.d. source
//! `X` unreliably. This crate computes the typical input rate
//! `B(X, f, F) = H(X) - H(f(X) | F(X))` and its maximum over sources,
//! builds and verifies Feinstein codes for the induced cascade, and runs
//! the encode / compute / decode pipeline that reliably computes a second
//! function `g` of an outer source through the noisy device.
//!
//! All quantities are in nats.

// `!(x > 0.0)` and friends reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod coding;
pub mod error;
pub mod exec;
pub mod info;
pub mod model;
pub mod pipeline;
pub mod typicality;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{Alphabet, DMChannel, DetFunction, NoisyComputationInstance, Pmf};
