//! Feedforward networks built from focusing neurons: neurons whose weights
//! are modulated by a trainable Gaussian receptive field over the input
//! positions.

// NaN-rejecting checks are written as negated comparisons; matrix code
// indexes several buffers per loop.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod data;
pub mod error;
pub mod focus;
pub mod gradcheck;
pub mod harness;
pub mod init;
pub mod layers;
pub mod numerics;
pub mod optim;

pub use error::{Error, Result};
