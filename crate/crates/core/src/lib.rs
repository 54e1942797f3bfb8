//! Two-user NOMA downlink through an omni-surface fed by a single RF chain.
//!
//! The crate models the near-field feed-to-surface link, Nakagami fading on
//! both sides of the surface and transceiver hardware impairments. It offers
//! closed-form ergodic-rate bounds and their limits next to a deterministic
//! Monte Carlo engine, plus the power-allocation optimizer and the canned
//! experiments driven by the `iosnoma` binary.

// Range checks are written as `!(x > lo)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod fading;
pub mod geometry;
pub mod mc;
pub mod optimize;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod scenario;
pub mod theory;

pub use error::{Error, Result};
