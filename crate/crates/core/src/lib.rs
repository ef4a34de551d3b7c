//! Throughput of relay-aided slotted ALOHA with an indoor optical first hop
//! and a Nakagami-m faded RF second hop.
//!
//! The crate evaluates the end-to-end throughput two ways: analytically
//! ([`analytic`]) and by a discrete-slot Monte Carlo simulation of the
//! protocol ([`sim`]). [`sweep`] runs parameter sweeps over either engine and
//! writes CSV; [`config`] holds the reference parameter set.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod numerics;
pub mod rf;
pub mod sim;
pub mod sweep;
pub mod vlc;

pub use error::{Error, Result};
