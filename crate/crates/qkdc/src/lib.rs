//! Finite-blocklength bounds on secret-key transmission over quantum channels.
//!
//! The crate is layered bottom-up:
//!
//! - [`qcore`]: density operators, channels, partial traces, fidelities.
//! - [`divergences`]: relative entropies, variances, sandwiched Rényi,
//!   hypothesis-testing relative entropy and conditional max-entropy.
//! - [`privstate`]: private states, the privacy test and privacy-definition conversions.
//! - [`simulate`]: channel families and teleportation simulation of covariant channels.
//! - [`bounds`]: converse, achievability and exact boundaries packaged as [`bounds::BoundReport`].
//! - [`gaussian`]: two-mode covariance-matrix algebra and bosonic channel bounds.
//! - [`cli`]: the `qkdc` command-line front end.
//!
//! All reported entropic values are in bits.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod divergences;
pub mod error;
pub mod gaussian;
pub mod privstate;
pub mod qcore;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use qcore::{CMat, DensityOperator, QuantumChannel, TraceClass};
