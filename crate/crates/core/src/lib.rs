//! Finite-blocklength bounds for short packets sent over a complex AWGN
//! channel whose gain is estimated from a pilot preamble.
//!
//! The crate provides
//!
//! * the frame and channel model with the pilot-based ML gain estimator
//!   ([`frame`], [`constellation`]),
//! * Gallager random-coding exponents for matched and mismatched decoding
//!   ([`exponent`]) together with the closed-form BPSK phase reduction
//!   ([`bpsk`]),
//! * converse bounds: the 1959 sphere-packing bound and the normal
//!   approximation ([`converse`]),
//! * averaging over the random channel estimate and the preamble-length
//!   trade-off search ([`tradeoff`]),
//! * an LDPC laboratory: PEG construction of an IRA code, periodic
//!   puncturing, sum-product decoding and Monte Carlo BLER simulation
//!   ([`ldpc`]).
//!
//! Grid evaluations run on rayon when the `parallel` feature is enabled
//! (the default). Every reduction is performed in index order with
//! compensated summation, so results are bit-identical with and without
//! the feature.

pub mod bpsk;
pub mod constellation;
pub mod converse;
mod error;
pub mod exponent;
pub mod frame;
pub mod ldpc;
pub mod optimize;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod tradeoff;

pub use error::{Error, Result};

/// Complex number type used throughout the crate.
pub type Complex = num_complex::Complex64;
