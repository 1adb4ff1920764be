//! Hecke orbits of `SL_n(Z[1/p])` on the symmetric space `SL_n(R)/SO_n(R)`.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod covering;
pub mod error;
pub mod exact_linalg;
pub mod exponent;
pub mod hecke_enum;
pub mod rng;
pub mod spherical;
pub mod symspace;

pub use error::{Error, Result};
