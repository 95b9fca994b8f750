//! Repeated auctions against no-regret learning buyers.

pub mod auctions;
pub mod benchmarks;
pub mod border;
pub mod dist;
pub mod engine;
pub mod error;
pub mod learners;
pub mod lp;
pub mod scalar;
pub mod simplex;
pub mod verify;

pub use dist::ValueDistribution;
pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
