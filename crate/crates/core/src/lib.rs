//! Exact construction and auditing of sequences of rational projective points
//! converging to maximally singular points on Grassmannians, varieties of
//! products of linear forms, quadrics of Witt index at least two and images
//! of general k-linear maps.

pub mod error;
pub mod geometry;
pub mod multilinear;
pub mod quadric;
pub mod builder;
pub mod verifier;
mod serde_util;

pub use error::{Error, Result};
