//! Log-linear parse disambiguation trained from incomplete data.
//!
//! A corpus pairs each sentence with its finite set of candidate parses.
//! Parses are mapped to sparse property vectors, a correction property
//! makes their totals constant, and the IM algorithm fits the weights from
//! the candidate sets alone (or from a parsebank of unambiguous sentences).
//! Class-based lexical properties and exact/frame-match evaluation sit on
//! top.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod lexicalization;
pub mod model;
pub mod properties;
pub mod sparse;
pub mod trainer;

pub use error::{Error, ErrorKind, Result};
