//! Desk-scale simulator for preparing particle states of a lattice fermion
//! model: exact and matrix-product-state backends, sequential circuit
//! compilation, and driven-excitation error bounds.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod error;
pub mod exact;
pub mod jw;
pub mod lattice;
pub mod manifest;
pub mod mps;
pub mod operators;
pub mod pipeline;
pub mod rabi;

pub use error::{Error, Result};
