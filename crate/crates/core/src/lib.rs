//! Simulation and inference for root-bit reconstruction in noisy broadcasting
//! on random recursive trees.

pub mod broadcast;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod iso;
pub mod moments;
pub mod rng;
pub mod stats;
pub mod structure;
pub mod tree;
pub mod unrooted;
pub mod urn;

pub use error::{Error, Result};
