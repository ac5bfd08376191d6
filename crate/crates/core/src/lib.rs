//! Discrete-time quantum walks of a spin-1/2 particle: band structures,
//! chiral symmetry, winding and Chern numbers, boundary-bound states and
//! edge modes.

pub mod analytics;
pub mod config;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod linalg;
pub mod protocol;
pub mod spectral;
pub mod topology;

pub use error::{Result, WalkError};
