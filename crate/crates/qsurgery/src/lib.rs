//! Construction, verification and simulation of QLDPC surgery systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`f2la`]: exact linear algebra over GF(2)
//! - [`paulicode`]: Pauli operators and stabilizer codes
//! - [`graphkit`]: cycle bases, decongestion, thickening, cellulation, expansion
//! - [`surgery`]: measurement graphs and merged codes
//! - [`extractor`]: extractors, EAC blocks and bridges
//! - [`simkit`]: stabilizer tableau simulation and fault search
//! - [`pbc`]: Clifford+T to Pauli-measurement schedule compilation
//! - [`archkit`]: architectures built from blocks and bridges
//!
//! The `qsurgery` binary exposes the same functionality on the command line.

pub mod archkit;
pub mod config;
pub mod error;
pub mod extractor;
pub mod f2la;
pub mod graphkit;
pub mod paulicode;
pub mod pbc;
pub mod simkit;
pub mod surgery;

pub use error::{Error, Result};

/// Toolkit version embedded in every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
