//! Quantum walks on mosaic quasiperiodic chains: lattice sequences,
//! single-excitation Hamiltonians, exact dynamics, spectral analysis,
//! long-range thresholds and parameter sweeps.

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod lattice;
pub mod presets;
pub mod rg;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
