//! Exact (statevector) backend: eigensolvers, detunings, and reference time
//! evolution.

pub mod eigen;
pub mod evolve;
pub mod lanczos;
pub mod trotter;

pub use eigen::{
    align_degenerate_blocks, detuning, detuning_coupled, eigenbasis_matrix, eigensolve,
    resonance_floor, spectral_norm, EigenBackend, EigenOptions, Spectrum,
};
pub use evolve::{evolve_driven, integrate, integrate_sampled, DriveProtocol, EvolutionResult, OdeOptions};
pub use lanczos::{lanczos_lowest, lanczos_lowest_from, LanczosOptions};
pub use trotter::{evolve_trotter, TrotterEvolver, TrotterOrder};
