//! Simulation and verification toolkit for spin-chain-star systems: a central
//! ancilla spin coupled to `N` chains of spins through N-wise Pauli strings.
//!
//! The crate builds the chain-star Hamiltonians, reduces each chain to an
//! effective qubit by exact Clifford conjugation, propagates the dynamics
//! (dense and Krylov), and certifies W-like and GHZ-like chain states through
//! fidelities and concurrences.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod pauli;
pub mod reduction;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
