//! Numerical laboratory for Gaussian pointer states of a free particle
//! coupled to a position-monitoring Markovian environment (units ħ = 1).
//!
//! The crate implements, on a uniform periodic grid:
//!
//! - discretized Hilbert-space arithmetic (states, density matrices,
//!   spectral momentum action) in [`grid`], [`wavefunction`], [`density`];
//! - the Gaussian pointer-state family and its moment analysis in
//!   [`gaussian`];
//! - master-equation evolution of the density matrix and its entropy
//!   diagnostics in [`master`];
//! - the three robustness criteria (Hilbert-Schmidt optimal drift,
//!   predictability sieve, uncertainty proportionality) in [`robustness`];
//! - the classical phase-space layer (diffusion matrix, Fokker-Planck
//!   weight evolution, Langevin center diffusion, density-matrix
//!   reconstruction) in [`phasespace`];
//! - quantum-state-diffusion trajectories and ensemble unraveling in
//!   [`qsd`].

pub mod density;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod master;
pub mod phasespace;
pub mod qsd;
pub mod robustness;
mod spectral;
pub mod sym2;
pub mod wavefunction;

pub use density::DensityMatrix;
pub use error::CoreError;
pub use gaussian::{AlphaParam, GaussianFit, PhasePoint};
pub use grid::Grid;
pub use master::ModelParams;
pub use phasespace::{DiffusionMatrix, GaussianWeight};
pub use qsd::{NoiseMode, NoiseSpec, TrajectoryRecord};
pub use sym2::SymMatrix2;
pub use wavefunction::{Observable, WaveFunction};

/// Shorthand used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Result alias with the crate error type.
pub type Result<T> = std::result::Result<T, CoreError>;
