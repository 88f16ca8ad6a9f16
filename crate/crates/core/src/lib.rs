//! Padé-rational anharmonic oscillators: partially solvable states, spectra,
//! and Rayleigh–Schrödinger series built on triangular propagators.
//!
//! The Schrödinger equation with `V(x) = x² + β·A(x²)/B(x²)` is multiplied
//! through by the denominator and projected on the harmonic-oscillator basis.
//! The result is a `(2t+1)`-diagonal quasi-Hamiltonian `M(E) = H − E·D`
//! acting on the coefficients of `ψ = B(x²)·Σ hₙ|n⟩`.

pub mod banded;
pub mod basis;
pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod perturb;
pub mod poly;
pub mod potential;
pub mod precision;
pub mod solvable;
pub mod spectrum;
pub mod tables;

pub use banded::{BandedMatrix, QuasiHamiltonian};
pub use basis::BasisParams;
pub use error::{Error, Result};
pub use potential::{CouplingPath, PadePotential};
pub use solvable::ExactSolution;
pub use spectrum::SpectrumResult;
