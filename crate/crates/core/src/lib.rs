//! Spectral analysis of quadratic quantum Hamiltonians through their adjoint
//! matrix in the basis of coordinates and momenta.
//!
//! The crate is organized bottom-up:
//!
//! * [`phase_space`]: operator basis, quadratic and linear forms, adjoint matrices.
//! * [`spectral`]: eigen data, ladder pairs, classification and energy lattices.
//! * [`gaussian`]: exact polynomial × Gaussian states acted on by the forms.
//! * [`fock`]: truncated number-basis diagonalization used as an oracle.
//! * [`model`]: the rotating/magnetic oscillator family and its phase scan.

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod model;
pub mod phase_space;
pub mod spectral;
pub mod tolerance;

pub use error::{Error, Result};
pub use phase_space::{
    adjoint_representation, linear_commutator, quadratic_commutator, AdjointMatrix, LinearForm, PhaseSpaceBasis,
    QuadraticForm,
};
pub use spectral::{
    classify_spectrum, eigen_decompose, ladder_check, pair_frequencies, spectrum_lattice, Classification, Degeneracy,
    EigenData, FrequencyPair, LatticeLevel, SpectrumReport,
};
pub use tolerance::Tolerances;
