//! Lattice simulation of beta decay in one spatial dimension: Hamiltonians
//! of quarks, leptons and glue mapped to qubits, exact and Trotterized
//! time evolution, circuit construction and resource counting.

pub mod circuits;
pub mod decay_models;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
pub mod layout;
pub mod optimize;
pub mod pauli;
pub mod simulator;
pub mod spectra;
pub mod trotter;

pub use error::{Error, Result};
pub use hamiltonians::{
    build_full, build_h_beta, build_h_glue, build_h_leptons, build_h_majorana, build_h_quarks,
    BetaForm, FullOptions, LatticeParams, LeptonBasis, TildeCoefficients,
};
pub use layout::{Field, QubitLayout, Scheme, Species};
pub use pauli::{OperatorSum, Pauli, PauliString, PauliTerm};
pub use circuits::{Circuit, Gate};
pub use decay_models::{EnsembleConfig, PersistenceCurve};
pub use evolution::{DecayCurve, Statevector};
