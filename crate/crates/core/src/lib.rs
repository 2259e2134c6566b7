//! Quantum energy teleportation (QET) on a periodic one-dimensional harmonic chain.
//!
//! The crate is organised bottom-up:
//!
//! - [`chain_model`]: dispersion, ground-state correlators `g_r`, `h_r` and the
//!   local-energy offset.
//! - [`gaussian_state`]: covariance-matrix algebra (symplectic spectra,
//!   partial transpose, logarithmic negativity, entropies).
//! - [`povm_measurement`]: coherent-state POVM back-action and the outcome
//!   distribution.
//! - [`qet_protocol`]: optimal displacement at the target site and the
//!   per-run report for the two geometries studied.
//! - [`oracle`]: independent cross-checks (general-dyne conditioning,
//!   Monte Carlo energy, truncated Fock space).
//! - [`experiment`]: sweeps, power-law fits, CSV output and the validation
//!   suite used by the `qet` binary.
//!
//! All covariance matrices use the interleaved layout `(q0, p0, q1, p1, ...)`.

pub mod chain_model;
pub mod error;
pub mod experiment;
pub mod gaussian_state;
mod linalg;
pub mod oracle;
pub mod povm_measurement;
pub mod qet_protocol;

pub use chain_model::{
    build_correlations, correlation_submatrices, dispersion, ground_covariance, ChainParams,
    Correlations,
};
pub use error::{Error, Result};
pub use gaussian_state::{
    log_negativity, mutual_information, partial_transpose, reduce, symplectic_eigenvalues,
    von_neumann_entropy, CovarianceMatrix, SymplecticSpectrum,
};
pub use povm_measurement::{
    build_m_matrix, outcome_distribution, post_measurement_covariance, sample_outcomes,
    MeasurementSpec, Outcome, OutcomeDistribution, PostMeasurementState,
};
pub use qet_protocol::{
    build_quadratics, optimal_plan, optimized_energy, run_setting1, run_setting2, DisplacementPlan,
    QetQuadratics, QetReport,
};
