//! Independent validation routes.
//!
//! - [`general_dyne`]: conditions the ground-state Wigner covariance on a
//!   heterodyne-type outcome with detector noise `diag(1/(2ω), ω/2)`. It never
//!   forms the `M` matrix and so checks the POVM back-action from outside.
//! - [`monte_carlo`]: samples outcomes, evaluates the target neighbourhood's
//!   energy from conditional moments and averages.
//! - [`fock`]: a two-mode chain in a truncated number basis, for negativity
//!   and correlator cross-checks.

pub mod fock;
pub mod general_dyne;
pub mod monte_carlo;

pub use fock::{fock_ground_state, fock_log_negativity, FockState, DEFAULT_CUTOFF};
pub use general_dyne::{general_dyne_update, GeneralDyneUpdate};
pub use monte_carlo::{monte_carlo_energy, McEstimate};
