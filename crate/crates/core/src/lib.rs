//! Phase-averaged quantum Fisher information of a Mach-Zehnder interferometer
//! whose arm carries a quadratic photon-number phase `exp[i (a†a)² φ]`, fed by
//! one single-mode state and vacuum.
//!
//! The crate is split into four layers:
//!
//! * [`special`]: log-space scalar kernels (log-factorial, binomials, scaled
//!   Hermite polynomials).
//! * [`states`]: photon-number distributions and mean-photon formulas for the
//!   supported input families, plus inversion from a target mean photon number.
//! * [`qfi`]: the closed-form QFI series with fidelity-based truncation.
//! * [`oracle`]: an independent brute-force layer (two-mode Fock simulation,
//!   spectral QFI, dense operator exponentials) used to validate the above.

pub mod error;
pub mod oracle;
pub mod qfi;
pub mod special;
pub mod states;

pub use error::{Error, Result};
pub use qfi::{protocol_qfi, PhaseOrder, QfiResult, TruncationPolicy};
pub use states::{build_distribution, solve_params, Family, PhotonDistribution, StateRequest, StateSpec};
