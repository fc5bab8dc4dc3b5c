//! Command-line front end for the `kerr-qfi` library: QFI sweeps over mean
//! photon number, photon-number distributions, and the oracle checks.

pub mod args;
pub mod dist;
pub mod output;
pub mod states;
pub mod sweep;
pub mod verify;
