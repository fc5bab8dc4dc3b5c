//! Brute-force reference layer.
//!
//! Nothing in here calls into [`crate::states`] formulas or the closed-form
//! QFI; it works from operators and amplitudes directly so that it can be
//! used to check them.

mod fock;
mod two_mode;

pub use fock::{
    annihilation, cat_diag, displacement_matrix, displacement_residual, gaussian_state_diag,
    required_dim, squeeze_bogoliubov_residual, squeeze_matrix, squeezed_number_diag, FockMatrix,
};
pub use two_mode::{
    cross_term, mixed_qfi_spectral, pure_qfi_bruteforce, pure_qfi_exact, spectral_qfi_terms,
    split_on_beam_splitter, SpectralTerms, TwoModeAmplitudes,
};

/// Total-variation distance `½ Σ |p_n - q_n|` over the common prefix.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
