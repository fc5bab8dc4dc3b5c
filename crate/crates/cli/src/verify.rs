use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use clap::ValueEnum;
use kerr_qfi::oracle::{
    cat_diag, cross_term, displacement_residual, gaussian_state_diag, mixed_qfi_spectral,
    pure_qfi_exact, required_dim, squeeze_bogoliubov_residual, squeezed_number_diag,
    total_variation,
};
use kerr_qfi::qfi::{mixture_qfi, number_state_qfi};
use kerr_qfi::states::{distribution_to_cutoff, mean_photon};
use kerr_qfi::{PhaseOrder, PhotonDistribution, StateSpec};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::{self, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            // NaN errors fail.
            passed: max_error <= tolerance,
            max_error,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn number_state_closed_form(n_max: u32) -> Check {
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let exact = pure_qfi_exact(n, 2).to_f64().unwrap_or(f64::NAN);
        let closed = number_state_qfi(n as u64, PhaseOrder::Quadratic);
        let err = (exact - closed).abs();
        worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
    }
    Check::new(format!("number_state_qfi_n_le_{n_max}"), worst, 0.0)
}

fn cross_terms(n_max: u32) -> Check {
    let mut worst = 0.0f64;
    for m in 0..=n_max {
        for n in 0..=n_max {
            if m != n {
                worst = worst.max(cross_term(m, n, 2).norm());
            }
        }
    }
    Check::new(format!("cross_terms_m_n_le_{n_max}"), worst, 1e-14)
}

/// The mixtures are fixed; `seed` only decides the order they are visited in.
fn spectral_mixtures(seed: u64, count: usize) -> Check {
    let mut source = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mixtures: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            let mut p: Vec<f64> = (0..13).map(|_| source.random::<f64>()).collect();
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|w| *w /= total);
            p
        })
        .collect();
    mixtures.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut worst = 0.0f64;
    for p in mixtures {
        let spectral = mixed_qfi_spectral(&p, 2).unwrap_or(f64::NAN);
        let mixture = PhotonDistribution::from_probabilities(p)
            .map(|d| mixture_qfi(&d))
            .unwrap_or(f64::NAN);
        let err = (spectral - mixture).abs() / mixture;
        worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
    }
    Check::new(format!("spectral_vs_mixture_{count}_random"), worst, 1e-9)
}

fn oracle_tv(name: &str, ours: &StateSpec, oracle: kerr_qfi::Result<Vec<f64>>, len: usize, tol: f64) -> Check {
    let tv = match (oracle, distribution_to_cutoff(ours, len - 1)) {
        (Ok(oracle), Ok(dist)) => total_variation(&dist.probabilities, &oracle[..len]),
        _ => f64::NAN,
    };
    Check::new(name, tv, tol)
}

fn gaussian_check(name: &str, spec: StateSpec, len: usize, tol: f64) -> Check {
    let dim = required_dim(spec.n_th + mean_photon(&spec)).max(2 * len + 40);
    oracle_tv(name, &spec, gaussian_state_diag(&spec, dim), len, tol)
}

pub fn run(seed: u64, level: Level) -> Report {
    let full = level == Level::Full;
    let mut checks = vec![
        number_state_closed_form(if full { 60 } else { 30 }),
        cross_terms(12),
        gaussian_check(
            "scs_alpha2_5_phi_pi2_r_1",
            StateSpec::squeezed_coherent(5f64.sqrt(), FRAC_PI_2, 1.0),
            41,
            1e-8,
        ),
        gaussian_check(
            "gaussian_nth_0.5_alpha2_2_r_0.6",
            StateSpec::gaussian(0.5, 2f64.sqrt(), 0.0, 0.6),
            41,
            1e-6,
        ),
        gaussian_check("svs_r_asinh1", StateSpec::squeezed_vacuum(1f64.asinh()), 41, 1e-8),
    ];
    if full {
        checks.push(spectral_mixtures(seed, 100));
        for n_th in [0.0, 0.8] {
            for alpha in [0.0, 1.2] {
                for r in [0.0, 0.5] {
                    let name = format!("gaussian_grid_nth_{n_th}_alpha_{alpha}_r_{r}");
                    checks.push(gaussian_check(&name, StateSpec::gaussian(n_th, alpha, 0.7, r), 30, 1e-6));
                }
            }
        }
        for (m, r) in [(1u32, 0.4), (2, 0.6)] {
            checks.push(oracle_tv(
                &format!("squeezed_number_m_{m}_r_{r}"),
                &StateSpec::squeezed_number(m, r),
                squeezed_number_diag(m as usize, r, 100),
                50,
                1e-6,
            ));
        }
        for (label, delta) in [("even", 0.0), ("odd", PI), ("yurke_stoler", FRAC_PI_2)] {
            checks.push(oracle_tv(
                &format!("cat_{label}_alpha_1.5"),
                &StateSpec::cat(1.5, delta),
                cat_diag(1.5, delta, 100),
                50,
                1e-6,
            ));
        }
        let bogoliubov = squeeze_bogoliubov_residual(Complex64::from_polar(0.1, 0.5), 120).unwrap_or(f64::NAN);
        checks.push(Check::new("squeeze_bogoliubov", bogoliubov, 1e-6));
        let displacement = displacement_residual(Complex64::from_polar(0.8, -1.0), 120).unwrap_or(f64::NAN);
        checks.push(Check::new("displacement_action", displacement, 1e-6));
    }
    Report {
        level,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn write(out: &mut dyn Write, report: &Report, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => output::write_csv(out, &report.checks),
        Format::Json => output::write_json(out, report),
    }
}
