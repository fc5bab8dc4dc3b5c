use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Pure two-mode state with fixed total photon number `total_n`;
/// `amplitudes[j]` is the amplitude on `|j>_A |total_n - j>_B` after the beam
/// splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeAmplitudes {
    pub amplitudes: Vec<Complex64>,
    pub total_n: u32,
}

impl TwoModeAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of `j` photons in mode A.
    pub fn mode_a_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `<(a₁†a₁)^power>`.
    pub fn number_moment(&self, power: u32) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, z)| z.norm_sqr() * (j as f64).powi(power as i32))
            .sum()
    }
}

/// Sends `|n, 0>` through the 50/50 beam splitter `(1, -i; -i, 1)/sqrt(2)`.
///
/// Built by applying the input creation operator `a₀† = (a₁† + i b₁†)/sqrt(2)`
/// `n` times to the two-mode vacuum, renormalizing by `sqrt(c + 1)` at each
/// step so the amplitudes never grow.
pub fn split_on_beam_splitter(n: u32) -> TwoModeAmplitudes {
    let i = Complex64::new(0.0, 1.0);
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for c in 0..n as usize {
        // amps[j] lives on |j, c - j>.
        let scale = 1.0 / (2.0 * (c + 1) as f64).sqrt();
        let mut next = vec![Complex64::new(0.0, 0.0); c + 2];
        for (j, &z) in amps.iter().enumerate() {
            next[j + 1] += z * ((j + 1) as f64).sqrt() * scale;
            next[j] += i * z * ((c - j + 1) as f64).sqrt() * scale;
        }
        amps = next;
    }
    TwoModeAmplitudes {
        amplitudes: amps,
        total_n: n,
    }
}

fn matrix_element(bra: &TwoModeAmplitudes, ket: &TwoModeAmplitudes, power: u32) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for (jb, zb) in bra.amplitudes.iter().enumerate() {
        for (jk, zk) in ket.amplitudes.iter().enumerate() {
            let same_a = jb == jk;
            let same_b = bra.total_n as usize - jb == ket.total_n as usize - jk;
            if same_a && same_b {
                sum += zb.conj() * zk * (jk as f64).powi(power as i32);
            }
        }
    }
    sum
}

/// `<ψ_m| (a₁†a₁)^k |ψ_n>` on the post-beam-splitter amplitude tables.
pub fn cross_term(m: u32, n: u32, k: u32) -> Complex64 {
    matrix_element(&split_on_beam_splitter(m), &split_on_beam_splitter(n), k)
}

/// QFI of `|n, 0>` for the phase `exp(i (a₁†a₁)^k φ)`:
/// `4 (<(a₁†a₁)^{2k}> - <(a₁†a₁)^k>²)` on the simulated state.
pub fn pure_qfi_bruteforce(n: u32, k: u32) -> f64 {
    let psi = split_on_beam_splitter(n);
    let second = psi.number_moment(2 * k);
    let first = psi.number_moment(k);
    4.0 * (second - first * first)
}

/// Exact rational version of [`pure_qfi_bruteforce`], using
/// `j ~ Binomial(n, 1/2)` moments in big-integer arithmetic.
pub fn pure_qfi_exact(n: u32, k: u32) -> BigRational {
    let mut binom = BigInt::one();
    let mut s_k = BigInt::zero();
    let mut s_2k = BigInt::zero();
    for j in 0..=n {
        let jb = BigInt::from(j);
        let pow_k = num_traits::pow(jb.clone(), k as usize);
        s_2k += &binom * &pow_k * &pow_k;
        s_k += &binom * &pow_k;
        binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    let two_n = BigInt::one() << n as usize;
    let numerator = BigInt::from(4) * (&s_2k * &two_n - &s_k * &s_k);
    BigRational::new(numerator, &two_n * &two_n)
}

/// The three pieces of the spectral QFI formula over the eigenbasis
/// `{|ψ_n>}` of the post-beam-splitter state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTerms {
    /// `Σ_n 4 p_n <ψ_n|O²|ψ_n>`.
    pub first: f64,
    /// `Σ_n 4 p_n |<ψ_n|O|ψ_n>|²` (the `k = l` part of the double sum).
    pub diagonal: f64,
    /// `Σ_{m≠n} 8 p_m p_n / (p_m + p_n) |<ψ_m|O|ψ_n>|²`.
    pub cross: f64,
}

impl SpectralTerms {
    pub fn total(&self) -> f64 {
        self.first - self.diagonal - self.cross
    }
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty vector".into()));
    }
    if let Some((n, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidProbabilities(format!("p[{n}] = {v}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("sum is {total}, not 1")));
    }
    Ok(())
}

/// Evaluates the spectral QFI of `Σ p_n |n,0><n,0|` term by term, with
/// `O = (a₁†a₁)^k` in the rotated frame. Eigenvectors with zero weight are
/// skipped (pairs of zero eigenvalues contribute nothing).
pub fn spectral_qfi_terms(p: &[f64], k: u32) -> Result<SpectralTerms> {
    check_probabilities(p)?;
    let support: Vec<(f64, TwoModeAmplitudes)> = p
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(n, &w)| (w, split_on_beam_splitter(n as u32)))
        .collect();

    let mut terms = SpectralTerms {
        first: 0.0,
        diagonal: 0.0,
        cross: 0.0,
    };
    for (a, (pa, psi_a)) in support.iter().enumerate() {
        terms.first += 4.0 * pa * matrix_element(psi_a, psi_a, 2 * k).re;
        for (b, (pb, psi_b)) in support.iter().enumerate() {
            let weight = 8.0 * pa * pb / (pa + pb);
            let element = matrix_element(psi_a, psi_b, k).norm_sqr();
            if a == b {
                terms.diagonal += weight * element;
            } else {
                terms.cross += weight * element;
            }
        }
    }
    Ok(terms)
}

/// Spectral QFI of the phase-averaged mixture `Σ p_n |n,0><n,0|`.
pub fn mixed_qfi_spectral(p: &[f64], k: u32) -> Result<f64> {
    spectral_qfi_terms(p, k).map(|t| t.total())
}
