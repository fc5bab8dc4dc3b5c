//! Quantum Fisher information of the phase-averaged protocol.
//!
//! Phase averaging leaves the input diagonal in the number basis, and the
//! beam splitter keeps distinct total photon numbers orthogonal, so the QFI of
//! the mixture is the `p_n`-weighted sum of number-state QFIs:
//!
//! ```text
//! F(|n,0>) = n (n + 1) (2n - 1) / 2          (quadratic phase)
//! F(ρ)     = Σ_n p_n F(|n,0>)
//! ```
//!
//! The series is summed until the truncated state has fidelity at least
//! `min_fidelity` with the full one *and* the last few terms have stopped
//! moving the running total.

use crate::error::{Error, Result};
use crate::states::{PhotonDistribution, PhotonStream, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseOrder {
    /// `exp(i a†a φ)`.
    Linear,
    /// `exp(i (a†a)² φ)`.
    Quadratic,
}

/// Stopping rule for the QFI series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Required fidelity between the renormalized truncation and the full state.
    pub min_fidelity: f64,
    /// Each of the last `stall_window` terms must add at most this fraction
    /// of the running QFI.
    pub qfi_rel_increment: f64,
    pub stall_window: usize,
    /// Largest photon number ever summed.
    pub hard_ceiling: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            min_fidelity: 0.99,
            qfi_rel_increment: 1e-9,
            stall_window: 8,
            hard_ceiling: 4096,
        }
    }
}

impl TruncationPolicy {
    /// A stricter policy for reference values: fidelity `1 - 1e-12`,
    /// increments below `1e-12`.
    pub fn strict() -> Self {
        Self {
            min_fidelity: 1.0 - 1e-12,
            qfi_rel_increment: 1e-12,
            stall_window: 16,
            hard_ceiling: 8192,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_fidelity > 0.0 && self.min_fidelity <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "min_fidelity",
                value: self.min_fidelity,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.qfi_rel_increment > 0.0 && self.qfi_rel_increment.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "qfi_rel_increment",
                value: self.qfi_rel_increment,
                reason: "must be positive",
            });
        }
        if self.stall_window == 0 {
            return Err(Error::InvalidParameter {
                name: "stall_window",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub qfi: f64,
    /// `1 / sqrt(qfi)`; infinite when `qfi == 0`.
    pub sensitivity: f64,
    pub cutoff: usize,
    pub fidelity: f64,
    pub captured_mass: f64,
    pub converged: bool,
}

/// QFI of the pure input `|n, 0>`.
pub fn number_state_qfi(n: u64, order: PhaseOrder) -> f64 {
    match order {
        PhaseOrder::Linear => n as f64,
        PhaseOrder::Quadratic => {
            if n == 0 {
                return 0.0;
            }
            let n = n as u128;
            (n * (n + 1) * (2 * n - 1) / 2) as f64
        }
    }
}

/// The quadratic number-state QFI continued to real `n`; used for the
/// number-state reference curve at non-integer mean photon number.
pub fn number_state_qfi_continuous(n: f64) -> f64 {
    0.5 * n * (n + 1.0) * (2.0 * n - 1.0)
}

/// `Σ p_n F(|n,0>)` over the stored support, without renormalizing.
pub fn mixture_qfi(dist: &PhotonDistribution) -> f64 {
    mixture_qfi_with_order(dist, PhaseOrder::Quadratic)
}

pub fn mixture_qfi_with_order(dist: &PhotonDistribution, order: PhaseOrder) -> f64 {
    dist.probabilities
        .iter()
        .enumerate()
        .map(|(n, p)| p * number_state_qfi(n as u64, order))
        .sum()
}

/// Fidelity `(Σ sqrt(p_n q_n))²` between the full state and its truncation.
///
/// With `renormalize` the truncated state is `q = p / mass` on the support
/// and the fidelity equals the captured mass; without it `q = p` and the
/// fidelity is the mass squared.
pub fn truncation_fidelity(dist: &PhotonDistribution, renormalize: bool) -> Result<f64> {
    let mass = dist.captured_mass;
    if !(mass > 0.0) {
        return Err(Error::InvalidProbabilities("zero captured mass".into()));
    }
    let mass = mass.min(1.0);
    Ok(if renormalize { mass } else { mass * mass })
}

/// `1 / sqrt(qfi)`.
pub fn sensitivity(qfi: f64) -> Result<f64> {
    if !(qfi > 0.0) {
        return Err(Error::InvalidParameter {
            name: "qfi",
            value: qfi,
            reason: "sensitivity needs a positive QFI",
        });
    }
    Ok(1.0 / qfi.sqrt())
}

pub(crate) struct Truncation {
    pub probabilities: Vec<f64>,
    pub qfi: f64,
    pub captured_mass: f64,
    pub converged: bool,
}

/// Pulls probabilities from `stream` and accumulates the QFI series until
/// `policy` is satisfied or the hard ceiling is hit.
pub(crate) fn truncate(stream: impl Iterator<Item = f64>, policy: &TruncationPolicy) -> Truncation {
    let mut probabilities = Vec::new();
    let mut contributions = Vec::new();
    let mut mass = 0.0;
    let mut total = 0.0;
    let mut converged = false;

    for (n, p) in stream.take(policy.hard_ceiling + 1).enumerate() {
        probabilities.push(p);
        mass += p;
        let term = p * number_state_qfi(n as u64, PhaseOrder::Quadratic);
        contributions.push(term);
        total += term;

        if mass >= policy.min_fidelity && stalled(&contributions, total, mass, policy) {
            converged = true;
            break;
        }
    }

    Truncation {
        probabilities,
        qfi: total,
        captured_mass: mass,
        converged,
    }
}

fn stalled(contributions: &[f64], total: f64, mass: f64, policy: &TruncationPolicy) -> bool {
    if total == 0.0 {
        // Nothing has contributed yet; only a fully captured state may stop.
        return mass >= 1.0;
    }
    let window = policy.stall_window.min(contributions.len());
    contributions[contributions.len() - window..]
        .iter()
        .all(|&c| c <= policy.qfi_rel_increment * total)
}

/// QFI of `spec` under the quadratic phase, summed per `policy`.
///
/// Hitting the hard ceiling is not an error; the partial sum is returned with
/// `converged == false`.
pub fn protocol_qfi(spec: &StateSpec, policy: &TruncationPolicy) -> Result<QfiResult> {
    policy.validate()?;
    let run = truncate(PhotonStream::new(spec)?, policy);
    let fidelity = run.captured_mass.min(1.0);
    Ok(QfiResult {
        qfi: run.qfi,
        sensitivity: if run.qfi > 0.0 {
            1.0 / run.qfi.sqrt()
        } else {
            f64::INFINITY
        },
        cutoff: run.probabilities.len() - 1,
        fidelity,
        captured_mass: run.captured_mass,
        converged: run.converged,
    })
}
