//! Photon-number statistics of the supported single-mode inputs.
//!
//! After phase averaging only the diagonal `p_n = <n|ρ|n>` of the input
//! matters, so every family is described here by its photon-number
//! distribution, its closed-form mean photon number, and an inversion from a
//! target mean photon number back to state parameters.
//!
//! Gaussian states follow the ordering `ρ = D(α) S(r) ρ_th S(r)† D(α)†` with a
//! real squeezing parameter (squeeze phase χ = 0), so `α = |α| e^{iφ}` carries
//! the relative phase. With this ordering the mean photon number is
//! `|α|² + ((2 n_th + 1) cosh 2r - 1) / 2`, independent of φ.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qfi::{self, TruncationPolicy};
use crate::special::{log_factorial, log_sum_exp, HermiteRecurrence};

/// Below this squeezing the squeezed-coherent formula is replaced by its
/// coherent limit; the Hermite argument diverges as `1/sqrt(tanh r)`.
pub const SQUEEZE_EPSILON: f64 = 1e-6;

const CAT_PHASE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Thermal,
    Coherent,
    SqueezedVacuum,
    SqueezedCoherent,
    GeneralGaussian,
    SqueezedNumber,
    Cat,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Thermal => "thermal",
            Family::Coherent => "coherent",
            Family::SqueezedVacuum => "squeezed_vacuum",
            Family::SqueezedCoherent => "squeezed_coherent",
            Family::GeneralGaussian => "gaussian",
            Family::SqueezedNumber => "squeezed_number",
            Family::Cat => "cat",
        }
    }

    /// Families whose distribution has exact zeros on one photon-number parity.
    pub fn is_parity_screened(self) -> bool {
        matches!(
            self,
            Family::SqueezedVacuum | Family::SqueezedNumber | Family::Cat
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three cat-state phases `δ ∈ {0, π, π/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatKind {
    Even,
    Odd,
    YurkeStoler,
}

impl CatKind {
    pub fn from_delta(delta: f64) -> Result<Self> {
        if (delta).abs() <= CAT_PHASE_TOLERANCE {
            Ok(CatKind::Even)
        } else if (delta - PI).abs() <= CAT_PHASE_TOLERANCE {
            Ok(CatKind::Odd)
        } else if (delta - FRAC_PI_2).abs() <= CAT_PHASE_TOLERANCE {
            Ok(CatKind::YurkeStoler)
        } else {
            Err(Error::UnsupportedCatPhase(delta))
        }
    }

    pub fn delta(self) -> f64 {
        match self {
            CatKind::Even => 0.0,
            CatKind::Odd => PI,
            CatKind::YurkeStoler => FRAC_PI_2,
        }
    }
}

/// Flat parameter record for one input state.
///
/// Only the fields used by `family` may be nonzero; `chi` must always be zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpec {
    pub family: Family,
    /// Mean thermal photon number of the undisplaced, unsqueezed core.
    pub n_th: f64,
    pub alpha_mag: f64,
    /// Phase φ of the displacement, relative to the squeezing axis.
    pub alpha_phase: f64,
    pub r: f64,
    pub chi: f64,
    /// Fock index of the squeezed number state.
    pub m: u32,
    pub delta: f64,
}

impl StateSpec {
    fn blank(family: Family) -> Self {
        Self {
            family,
            n_th: 0.0,
            alpha_mag: 0.0,
            alpha_phase: 0.0,
            r: 0.0,
            chi: 0.0,
            m: 0,
            delta: 0.0,
        }
    }

    pub fn thermal(n_th: f64) -> Self {
        Self {
            n_th,
            ..Self::blank(Family::Thermal)
        }
    }

    pub fn coherent(alpha_mag: f64) -> Self {
        Self {
            alpha_mag,
            ..Self::blank(Family::Coherent)
        }
    }

    pub fn squeezed_vacuum(r: f64) -> Self {
        Self {
            r,
            ..Self::blank(Family::SqueezedVacuum)
        }
    }

    pub fn squeezed_coherent(alpha_mag: f64, alpha_phase: f64, r: f64) -> Self {
        Self {
            alpha_mag,
            alpha_phase,
            r,
            ..Self::blank(Family::SqueezedCoherent)
        }
    }

    pub fn gaussian(n_th: f64, alpha_mag: f64, alpha_phase: f64, r: f64) -> Self {
        Self {
            n_th,
            alpha_mag,
            alpha_phase,
            r,
            ..Self::blank(Family::GeneralGaussian)
        }
    }

    pub fn squeezed_number(m: u32, r: f64) -> Self {
        Self {
            m,
            r,
            ..Self::blank(Family::SqueezedNumber)
        }
    }

    pub fn cat(alpha_mag: f64, delta: f64) -> Self {
        Self {
            alpha_mag,
            delta,
            ..Self::blank(Family::Cat)
        }
    }

    pub fn validate(&self) -> Result<()> {
        use Family::*;

        let fields: [(&'static str, f64); 6] = [
            ("n_th", self.n_th),
            ("alpha_mag", self.alpha_mag),
            ("alpha_phase", self.alpha_phase),
            ("r", self.r),
            ("chi", self.chi),
            ("delta", self.delta),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, value, "must be finite"));
            }
        }
        for (name, value) in [("n_th", self.n_th), ("alpha_mag", self.alpha_mag), ("r", self.r)] {
            if value < 0.0 {
                return Err(invalid(name, value, "must be nonnegative"));
            }
        }
        if self.chi != 0.0 {
            return Err(invalid("chi", self.chi, "only the χ = 0 convention is supported"));
        }

        let (uses_n_th, uses_alpha, uses_phase, uses_r, uses_m, uses_delta) = match self.family {
            Thermal => (true, false, false, false, false, false),
            Coherent => (false, true, false, false, false, false),
            SqueezedVacuum => (false, false, false, true, false, false),
            SqueezedCoherent => (false, true, true, true, false, false),
            GeneralGaussian => (true, true, true, true, false, false),
            SqueezedNumber => (false, false, false, true, true, false),
            Cat => (false, true, false, false, false, true),
        };
        let unused = [
            (uses_n_th, "n_th", self.n_th),
            (uses_alpha, "alpha_mag", self.alpha_mag),
            (uses_phase, "alpha_phase", self.alpha_phase),
            (uses_r, "r", self.r),
            (uses_m, "m", self.m as f64),
            (uses_delta, "delta", self.delta),
        ];
        for (used, name, value) in unused {
            if !used && value != 0.0 {
                return Err(invalid(name, value, "not used by this family and must be zero"));
            }
        }

        if self.family == Cat {
            let kind = CatKind::from_delta(self.delta)?;
            if kind == CatKind::Odd && self.alpha_mag == 0.0 {
                return Err(invalid("alpha_mag", 0.0, "odd cat state needs |α| > 0"));
            }
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

/// Truncated photon-number distribution `p_0 ..= p_cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub probabilities: Vec<f64>,
    pub cutoff: usize,
    pub captured_mass: f64,
    /// The state this was built from, if any.
    pub spec: Option<StateSpec>,
}

impl PhotonDistribution {
    /// Wraps a raw probability vector (entries ≥ 0, sum ≤ 1 + 1e-12).
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidProbabilities("empty vector".into()));
        }
        if let Some((n, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidProbabilities(format!("p[{n}] = {p}")));
        }
        let captured_mass: f64 = probabilities.iter().sum();
        if captured_mass > 1.0 + 1e-12 {
            return Err(Error::InvalidProbabilities(format!(
                "total mass {captured_mass} exceeds 1"
            )));
        }
        Ok(Self {
            cutoff: probabilities.len() - 1,
            probabilities,
            captured_mass,
            spec: None,
        })
    }

    /// Point mass at photon number `n`.
    pub fn delta(n: usize) -> Self {
        let mut probabilities = vec![0.0; n + 1];
        probabilities[n] = 1.0;
        Self {
            probabilities,
            cutoff: n,
            captured_mass: 1.0,
            spec: None,
        }
    }

    /// `Σ n p_n` over the stored support.
    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

/// Bose-Einstein statistics `n_th^n / (n_th + 1)^(n + 1)`.
pub fn thermal_pn(n_th: f64, n: u64) -> Result<f64> {
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return Err(invalid("n_th", n_th, "must be finite and nonnegative"));
    }
    if n_th == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let n = n as f64;
    Ok((n * n_th.ln() - (n + 1.0) * n_th.ln_1p()).exp())
}

/// Poisson statistics with mean `|α|²`.
pub fn coherent_pn(alpha_mag: f64, n: u64) -> f64 {
    let x = alpha_mag * alpha_mag;
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-x + n as f64 * x.ln() - log_factorial(n)).exp()
}

/// Squeezed vacuum: `(2k)! / (2^{2k} (k!)²) tanh^{2k} r / cosh r` at `n = 2k`,
/// zero at odd `n`.
pub fn squeezed_vacuum_pn(r: f64, n: u64) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    if r == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let k = n / 2;
    let log_p = log_factorial(n) - 2.0 * log_factorial(k) - n as f64 * LN_2
        + n as f64 * r.tanh().ln()
        - r.cosh().ln();
    log_p.exp()
}

/// Prefactor pieces of the squeezed-coherent distribution that do not depend on `n`.
#[derive(Debug, Clone, Copy)]
struct SqueezedCoherentTerms {
    log_half_tanh: f64,
    log_constant: f64,
    hermite_arg: Complex64,
}

impl SqueezedCoherentTerms {
    fn new(alpha_mag: f64, alpha_phase: f64, r: f64) -> Self {
        let alpha = Complex64::from_polar(alpha_mag, alpha_phase);
        let t = r.tanh();
        let x = alpha_mag * alpha_mag;
        Self {
            log_half_tanh: (0.5 * t).ln(),
            log_constant: -r.cosh().ln() - x - (alpha * alpha).re * t,
            hermite_arg: (alpha + alpha.conj() * t) / (2.0 * t).sqrt(),
        }
    }

    fn log_pn(&self, n: u64, log_hermite_sqr: f64) -> f64 {
        n as f64 * self.log_half_tanh - log_factorial(n) + self.log_constant + log_hermite_sqr
    }
}

/// Displaced squeezed vacuum `D(α) S(r)|0>` with `α = |α| e^{iφ}`:
///
/// `tanh^n r / (2^n n! cosh r) exp[-|α|² - Re(α²) tanh r] |H_n((α + α* tanh r)/sqrt(2 tanh r))|²`.
pub fn squeezed_coherent_pn(alpha_mag: f64, alpha_phase: f64, r: f64, n: u64) -> f64 {
    if r < SQUEEZE_EPSILON {
        return coherent_pn(alpha_mag, n);
    }
    let terms = SqueezedCoherentTerms::new(alpha_mag, alpha_phase, r);
    let h = crate::special::hermite(n, terms.hermite_arg);
    if h.is_zero() {
        return 0.0;
    }
    terms.log_pn(n, h.log_norm_sqr()).exp()
}

/// Coefficients of the general Gaussian photon-number sum, for
/// `D(α) S(r) ρ_th S(r)† D(α)†`.
///
/// The sum is naturally expressed for the opposite ordering `S(r) D(γ) ρ_th`;
/// the two coincide for `γ = α cosh r + α* sinh r`, which is what `E` and `B`
/// are evaluated at.
#[derive(Debug, Clone, Copy)]
struct GaussianTerms {
    log_prefactor: f64,
    /// `ln D`; `None` when `D = 0` (pure state, only `k = 0` survives).
    log_d: Option<f64>,
    c_sqr: f64,
    e: Complex64,
}

impl GaussianTerms {
    fn new(n_th: f64, alpha_mag: f64, alpha_phase: f64, r: f64) -> Self {
        let mu = 2.0 * n_th + 1.0;
        let (ep, em) = (r.exp(), (-r).exp());
        let a = (1.0 + mu * ep * ep) * (1.0 + mu * em * em);
        let gamma_re = alpha_mag * ep * alpha_phase.cos();
        let gamma_im = alpha_mag * em * alpha_phase.sin();
        let b = 2.0
            * ((mu + em * em) * gamma_re * gamma_re + (mu + ep * ep) * gamma_im * gamma_im)
            / a;
        let c_sqr = mu * (2.0 * r).sinh() / a;
        let d = (mu * mu - 1.0) / a;
        let e = Complex64::new((em + mu * ep) * gamma_re, (ep + mu * em) * gamma_im) / a;
        Self {
            log_prefactor: LN_2 - 0.5 * a.ln() - b,
            log_d: (d > 0.0).then(|| d.ln()),
            c_sqr,
            e,
        }
    }

    fn hermite(&self) -> HermiteRecurrence {
        HermiteRecurrence::new(self.e, self.c_sqr)
    }

    /// `p_n` given `ln |h_m|²` for `m = 0..=n`.
    fn pn(&self, n: u64, log_h_sqr: &[f64]) -> f64 {
        let base = self.log_prefactor + log_factorial(n);
        let log_sum = match self.log_d {
            None => log_h_sqr[n as usize] - 2.0 * log_factorial(n),
            Some(log_d) => {
                let terms: Vec<f64> = (0..=n)
                    .map(|k| {
                        k as f64 * log_d - log_factorial(k) - 2.0 * log_factorial(n - k)
                            + log_h_sqr[(n - k) as usize]
                    })
                    .collect();
                log_sum_exp(&terms)
            }
        };
        (base + log_sum).exp()
    }
}

/// General single-mode Gaussian state (displaced squeezed thermal).
pub fn gaussian_pn(spec: &StateSpec, n: u64) -> Result<f64> {
    for (name, value) in [("n_th", spec.n_th), ("r", spec.r), ("alpha_mag", spec.alpha_mag)] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid(name, value, "must be finite and nonnegative"));
        }
    }
    let terms = GaussianTerms::new(spec.n_th, spec.alpha_mag, spec.alpha_phase, spec.r);
    let log_h_sqr: Vec<f64> = terms
        .hermite()
        .take(n as usize + 1)
        .map(|h| h.log_norm_sqr())
        .collect();
    Ok(terms.pn(n, &log_h_sqr))
}

/// Squeezed number state `S(r)|m>`.
///
/// Nonzero only when `n ≡ m (mod 2)`; the parity screen is an integer test.
pub fn squeezed_number_pn(m: u64, r: f64, n: u64) -> f64 {
    if (m + n) % 2 == 1 {
        return 0.0;
    }
    if r == 0.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    // (m - n)/2 is an integer here; the sum index j runs over
    // j ≥ 0, j ≥ (n - m)/2, 2j ≤ n.
    let half_diff = (m as i64 - n as i64) / 2;
    let j_min = (-half_diff).max(0) as u64;
    let j_max = n / 2;
    let log_half_tanh = (0.5 * r.tanh()).ln();
    let log_half_sinh_sqr = 2.0 * (0.5 * r.sinh()).ln();

    let mut logs = Vec::with_capacity((j_max + 1 - j_min.min(j_max + 1)) as usize);
    let mut signs = Vec::with_capacity(logs.capacity());
    for j in j_min..=j_max {
        let shifted = (j as i64 + half_diff) as u64;
        logs.push(
            -log_factorial(j) - log_factorial(n - 2 * j) - log_factorial(shifted)
                + j as f64 * log_half_sinh_sqr,
        );
        signs.push(if j % 2 == 0 { 1.0 } else { -1.0 });
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let sum: f64 = logs
        .iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - max).exp())
        .sum();
    if sum == 0.0 {
        return 0.0;
    }
    let log_g = 2.0 * (max + sum.abs().ln());
    let log_p = log_factorial(m) + log_factorial(n) - (2 * n + 1) as f64 * r.cosh().ln()
        + (m as f64 - n as f64) * log_half_tanh
        + log_g;
    log_p.exp()
}

// ln cosh x and ln sinh x for x ≥ 0 without overflow.
fn ln_cosh(x: f64) -> f64 {
    x + (-2.0 * x).exp().ln_1p() - LN_2
}

fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - LN_2
    }
}

/// Cat state `(|α> + e^{iδ}|-α>)` normalized, for δ ∈ {0, π, π/2}.
pub fn cat_pn(alpha_mag: f64, delta: f64, n: u64) -> Result<f64> {
    let kind = CatKind::from_delta(delta)?;
    let x = alpha_mag * alpha_mag;
    match kind {
        CatKind::YurkeStoler => Ok(coherent_pn(alpha_mag, n)),
        CatKind::Even => {
            if n % 2 == 1 {
                return Ok(0.0);
            }
            if x == 0.0 {
                return Ok(if n == 0 { 1.0 } else { 0.0 });
            }
            Ok((n as f64 * x.ln() - log_factorial(n) - ln_cosh(x)).exp())
        }
        CatKind::Odd => {
            if x == 0.0 {
                return Err(invalid("alpha_mag", 0.0, "odd cat state needs |α| > 0"));
            }
            if n.is_multiple_of(2) {
                return Ok(0.0);
            }
            Ok((n as f64 * x.ln() - log_factorial(n) - ln_sinh(x)).exp())
        }
    }
}

/// Closed-form mean photon number of `spec`.
pub fn mean_photon(spec: &StateSpec) -> f64 {
    let x = spec.alpha_mag * spec.alpha_mag;
    let sinh_sqr = spec.r.sinh().powi(2);
    match spec.family {
        Family::Thermal => spec.n_th,
        Family::Coherent => x,
        Family::SqueezedVacuum => sinh_sqr,
        Family::SqueezedCoherent => x + sinh_sqr,
        Family::GeneralGaussian => {
            0.5 * ((2.0 * spec.n_th + 1.0) * (2.0 * spec.r).cosh() + 2.0 * x - 1.0)
        }
        Family::SqueezedNumber => spec.m as f64 * (2.0 * spec.r).cosh() + sinh_sqr,
        Family::Cat => cat_mean(x, spec.delta),
    }
}

fn cat_mean(x: f64, delta: f64) -> f64 {
    match CatKind::from_delta(delta) {
        Ok(CatKind::Even) => x * x.tanh(),
        Ok(CatKind::Odd) => {
            if x == 0.0 {
                1.0
            } else {
                x / x.tanh()
            }
        }
        Ok(CatKind::YurkeStoler) => x,
        Err(_) => {
            let overlap = (-2.0 * x).exp() * delta.cos();
            x * (1.0 - overlap) / (1.0 + overlap)
        }
    }
}

/// What to solve for when inverting a target mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateRequest {
    Thermal,
    Coherent,
    SqueezedVacuum,
    /// `z` is the coherent weight `|α|² / N`; `phi` the displacement phase.
    SqueezedCoherent { z: f64, phi: f64 },
    SqueezedNumber { m: u32 },
    Cat { delta: f64 },
}

impl StateRequest {
    pub fn family(&self) -> Family {
        match self {
            StateRequest::Thermal => Family::Thermal,
            StateRequest::Coherent => Family::Coherent,
            StateRequest::SqueezedVacuum => Family::SqueezedVacuum,
            StateRequest::SqueezedCoherent { .. } => Family::SqueezedCoherent,
            StateRequest::SqueezedNumber { .. } => Family::SqueezedNumber,
            StateRequest::Cat { .. } => Family::Cat,
        }
    }
}

/// Finds the state of the requested family with mean photon number `target`.
pub fn solve_params(request: StateRequest, target: f64) -> Result<StateSpec> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Unreachable {
            family: request.family().name(),
            target,
            reason: "target mean photon number must be positive and finite",
        });
    }
    let spec = match request {
        StateRequest::Thermal => StateSpec::thermal(target),
        StateRequest::Coherent => StateSpec::coherent(target.sqrt()),
        StateRequest::SqueezedVacuum => StateSpec::squeezed_vacuum(target.sqrt().asinh()),
        StateRequest::SqueezedCoherent { z, phi } => {
            if !(0.0..=1.0).contains(&z) {
                return Err(invalid("z", z, "coherent weight must lie in [0, 1]"));
            }
            if !phi.is_finite() {
                return Err(invalid("phi", phi, "must be finite"));
            }
            let alpha_mag = (z * target).sqrt();
            let r = ((1.0 - z) * target).sqrt().asinh();
            StateSpec::squeezed_coherent(alpha_mag, phi, r)
        }
        StateRequest::SqueezedNumber { m } => {
            let ratio = (2.0 * target + 1.0) / (2.0 * m as f64 + 1.0);
            if ratio < 1.0 {
                return Err(Error::Unreachable {
                    family: Family::SqueezedNumber.name(),
                    target,
                    reason: "squeezing can only raise the mean photon number above m",
                });
            }
            StateSpec::squeezed_number(m, 0.5 * ratio.acosh())
        }
        StateRequest::Cat { delta } => {
            let kind = CatKind::from_delta(delta)?;
            let x = match kind {
                CatKind::YurkeStoler => target,
                CatKind::Even => bisect_increasing(|x| x * x.tanh(), target),
                CatKind::Odd => {
                    if target < 1.0 {
                        return Err(Error::Unreachable {
                            family: Family::Cat.name(),
                            target,
                            reason: "odd cat states carry at least one photon",
                        });
                    }
                    bisect_increasing(|x| x / x.tanh(), target)
                }
            };
            StateSpec::cat(x.sqrt(), kind.delta())
        }
    };
    Ok(spec)
}

// Bisection on x = |α|² over [1e-12, max(4N, 10)].
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12, (4.0 * target).max(10.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (f(lo) - target).abs() <= (f(hi) - target).abs() {
        lo
    } else {
        hi
    }
}

/// Sequential generator of `p_0, p_1, ...` for one state.
///
/// Families whose formula needs a Hermite recurrence carry it along, so
/// producing the first `n` probabilities costs `O(n)` (`O(n²)` for the
/// general Gaussian, whose inner sum reaches back over all lower degrees).
pub struct PhotonStream {
    n: u64,
    source: Source,
}

enum Source {
    Closed(StateSpec),
    SqueezedCoherent {
        terms: SqueezedCoherentTerms,
        hermite: HermiteRecurrence,
    },
    Gaussian {
        terms: GaussianTerms,
        hermite: HermiteRecurrence,
        log_h_sqr: Vec<f64>,
    },
}

impl PhotonStream {
    pub fn new(spec: &StateSpec) -> Result<Self> {
        spec.validate()?;
        let source = match spec.family {
            Family::SqueezedCoherent if spec.r >= SQUEEZE_EPSILON => {
                let terms = SqueezedCoherentTerms::new(spec.alpha_mag, spec.alpha_phase, spec.r);
                Source::SqueezedCoherent {
                    hermite: HermiteRecurrence::plain(terms.hermite_arg),
                    terms,
                }
            }
            Family::GeneralGaussian => {
                let terms = GaussianTerms::new(spec.n_th, spec.alpha_mag, spec.alpha_phase, spec.r);
                Source::Gaussian {
                    hermite: terms.hermite(),
                    terms,
                    log_h_sqr: Vec::new(),
                }
            }
            _ => Source::Closed(*spec),
        };
        Ok(Self { n: 0, source })
    }
}

impl Iterator for PhotonStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let n = self.n;
        self.n += 1;
        let p = match &mut self.source {
            Source::Closed(spec) => closed_form_pn(spec, n),
            Source::SqueezedCoherent { terms, hermite } => {
                let h = hermite.next().expect("recurrence is infinite");
                if h.is_zero() {
                    0.0
                } else {
                    terms.log_pn(n, h.log_norm_sqr()).exp()
                }
            }
            Source::Gaussian {
                terms,
                hermite,
                log_h_sqr,
            } => {
                log_h_sqr.push(hermite.next().expect("recurrence is infinite").log_norm_sqr());
                terms.pn(n, log_h_sqr)
            }
        };
        Some(p)
    }
}

fn closed_form_pn(spec: &StateSpec, n: u64) -> f64 {
    match spec.family {
        Family::Thermal => thermal_pn(spec.n_th, n).expect("validated spec"),
        Family::Coherent => coherent_pn(spec.alpha_mag, n),
        Family::SqueezedVacuum => squeezed_vacuum_pn(spec.r, n),
        Family::SqueezedCoherent => {
            squeezed_coherent_pn(spec.alpha_mag, spec.alpha_phase, spec.r, n)
        }
        Family::GeneralGaussian => gaussian_pn(spec, n).expect("validated spec"),
        Family::SqueezedNumber => squeezed_number_pn(spec.m as u64, spec.r, n),
        Family::Cat => cat_pn(spec.alpha_mag, spec.delta, n).expect("validated spec"),
    }
}

/// `p_n` for any valid spec.
pub fn photon_probability(spec: &StateSpec, n: u64) -> Result<f64> {
    spec.validate()?;
    Ok(closed_form_pn(spec, n))
}

/// Materializes the distribution of `spec` up to the point where `policy`
/// stops the QFI series.
pub fn build_distribution(spec: &StateSpec, policy: &TruncationPolicy) -> Result<PhotonDistribution> {
    policy.validate()?;
    let stream = PhotonStream::new(spec)?;
    let run = qfi::truncate(stream, policy);
    if !run.converged {
        return Err(Error::CeilingReached {
            ceiling: policy.hard_ceiling,
        });
    }
    Ok(PhotonDistribution {
        cutoff: run.probabilities.len() - 1,
        captured_mass: run.captured_mass,
        probabilities: run.probabilities,
        spec: Some(*spec),
    })
}

/// The first `cutoff + 1` probabilities, with no stopping rule.
pub fn distribution_to_cutoff(spec: &StateSpec, cutoff: usize) -> Result<PhotonDistribution> {
    let probabilities: Vec<f64> = PhotonStream::new(spec)?.take(cutoff + 1).collect();
    Ok(PhotonDistribution {
        cutoff,
        captured_mass: probabilities.iter().sum(),
        probabilities,
        spec: Some(*spec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn thermal_values() {
        assert!(close(thermal_pn(1.0, 0).unwrap(), 0.5, 1e-15));
        assert_eq!(thermal_pn(0.0, 0).unwrap(), 1.0);
        assert!(close(thermal_pn(1.0, 3).unwrap(), 0.0625, 1e-14));
        assert!(thermal_pn(-0.1, 0).is_err());
    }

    #[test]
    fn coherent_values() {
        assert!(close(coherent_pn(1.0, 0), (-1f64).exp(), 1e-14));
        assert_eq!(coherent_pn(0.0, 0), 1.0);
        assert_eq!(coherent_pn(0.0, 3), 0.0);
        assert!(close(coherent_pn(2f64.sqrt(), 2), 2.0 * (-2f64).exp(), 1e-13));
    }

    #[test]
    fn squeezed_vacuum_values() {
        let r = 1f64.asinh();
        assert_eq!(squeezed_vacuum_pn(0.0, 0), 1.0);
        assert!(close(squeezed_vacuum_pn(r, 0), 1.0 / 2f64.sqrt(), 1e-14));
        assert!(close(squeezed_vacuum_pn(r, 2), 0.25 / 2f64.sqrt(), 1e-13));
        assert!((squeezed_vacuum_pn(r, 2) - 0.176777).abs() < 1e-6);
        assert_eq!(squeezed_vacuum_pn(r, 3), 0.0);
    }

    #[test]
    fn squeezed_number_values() {
        let r = 1f64.asinh();
        assert_eq!(squeezed_number_pn(1, 0.0, 1), 1.0);
        assert!(close(squeezed_number_pn(1, r, 1), 1.0 / (2.0 * 2f64.sqrt()), 1e-13));
        for n in (0..40).step_by(2) {
            assert_eq!(squeezed_number_pn(1, 0.7, n), 0.0);
        }
    }

    // The m = 1 special case, written out independently.
    fn squeezed_one_photon(r: f64, n: u64) -> f64 {
        if n.is_multiple_of(2) {
            return 0.0;
        }
        let k = (n - 1) / 2;
        (log_factorial(n) - 2.0 * log_factorial(k) - 3.0 * r.cosh().ln()
            + 2.0 * k as f64 * (0.5 * r.tanh()).ln())
        .exp()
    }

    #[test]
    fn squeezed_number_m1_matches_one_photon_form() {
        for &r in &[0.1, 0.5, 1.3] {
            for n in 0..80 {
                let a = squeezed_number_pn(1, r, n);
                let b = squeezed_one_photon(r, n);
                assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "r={r} n={n}");
            }
        }
    }

    #[test]
    fn cat_values() {
        assert!(close(cat_pn(1.0, 0.0, 0).unwrap(), 1.0 / 1f64.cosh(), 1e-14));
        assert!((cat_pn(1.0, 0.0, 0).unwrap() - 0.648054).abs() < 1e-6);
        assert_eq!(cat_pn(1.0, 0.0, 1).unwrap(), 0.0);
        let a = 3f64.sqrt();
        assert_eq!(cat_pn(a, FRAC_PI_2, 4).unwrap(), coherent_pn(a, 4));
        assert!(matches!(cat_pn(1.0, 1.0, 0), Err(Error::UnsupportedCatPhase(_))));
        assert!(cat_pn(0.0, PI, 1).is_err());
    }

    #[test]
    fn cat_large_amplitude_ratio() {
        // p_even(2n) / p_ys(2n) = 2 / (1 + e^{-2|α|²}) → 2.
        let a = 5.0;
        for n in (10..40).step_by(2) {
            let ratio = cat_pn(a, 0.0, n).unwrap() / cat_pn(a, FRAC_PI_2, n).unwrap();
            assert!((ratio - 2.0).abs() <= 0.1, "n={n}: {ratio}");
        }
    }

    #[test]
    fn mean_photon_examples() {
        assert!(close(mean_photon(&StateSpec::squeezed_vacuum(1f64.asinh())), 1.0, 1e-14));
        assert!(close(mean_photon(&StateSpec::cat(1.0, 0.0)), 1f64.tanh(), 1e-14));
        assert_eq!(mean_photon(&StateSpec::squeezed_number(1, 0.0)), 1.0);
        let g = StateSpec::gaussian(0.5, 2f64.sqrt(), 0.3, 0.6);
        let expected = 0.5 * (2.0 * 1.2f64.cosh() + 4.0 - 1.0);
        assert!(close(mean_photon(&g), expected, 1e-14));
    }

    #[test]
    fn solve_examples() {
        let s = solve_params(StateRequest::SqueezedVacuum, 4.0).unwrap();
        assert!((s.r - 1.443635).abs() < 1e-6);
        assert_eq!(s.r, 2f64.asinh());
        assert_eq!(solve_params(StateRequest::Thermal, 7.0).unwrap().n_th, 7.0);
        let sn = solve_params(StateRequest::SqueezedNumber { m: 1 }, 2.0).unwrap();
        assert!((sn.r - (5.0f64 / 3.0).acosh() / 2.0).abs() < 1e-14);
        assert!((sn.r - 0.549306).abs() < 1e-6);
    }

    #[test]
    fn solve_errors() {
        assert!(matches!(
            solve_params(StateRequest::Cat { delta: PI }, 0.5),
            Err(Error::Unreachable { .. })
        ));
        assert!(matches!(
            solve_params(StateRequest::SqueezedNumber { m: 3 }, 2.0),
            Err(Error::Unreachable { .. })
        ));
        assert!(solve_params(StateRequest::Coherent, 0.0).is_err());
        assert!(solve_params(StateRequest::SqueezedCoherent { z: 1.5, phi: 0.0 }, 2.0).is_err());
        assert!(solve_params(StateRequest::Cat { delta: 0.3 }, 2.0).is_err());
    }

    #[test]
    fn solve_hits_target_mean() {
        let requests = [
            StateRequest::Thermal,
            StateRequest::Coherent,
            StateRequest::SqueezedVacuum,
            StateRequest::SqueezedCoherent { z: 0.3, phi: FRAC_PI_2 },
            StateRequest::SqueezedNumber { m: 1 },
            StateRequest::SqueezedNumber { m: 2 },
            StateRequest::Cat { delta: 0.0 },
            StateRequest::Cat { delta: PI },
            StateRequest::Cat { delta: FRAC_PI_2 },
        ];
        for request in requests {
            for &target in &[1.0, 2.5, 7.0, 20.0, 150.0] {
                let spec = match solve_params(request, target) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                spec.validate().unwrap();
                let mean = mean_photon(&spec);
                assert!(
                    (mean - target).abs() <= 1e-10 * (1.0 + target),
                    "{request:?} N={target}: {mean}"
                );
            }
        }
        let tiny = solve_params(StateRequest::Cat { delta: 0.0 }, 1e-4).unwrap();
        assert!((mean_photon(&tiny) - 1e-4).abs() <= 1e-10);
        let edge = solve_params(StateRequest::Cat { delta: PI }, 1.0).unwrap();
        assert!((mean_photon(&edge) - 1.0).abs() <= 2e-10);
    }

    #[test]
    fn yurke_stoler_solves_like_coherent() {
        let ys = solve_params(StateRequest::Cat { delta: FRAC_PI_2 }, 3.7).unwrap();
        let cs = solve_params(StateRequest::Coherent, 3.7).unwrap();
        assert_eq!(ys.alpha_mag, cs.alpha_mag);
    }

    #[test]
    fn validation_rejects_stray_fields() {
        let mut s = StateSpec::coherent(1.0);
        s.r = 0.2;
        assert!(s.validate().is_err());
        let mut t = StateSpec::squeezed_vacuum(0.4);
        t.chi = 0.1;
        assert!(t.validate().is_err());
        assert!(StateSpec::thermal(-1.0).validate().is_err());
        assert!(StateSpec::cat(1.0, 1.0).validate().is_err());
        assert!(StateSpec::gaussian(0.2, 1.0, 0.3, 0.4).validate().is_ok());
    }

    #[test]
    fn reductions_pointwise() {
        let r = 0.8;
        for n in 0..60 {
            // α = 0 squeezed coherent → squeezed vacuum
            let a = squeezed_coherent_pn(0.0, 0.0, r, n);
            let b = squeezed_vacuum_pn(r, n);
            assert!((a - b).abs() <= 1e-9 * b.max(1e-300) + 1e-300, "n={n}");
            // r → 0 → coherent
            let c = squeezed_coherent_pn(1.7, 0.4, 1e-9, n);
            assert_eq!(c, coherent_pn(1.7, n));
            // m = 0 squeezed number → squeezed vacuum
            let d = squeezed_number_pn(0, r, n);
            assert!((d - b).abs() <= 1e-9 * b.max(1e-300), "n={n}");
            // Gaussian at n_th = 0 → squeezed coherent
            let g = gaussian_pn(&StateSpec::gaussian(0.0, 1.9, 1.1, r), n).unwrap();
            let s = squeezed_coherent_pn(1.9, 1.1, r, n);
            assert!((g - s).abs() <= 1e-9 * s.max(1e-300), "n={n}: {g} vs {s}");
            // Gaussian with α = r = 0 → thermal
            let t = gaussian_pn(&StateSpec::gaussian(1.3, 0.0, 0.0, 0.0), n).unwrap();
            let th = thermal_pn(1.3, n).unwrap();
            assert!((t - th).abs() <= 1e-9 * th, "n={n}");
        }
        assert!(close(
            gaussian_pn(&StateSpec::gaussian(1.0, 0.0, 0.0, 0.0), 0).unwrap(),
            0.5,
            1e-14
        ));
    }

    #[test]
    fn streams_match_point_evaluation() {
        let specs = [
            StateSpec::squeezed_coherent(2.2, FRAC_PI_2, 0.9),
            StateSpec::gaussian(0.5, 1.4, 0.2, 0.6),
            StateSpec::squeezed_number(2, 0.5),
            StateSpec::cat(2.0, PI),
        ];
        for spec in specs {
            let streamed: Vec<f64> = PhotonStream::new(&spec).unwrap().take(60).collect();
            for (n, p) in streamed.iter().enumerate() {
                let q = photon_probability(&spec, n as u64).unwrap();
                assert!((p - q).abs() <= 1e-12 * q.max(1e-300), "{spec:?} n={n}");
            }
        }
    }

    #[test]
    fn normalization_and_means() {
        let specs = [
            StateSpec::thermal(2.0),
            StateSpec::coherent(2.0),
            StateSpec::squeezed_vacuum(1.0),
            StateSpec::squeezed_coherent(1.5, 0.0, 0.7),
            StateSpec::squeezed_coherent(1.5, FRAC_PI_2, 0.7),
            StateSpec::gaussian(0.7, 1.2, 0.9, 0.5),
            StateSpec::squeezed_number(1, 0.8),
            StateSpec::squeezed_number(3, 0.4),
            StateSpec::cat(2.0, 0.0),
            StateSpec::cat(2.0, PI),
            StateSpec::cat(2.0, FRAC_PI_2),
        ];
        for spec in specs {
            let dist = distribution_to_cutoff(&spec, 1500).unwrap();
            assert!(dist.captured_mass >= 1.0 - 1e-6, "{spec:?}");
            assert!(dist.captured_mass <= 1.0 + 1e-12, "{spec:?}");
            let mean = mean_photon(&spec);
            assert!(
                (dist.mean() - mean).abs() <= 1e-6 * mean,
                "{spec:?}: {} vs {mean}",
                dist.mean()
            );
        }
    }

    #[test]
    fn parity_screens_are_exact() {
        let cases = [
            (StateSpec::squeezed_vacuum(1.2), 1u64),
            (StateSpec::cat(1.5, 0.0), 1),
            (StateSpec::cat(1.5, PI), 0),
            (StateSpec::squeezed_number(1, 0.9), 0),
            (StateSpec::squeezed_number(2, 0.9), 1),
        ];
        for (spec, excluded) in cases {
            let dist = distribution_to_cutoff(&spec, 200).unwrap();
            for (n, p) in dist.probabilities.iter().enumerate() {
                if n as u64 % 2 == excluded {
                    assert_eq!(*p, 0.0, "{spec:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn build_distribution_examples() {
        let policy = TruncationPolicy::default();
        let vac = build_distribution(&StateSpec::coherent(0.0), &policy).unwrap();
        assert_eq!(vac.probabilities, vec![1.0]);
        assert_eq!(vac.captured_mass, 1.0);

        let mass_only = TruncationPolicy {
            qfi_rel_increment: 1.0,
            ..TruncationPolicy::default()
        };
        let th = build_distribution(&StateSpec::thermal(1.0), &mass_only).unwrap();
        assert_eq!(th.cutoff, 6);
        assert!((th.captured_mass - 0.9921875).abs() < 1e-15);

        let svs = build_distribution(&StateSpec::squeezed_vacuum(1f64.asinh()), &policy).unwrap();
        assert!(svs.captured_mass >= 0.99);
        assert!(svs.probabilities.iter().skip(1).step_by(2).all(|&p| p == 0.0));

        let tight = TruncationPolicy {
            hard_ceiling: 5,
            ..TruncationPolicy::default()
        };
        assert!(matches!(
            build_distribution(&StateSpec::thermal(5.0), &tight),
            Err(Error::CeilingReached { ceiling: 5 })
        ));
    }

    #[test]
    fn build_distribution_mean_bound() {
        let policy = TruncationPolicy::default();
        let specs = [
            StateSpec::thermal(3.0),
            StateSpec::coherent(2.0),
            StateSpec::squeezed_vacuum(1.2),
            StateSpec::squeezed_number(1, 0.6),
            StateSpec::cat(2.5, 0.0),
        ];
        for spec in specs {
            let d = build_distribution(&spec, &policy).unwrap();
            let bound = (1.0 - d.captured_mass) * (d.cutoff as f64 + 1.0) + 1e-9;
            let deficit = (d.mean() - mean_photon(&spec)).abs();
            assert!(deficit <= bound, "{spec:?}: {deficit:e} > {bound:e}");
        }
    }

    proptest! {
        #[test]
        fn probabilities_are_valid(r in 0.0f64..2.0, a in 0.0f64..3.0, phi in -3.0f64..3.0, n_th in 0.0f64..3.0, n in 0u64..120) {
            let g = gaussian_pn(&StateSpec::gaussian(n_th, a, phi, r), n).unwrap();
            prop_assert!(g.is_finite() && (0.0..=1.0 + 1e-12).contains(&g));
            let s = squeezed_coherent_pn(a, phi, r, n);
            prop_assert!(s.is_finite() && (0.0..=1.0 + 1e-12).contains(&s));
        }

        #[test]
        fn squeezed_number_parity(m in 0u64..8, r in 0.0f64..2.0, n in 0u64..100) {
            let p = squeezed_number_pn(m, r, n);
            if (m + n) % 2 == 1 {
                prop_assert_eq!(p, 0.0);
            } else {
                prop_assert!(p.is_finite() && p >= 0.0);
            }
        }
    }
}
