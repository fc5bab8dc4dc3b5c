//! Log-space scalar kernels shared by every distribution formula.
//!
//! Photon-number probabilities are products of factorials, powers and squared
//! Hermite polynomials whose individual factors leave the range of `f64` long
//! before the probability itself becomes negligible. Everything here returns
//! logarithms (or a log-magnitude/phase pair) so callers can combine terms and
//! exponentiate once at the end.

use std::f64::consts::{LN_2, PI, TAU};
use std::ops::Mul;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TABLE_LEN: usize = 256;

fn log_factorial_table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; TABLE_LEN];
        for k in 2..TABLE_LEN {
            table[k] = table[k - 1] + (k as f64).ln();
        }
        table
    })
}

/// `ln(n!)`.
///
/// Tabulated below 256, Stirling's series with four correction terms above
/// (truncation error below 1e-24 there).
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return log_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (TAU * x).ln() + series
}

/// `ln C(n, k)`. Small `min(k, n-k)` is summed directly to avoid cancelling
/// two large log-factorials.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::BinomialDomain { n, k });
    }
    let k = k.min(n - k);
    if k <= 64 {
        let base = (n - k) as f64;
        return Ok((1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum());
    }
    Ok(log_factorial(n) - log_factorial(k) - log_factorial(n - k))
}

/// A complex number stored as `exp(log_magnitude) * exp(i * phase)`.
///
/// `log_magnitude == -inf` is exact zero. The phase is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: Self = Self {
        log_magnitude: 0.0,
        phase: 0.0,
    };

    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            log_magnitude,
            phase: normalize_phase(phase),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::ZERO;
        }
        Self::new(z.norm().ln(), z.arg())
    }

    /// Converts back; overflows to infinity or underflows to zero when the
    /// magnitude is out of `f64` range.
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }

    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// `ln |z|²`.
    pub fn log_norm_sqr(self) -> f64 {
        2.0 * self.log_magnitude
    }
}

impl Mul for ScaledComplex {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_magnitude + rhs.log_magnitude, self.phase + rhs.phase)
    }
}

fn normalize_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

// Rescale once the running pair leaves [2^-512, 2^512].
const RESCALE_LOG2: f64 = 512.0;

/// Streams `h_m = c^m H_m(e / c)` for `m = 0, 1, 2, ...` where `c² = scale_sqr`.
///
/// The scaled form obeys `h_{m+1} = 2e h_m - 2m c² h_{m-1}`, which stays
/// finite as `c → 0` (where `h_m → (2e)^m`). With `scale_sqr = 1` this is the
/// physicists' Hermite polynomial itself. The pair of live values is rescaled
/// by exact powers of two and the scale carried in log form, so neither
/// overflow nor underflow occurs for any degree.
#[derive(Debug, Clone)]
pub struct HermiteRecurrence {
    e: Complex64,
    scale_sqr: f64,
    prev: Complex64,
    cur: Complex64,
    log_scale: f64,
    degree: u64,
}

impl HermiteRecurrence {
    pub fn new(e: Complex64, scale_sqr: f64) -> Self {
        Self {
            e,
            scale_sqr,
            prev: Complex64::new(0.0, 0.0),
            cur: Complex64::new(1.0, 0.0),
            log_scale: 0.0,
            degree: 0,
        }
    }

    /// Plain Hermite polynomials `H_m(x)`.
    pub fn plain(x: Complex64) -> Self {
        Self::new(x, 1.0)
    }

    fn current(&self) -> ScaledComplex {
        let z = ScaledComplex::from_complex(self.cur);
        if z.is_zero() {
            z
        } else {
            ScaledComplex::new(z.log_magnitude + self.log_scale, z.phase)
        }
    }

    fn advance(&mut self) {
        let m = self.degree as f64;
        let next = 2.0 * self.e * self.cur - 2.0 * m * self.scale_sqr * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.degree += 1;

        let big = self.prev.norm().max(self.cur.norm());
        if big == 0.0 || !big.is_finite() {
            return;
        }
        let exponent = big.log2().floor();
        if exponent.abs() > RESCALE_LOG2 {
            let factor = (-exponent).exp2();
            self.prev *= factor;
            self.cur *= factor;
            self.log_scale += exponent * LN_2;
        }
    }
}

impl Iterator for HermiteRecurrence {
    type Item = ScaledComplex;

    fn next(&mut self) -> Option<ScaledComplex> {
        let out = self.current();
        self.advance();
        Some(out)
    }
}

/// `H_n(x)` evaluated by the three-term recurrence.
pub fn hermite(n: u64, x: Complex64) -> ScaledComplex {
    HermiteRecurrence::plain(x)
        .nth(n as usize)
        .expect("recurrence is infinite")
}

/// `ln Σ exp(terms)`, ignoring `-inf` entries; `-inf` for an empty or all-zero sum.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Direct finite sum H_n(x) = Σ_j (-1)^j n! / (j! (n-2j)!) (2x)^(n-2j),
    // evaluated exactly in rationals (every f64 is a dyadic rational) and
    // rounded once at the end, so cancellation cannot hide recurrence errors.
    fn hermite_direct(n: u64, x: Complex64) -> Complex64 {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use num_traits::{ToPrimitive, Zero};

        type Pair = (BigRational, BigRational);
        fn mul(a: &Pair, b: &Pair) -> Pair {
            (
                &a.0 * &b.0 - &a.1 * &b.1,
                &a.0 * &b.1 + &a.1 * &b.0,
            )
        }
        let two_x: Pair = (
            BigRational::from_float(2.0 * x.re).unwrap(),
            BigRational::from_float(2.0 * x.im).unwrap(),
        );
        let mut powers: Vec<Pair> = vec![(BigRational::from_integer(1.into()), BigRational::zero())];
        for _ in 0..n {
            let next = mul(powers.last().unwrap(), &two_x);
            powers.push(next);
        }
        let factorial = |k: u64| (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i));
        let (mut re, mut im) = (BigRational::zero(), BigRational::zero());
        for j in 0..=n / 2 {
            let mut coeff = factorial(n) / (factorial(j) * factorial(n - 2 * j));
            if j % 2 == 1 {
                coeff = -coeff;
            }
            let c = BigRational::from_integer(coeff);
            let p = &powers[(n - 2 * j) as usize];
            re += &c * &p.0;
            im += &c * &p.1;
        }
        Complex64::new(re.to_f64().unwrap(), im.to_f64().unwrap())
    }

    fn kahan_log_factorial(n: u64) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 2..=n {
            let y = (k as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert!((log_factorial(10) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((log_factorial(10) - 15.104412573).abs() < 1e-9);
    }

    #[test]
    fn log_factorial_matches_compensated_sum() {
        for n in [255u64, 256, 257, 1000, 12_345, 1_000_000] {
            let exact = kahan_log_factorial(n);
            let rel = (log_factorial(n) - exact).abs() / exact;
            assert!(rel <= 1e-12, "n = {n}: rel err {rel:e}");
        }
    }

    #[test]
    fn log_factorial_increments() {
        for n in 1..=1000u64 {
            let step = log_factorial(n) - log_factorial(n - 1);
            let ln_n = (n as f64).ln();
            assert!((step - ln_n).abs() <= 1e-12 * ln_n.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn log_binomial_values() {
        assert_eq!(log_binomial(5, 0).unwrap(), 0.0);
        assert!((log_binomial(4, 2).unwrap() - 6f64.ln()).abs() < 1e-13);
        assert!((log_binomial(20, 10).unwrap() - 184_756f64.ln()).abs() < 1e-12 * 12.2);
        assert!((log_binomial(1_000_000, 1).unwrap() - 1e6f64.ln()).abs() < 1e-12 * 13.9);
        assert_eq!(
            log_binomial(3, 4),
            Err(Error::BinomialDomain { n: 3, k: 4 })
        );
    }

    #[test]
    fn hermite_low_degrees() {
        let h0 = hermite(0, Complex64::new(0.3, -1.2));
        assert_eq!(h0, ScaledComplex::ONE);
        let h1 = hermite(1, Complex64::new(2.0, 0.0)).to_complex();
        assert!((h1 - Complex64::new(4.0, 0.0)).norm() < 1e-14);
        let h3 = hermite(3, Complex64::new(1.0, 0.0)).to_complex();
        assert!((h3 - Complex64::new(-4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn hermite_recurrence_matches_direct_sum() {
        let mut points = Vec::new();
        for re in [-3.0, -1.25, 0.0, 0.8, 2.5] {
            for im in [-2.0, -0.5, 0.5, 1.5, 3.0] {
                points.push(Complex64::new(re, im));
            }
        }
        for &(re, im) in &[(6.0, 0.0), (-8.0, 1.0), (9.9, 0.4), (0.0, 7.0), (-4.0, -6.0)] {
            points.push(Complex64::new(re, im));
        }
        for k in 0..20 {
            let t = k as f64 * 0.31;
            points.push(Complex64::from_polar(1.0 + 0.4 * k as f64, t));
        }
        assert_eq!(points.len(), 50);
        for n in 0..=30u64 {
            for &x in &points {
                let direct = hermite_direct(n, x);
                let fast = hermite(n, x).to_complex();
                let rel = (fast - direct).norm() / direct.norm();
                assert!(rel <= 1e-9, "n = {n}, x = {x}: rel err {rel:e}");
            }
        }
    }

    #[test]
    fn hermite_survives_overflowing_degrees() {
        // H_n(x) ~ (2x)^n: at n = 400, x = 10 the raw value is ~1e520.
        let h = hermite(400, Complex64::new(10.0, 0.0));
        assert!(h.log_magnitude.is_finite());
        assert!(h.log_magnitude > 400.0 * 20f64.ln() - 50.0);
    }

    #[test]
    fn scaled_recurrence_at_zero_scale_is_a_power() {
        let e = Complex64::new(0.7, -0.2);
        let values: Vec<_> = HermiteRecurrence::new(e, 0.0).take(12).collect();
        for (m, v) in values.iter().enumerate() {
            let expected = (2.0 * e).powu(m as u32);
            assert!((v.to_complex() - expected).norm() <= 1e-13 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn phase_is_normalized() {
        let z = ScaledComplex::new(0.0, -PI);
        assert_eq!(z.phase, PI);
        let w = ScaledComplex::new(1.0, 3.0 * PI + 0.25);
        assert!((w.phase - (-PI + 0.25)).abs() < 1e-12);
        assert!(ScaledComplex::new(f64::NEG_INFINITY, 1.0).is_zero());
    }

    #[test]
    fn log_sum_exp_handles_zeros() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + LN_2)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hermite_parity(n in 0u64..40, re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let x = Complex64::new(re, im);
            let plus = hermite(n, x);
            let minus = hermite(n, -x);
            prop_assume!(!plus.is_zero());
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let a = plus.to_complex() * sign;
            let b = minus.to_complex();
            prop_assert!((a - b).norm() <= 1e-9 * a.norm());
        }
    }
}
