//! Arithmetic on the circle group ℝ/ℤ.
//!
//! Eigenphases of unitaries live here: `U ξ = e^{2πiλ} ξ` determines λ only
//! modulo 1. [`CircleAngle`] stores the representative in `[0, 1)`; the
//! absolute value `|λ| = min_n |x + n|` and the induced metric are what all
//! spectral estimates are phrased in.
//!
//! The integer `N_d = 3^d · lcm{3^1 − 2^1, …, 3^d − 2^d}` and the derived
//! thresholds are kept as arbitrary-precision integers because they outgrow
//! 64 bits around d = 10.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Complex;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of ℝ/ℤ, stored as its representative in `[0, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct CircleAngle(f64);

impl CircleAngle {
    pub const ZERO: CircleAngle = CircleAngle(0.0);

    pub fn new(x: f64) -> Self {
        debug_assert!(x.is_finite(), "circle angle from non-finite value {x}");
        let mut v = x - x.floor();
        // x slightly below an integer rounds up to exactly 1.0
        if v >= 1.0 {
            v = 0.0;
        }
        CircleAngle(v)
    }

    /// Eigenphase of a unit-modulus complex number, `z = e^{2πiλ}`.
    pub fn from_phase(z: Complex<f64>) -> Self {
        Self::new(z.arg() / std::f64::consts::TAU)
    }

    /// `e^{2πiλ}`.
    pub fn to_phase(self) -> Complex<f64> {
        Complex::from_polar(1.0, std::f64::consts::TAU * self.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn abs(self) -> f64 {
        circle_abs(self)
    }

    pub fn dist(self, other: CircleAngle) -> f64 {
        circle_dist(self, other)
    }

    /// Representative in `(−1/2, 1/2]`.
    pub fn centered(self) -> f64 {
        if self.0 > 0.5 {
            self.0 - 1.0
        } else {
            self.0
        }
    }
}

impl From<f64> for CircleAngle {
    fn from(x: f64) -> Self {
        CircleAngle::new(x)
    }
}

impl From<CircleAngle> for f64 {
    fn from(a: CircleAngle) -> f64 {
        a.0
    }
}

impl fmt::Display for CircleAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for CircleAngle {
    type Output = CircleAngle;
    fn add(self, rhs: CircleAngle) -> CircleAngle {
        CircleAngle::new(self.0 + rhs.0)
    }
}

impl Sub for CircleAngle {
    type Output = CircleAngle;
    fn sub(self, rhs: CircleAngle) -> CircleAngle {
        CircleAngle::new(self.0 - rhs.0)
    }
}

impl Neg for CircleAngle {
    type Output = CircleAngle;
    fn neg(self) -> CircleAngle {
        CircleAngle::new(-self.0)
    }
}

impl Mul<i64> for CircleAngle {
    type Output = CircleAngle;
    fn mul(self, n: i64) -> CircleAngle {
        CircleAngle::new(self.0 * n as f64)
    }
}

/// `|[x]| = min_n |x + n|`, always in `[0, 1/2]`.
pub fn circle_abs(a: CircleAngle) -> f64 {
    a.0.min(1.0 - a.0)
}

/// Symmetric in its arguments, bit for bit.
pub fn circle_dist(a: CircleAngle, b: CircleAngle) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(1.0 - d)
}

/// A reduced element of ℚ/ℤ, `numerator / denominator` with
/// `0 ≤ numerator < denominator`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    numerator: BigUint,
    denominator: BigUint,
}

impl RationalAngle {
    pub fn new(numerator: BigInt, denominator: BigUint) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let den = BigInt::from_biguint(Sign::Plus, denominator);
        let num = numerator.mod_floor(&den);
        let g = num.gcd(&den);
        let (num, den) = if num.is_zero() {
            (num, BigInt::one())
        } else {
            (num / &g, den / &g)
        };
        Ok(RationalAngle {
            numerator: num.to_biguint().expect("non-negative after mod_floor"),
            denominator: den.to_biguint().expect("positive"),
        })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn to_circle(&self) -> CircleAngle {
        let r = BigRational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::from(self.denominator.clone()),
        );
        CircleAngle::new(r.to_f64().unwrap_or(0.0))
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Nearest point of the lattice `(1/q)ℤ` to an angle, with the numerator left
/// unreduced modulo `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct NearestNumerator {
    /// Canonical numerator in `0..q`.
    pub numerator: BigUint,
    /// Circle distance from the angle to `numerator / q`.
    pub residual: f64,
    /// The angle sat on a midpoint (to within its own rounding).
    pub tie: bool,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Distance from `a` to the next double above it.
fn ulp(a: f64) -> f64 {
    f64::from_bits(a.to_bits() + 1) - a
}

/// Finds `μ` minimizing the circle distance from `a` to `μ/q`.
///
/// The computation is exact on the rational value of the double `a`. Two
/// conventions absorb the rounding already present in `a`:
/// * when `a` lies within half an ulp of a midpoint between two candidates the
///   smaller canonical numerator wins;
/// * the residual is reported as exactly zero when `a` is within half an ulp
///   of `μ/q`, i.e. `a` is the double nearest to `μ/q`.
pub fn nearest_numerator(a: CircleAngle, q: &BigUint) -> NearestNumerator {
    assert!(!q.is_zero(), "denominator must be positive");
    let q_int = BigInt::from(q.clone());
    let q_rat = BigRational::from_integer(q_int.clone());
    let x = exact(a.value()) * &q_rat;
    let floor = x.floor();
    let lo = &x - &floor;
    let hi = (&floor + BigRational::one()) - &x;
    let tol = exact(ulp(a.value())) * &q_rat;

    let floor_int = floor.to_integer();
    let canon = |n: &BigInt| n.mod_floor(&q_int);
    let lo_mu = canon(&floor_int);
    let hi_mu = canon(&(&floor_int + BigInt::one()));

    let tie = (&lo - &hi).abs() <= tol;
    let (mu, dist) = if tie {
        if lo_mu <= hi_mu {
            (lo_mu, lo)
        } else {
            (hi_mu, hi)
        }
    } else if lo < hi {
        (lo_mu, lo)
    } else {
        (hi_mu, hi)
    };

    let two = BigRational::from_integer(BigInt::from(2));
    let residual = if &dist * &two <= tol {
        0.0
    } else {
        (dist / q_rat).to_f64().unwrap_or(0.0)
    };
    NearestNumerator {
        numerator: mu.to_biguint().expect("canonical numerator is non-negative"),
        residual,
        tie,
    }
}

/// Best approximation of `a` by a rational with denominator `q`, reduced.
/// Returns the rational and its circle distance to `a` (at most `1/(2q)`).
pub fn best_rational(a: CircleAngle, q: &BigUint) -> Result<(RationalAngle, f64)> {
    if q.is_zero() {
        return Err(Error::InvalidArgument("denominator must be positive".into()));
    }
    let near = nearest_numerator(a, q);
    let r = RationalAngle::new(BigInt::from(near.numerator), q.clone())?;
    Ok((r, near.residual))
}

/// Modular inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_zero() {
        return None;
    }
    let egcd = a.mod_floor(m).extended_gcd(m);
    if !egcd.gcd.is_one() {
        return None;
    }
    Some(egcd.x.mod_floor(m))
}

/// The numerator `μ₁` with `2μ₁ ≡ 3μ₀ (mod n)`; unique because `n` is odd.
pub fn three_halves_numerator(mu: &BigUint, n: &BigUint) -> BigUint {
    assert!(n.is_odd(), "three-halves map needs an odd modulus");
    // 2⁻¹ ≡ (n + 1)/2 mod n
    let half = (n + 1u32) >> 1;
    (mu * 3u32 * half) % n
}

/// `N_d = 3^d · lcm{3^i − 2^i : 1 ≤ i ≤ d}`.
pub fn n_d(d: u32) -> BigUint {
    let three = BigUint::from(3u32);
    let two = BigUint::from(2u32);
    let mut l = BigUint::one();
    for i in 1..=d {
        l = l.lcm(&(three.pow(i) - two.pow(i)));
    }
    three.pow(d) * l
}

/// The integers and thresholds attached to a dimension bound `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessConstants {
    pub d: u32,
    pub n_d: BigUint,
    /// `6 · 3^d · d · N_d`; the relation-defect threshold is its reciprocal.
    pub threshold_denominator: BigUint,
    /// `4 d³ N_d`, exact.
    pub bound_coefficient_exact: BigUint,
    /// `1 / (6 · 3^d · d · N_d)` in double precision (zero once it underflows).
    pub epsilon_threshold: f64,
    /// `4 d³ N_d` in double precision.
    pub bound_coefficient: f64,
}

impl WitnessConstants {
    pub fn compute(d: i64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument(format!("dimension bound must be >= 1, got {d}")));
        }
        let d = u32::try_from(d).map_err(|_| Error::InvalidArgument(format!("dimension bound {d} too large")))?;
        let n = n_d(d);
        let threshold_denominator = BigUint::from(6u32) * BigUint::from(3u32).pow(d) * d * &n;
        let bound_coefficient_exact = BigUint::from(4u32) * BigUint::from(d).pow(3) * &n;
        let den = threshold_denominator.to_f64().unwrap_or(f64::INFINITY);
        Ok(WitnessConstants {
            d,
            epsilon_threshold: 1.0 / den,
            bound_coefficient: bound_coefficient_exact.to_f64().unwrap_or(f64::INFINITY),
            n_d: n,
            threshold_denominator,
            bound_coefficient_exact,
        })
    }

    /// `ε < 1/(6·3^d·d·N_d)`, decided on the exact value of the double `ε`.
    pub fn below_threshold(&self, epsilon: f64) -> bool {
        if !epsilon.is_finite() {
            return false;
        }
        let lhs = exact(epsilon) * BigRational::from_integer(BigInt::from(self.threshold_denominator.clone()));
        lhs < BigRational::one()
    }

    pub fn threshold_string(&self) -> String {
        format!("1/{}", self.threshold_denominator)
    }

    /// `3^k (3^n − 2^n)`, the denominators the spectral chain produces.
    pub fn chain_denominator(k: u32, n: u32) -> BigUint {
        BigUint::from(3u32).pow(k) * (BigUint::from(3u32).pow(n) - BigUint::from(2u32).pow(n))
    }

    pub fn to_record(&self) -> ConstantsRecord {
        ConstantsRecord {
            d: self.d,
            n_d: self.n_d.to_string(),
            epsilon_threshold: self.threshold_string(),
            epsilon_threshold_f64: self.epsilon_threshold,
            bound_coefficient: self.bound_coefficient_exact.to_string(),
            bound_coefficient_f64: self.bound_coefficient,
        }
    }
}

/// Serialized form: exact decimal strings next to their double approximations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub d: u32,
    pub n_d: String,
    pub epsilon_threshold: String,
    pub epsilon_threshold_f64: f64,
    pub bound_coefficient: String,
    pub bound_coefficient_f64: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn abs_examples() {
        assert_eq!(circle_abs(CircleAngle::new(0.0)), 0.0);
        assert_eq!(circle_abs(CircleAngle::new(0.75)), 0.25);
        assert_eq!(circle_abs(CircleAngle::new(0.5)), 0.5);
        assert_eq!(circle_abs(CircleAngle::new(-0.25)), 0.25);
    }

    #[test]
    fn dist_examples() {
        let d = circle_dist(CircleAngle::new(0.1), CircleAngle::new(0.9));
        assert!((d - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(CircleAngle::new(0.3), CircleAngle::new(0.3)), 0.0);
        assert_eq!(circle_dist(CircleAngle::new(0.0), CircleAngle::new(0.5)), 0.5);
    }

    #[test]
    fn canonical_range() {
        assert_eq!(CircleAngle::new(1.0).value(), 0.0);
        assert_eq!(CircleAngle::new(-1e-20).value(), 0.0);
        assert_eq!(CircleAngle::new(2.25).value(), 0.25);
        assert_eq!((CircleAngle::new(0.75) + CircleAngle::new(0.5)).value(), 0.25);
        assert_eq!((CircleAngle::new(0.2) * 5).value(), 0.0);
        assert_eq!((-CircleAngle::new(0.25)).value(), 0.75);
    }

    #[test]
    fn best_rational_examples() {
        let (r, res) = best_rational(CircleAngle::new(0.2), &q(5)).unwrap();
        assert_eq!(r.to_string(), "1/5");
        assert_eq!(res, 0.0);

        let (r, res) = best_rational(CircleAngle::new(0.49), &q(2)).unwrap();
        assert_eq!(r.to_string(), "1/2");
        assert!((res - 0.01).abs() < 1e-15);

        let (r, res) = best_rational(CircleAngle::new(0.1), &q(5)).unwrap();
        assert_eq!(r.to_string(), "0/1");
        assert!((res - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tie_across_wraparound_prefers_zero() {
        // 0.9 sits between 4/5 and 5/5 ≡ 0
        let near = nearest_numerator(CircleAngle::new(0.9), &q(5));
        assert!(near.tie);
        assert_eq!(near.numerator, q(0));
    }

    #[test]
    fn best_rational_rejects_zero_denominator() {
        assert!(best_rational(CircleAngle::new(0.3), &q(0)).is_err());
    }

    #[test]
    fn rational_angle_reduces() {
        let r = RationalAngle::new(BigInt::from(-6), q(15)).unwrap();
        assert_eq!(r.to_string(), "3/5");
        assert!((r.to_circle().value() - 0.6).abs() < 1e-16);
    }

    #[test]
    fn constants_small_d() {
        assert_eq!(n_d(1), q(3));
        assert_eq!(n_d(3), q(2565));
        assert_eq!(n_d(4), q(100035));
        let c = WitnessConstants::compute(3).unwrap();
        assert_eq!(c.threshold_string(), "1/1246590");
        assert_eq!(c.bound_coefficient_exact, q(277020));
        assert!(WitnessConstants::compute(0).is_err());
        assert!(WitnessConstants::compute(-2).is_err());
    }

    #[test]
    fn threshold_comparison_is_exact() {
        let c = WitnessConstants::compute(3).unwrap();
        assert!(c.below_threshold(0.0));
        assert!(c.below_threshold(8.0e-7));
        assert!(!c.below_threshold(8.1e-7));
        assert!(!c.below_threshold(f64::NAN));
    }

    #[test]
    fn n_d_parity_and_divisibility() {
        for d in 1..=8u32 {
            let n = n_d(d);
            assert!(n.is_odd(), "N_{d} even");
            for n_len in 1..=d {
                for k in 0..=(d - n_len) {
                    let div = WitnessConstants::chain_denominator(k, n_len);
                    assert!(
                        (&n % &div).is_zero(),
                        "3^{k}(3^{n_len}-2^{n_len}) does not divide N_{d}"
                    );
                }
            }
        }
    }

    #[test]
    fn three_halves_on_pentagon() {
        let n = q(2565);
        assert_eq!(three_halves_numerator(&q(513), &n), q(2052));
        assert_eq!(three_halves_numerator(&q(2052), &n), q(513));
        assert_eq!(three_halves_numerator(&q(0), &n), q(0));
    }

    #[test]
    fn inverse_mod() {
        assert_eq!(mod_inverse(&BigInt::from(3), &BigInt::from(7)), Some(BigInt::from(5)));
        assert_eq!(mod_inverse(&BigInt::from(3), &BigInt::from(9)), None);
    }

    proptest! {
        #[test]
        fn abs_bounds_and_triangle(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (a, b) = (CircleAngle::new(a), CircleAngle::new(b));
            prop_assert!((0.0..=0.5).contains(&a.abs()));
            prop_assert!((a + b).abs() <= a.abs() + b.abs() + 1e-15);
        }

        #[test]
        fn best_rational_residual_bound(a in 0.0f64..1.0, q in 1u64..10_000) {
            let near = nearest_numerator(CircleAngle::new(a), &BigUint::from(q));
            prop_assert!(near.residual <= 0.5 / q as f64 * (1.0 + 1e-12));
            prop_assert!(near.numerator < BigUint::from(q));
        }

        #[test]
        fn representable_rationals_have_zero_residual(num in 0u64..1000, q in 1u64..1000) {
            let num = num % q;
            let a = CircleAngle::new(num as f64 / q as f64);
            let near = nearest_numerator(a, &BigUint::from(q));
            prop_assert_eq!(near.residual, 0.0);
            prop_assert_eq!(near.numerator, BigUint::from(num));
        }
    }
}
