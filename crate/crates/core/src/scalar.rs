//! Exact scalars: rationals and real quadratic surds.
//!
//! Every real quantity in this crate is an element of `Q` or of a real
//! quadratic field `Q(sqrt(d))`, stored as `u + v*sqrt(d)` with arbitrary
//! precision rational `u`, `v` and a square-free radicand `d`. The canonical
//! form makes structural equality coincide with value equality:
//!
//! * `d` is square-free, and `d = 0` exactly when `v = 0`;
//! * rationals are kept reduced with positive denominator (via [`BigRational`]).
//!
//! Only one radicand is allowed per computation context. Combining scalars
//! over distinct radicands (say `sqrt(2)` and `sqrt(3)`) is an error rather
//! than a silent coercion, which keeps ordering and equality decidable.
//!
//! The text grammar accepted by [`ExactScalar::parse`] (whitespace is
//! ignored, radicands are capped at [`MAX_RADICAND`]):
//!
//! ```text
//! scalar := rat | rat sign rat "*sqrt(" uint ")"
//! rat    := ["-"] uint ["/" uint]
//! sign   := "+" | "-"
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest accepted radicand. Square-free extraction trial-divides up to
/// `sqrt(MAX_RADICAND) = 10^6`, so canonicalization stays exact for every
/// accepted input.
pub const MAX_RADICAND: u64 = 1_000_000_000_000;

/// An element `u + v*sqrt(d)` of `Q` or a real quadratic field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    u: BigRational,
    v: BigRational,
    d: u64,
}

fn big_rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Splits `n` as `s^2 * d` with `d` square-free.
fn square_free_decompose(n: u64) -> Result<(u64, u64)> {
    if n > MAX_RADICAND {
        return Err(Error::RadicandTooLarge(n, MAX_RADICAND));
    }
    let mut rest = n;
    let mut square = 1u64;
    let mut free = 1u64;
    let mut f = 2u64;
    while f * f <= rest {
        if rest % f == 0 {
            let mut count = 0u32;
            while rest % f == 0 {
                rest /= f;
                count += 1;
            }
            square *= f.pow(count / 2);
            if count % 2 == 1 {
                free *= f;
            }
        }
        f += 1;
    }
    free *= rest;
    Ok((square, free))
}

impl ExactScalar {
    /// The rational `num / den`.
    ///
    /// Panics if `den == 0`.
    pub fn rational(num: i64, den: i64) -> Self {
        Self::from_big_rational(big_rational(num, den))
    }

    /// The integer `n`.
    pub fn integer(n: i64) -> Self {
        Self::from_big_rational(BigRational::from(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn from_big_rational(u: BigRational) -> Self {
        ExactScalar {
            u,
            v: BigRational::zero(),
            d: 0,
        }
    }

    /// The canonical form of `u + v*sqrt(radicand)`.
    ///
    /// Square factors are extracted from the radicand at construction, so
    /// `sqrt(8)` is stored as `2*sqrt(2)` and `sqrt(9)` collapses to the
    /// rational `3`.
    pub fn surd(u: BigRational, v: BigRational, radicand: u64) -> Result<Self> {
        if v.is_zero() || radicand == 0 {
            return Ok(Self::from_big_rational(u));
        }
        let (square, free) = square_free_decompose(radicand)?;
        let v = v * BigRational::from(BigInt::from(square));
        if free == 1 {
            Ok(Self::from_big_rational(u + v))
        } else {
            Ok(ExactScalar { u, v, d: free })
        }
    }

    /// `sqrt(radicand)` itself.
    pub fn sqrt_of(radicand: u64) -> Result<Self> {
        Self::surd(BigRational::zero(), BigRational::one(), radicand)
    }

    /// Rational part (coefficient of `1`).
    pub fn u(&self) -> &BigRational {
        &self.u
    }

    /// Surd coefficient (coefficient of `sqrt(d)`).
    pub fn v(&self) -> &BigRational {
        &self.v
    }

    /// Square-free radicand; `0` for rationals.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.v.is_zero()
    }

    /// The value as a rational, when it is one.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.u)
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.u.is_integer()
    }

    /// Merged radicand for a binary operation, or the incompatibility error.
    fn joint_radicand(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::IncompatibleRadicands(a, b)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.joint_radicand(other)?;
        let v = &self.v + &other.v;
        Ok(if v.is_zero() {
            Self::from_big_rational(&self.u + &other.u)
        } else {
            ExactScalar {
                u: &self.u + &other.u,
                v,
                d,
            }
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.clone().neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.joint_radicand(other)?;
        let radicand = BigRational::from(BigInt::from(d));
        let u = &self.u * &other.u + (&self.v * &other.v) * radicand;
        let v = &self.u * &other.v + &self.v * &other.u;
        Ok(if v.is_zero() {
            Self::from_big_rational(u)
        } else {
            ExactScalar { u, v, d }
        })
    }

    /// Exact division, rationalizing by the conjugate when the divisor is a
    /// surd. Divisor must be nonzero and share the radicand.
    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = self.joint_radicand(other)?;
        if other.is_rational() {
            let u = &self.u / &other.u;
            let v = &self.v / &other.u;
            return Ok(if v.is_zero() {
                Self::from_big_rational(u)
            } else {
                ExactScalar { u, v, d }
            });
        }
        // (a + b*s) / (c + e*s) = (a + b*s)(c - e*s) / (c^2 - e^2 d)
        let radicand = BigRational::from(BigInt::from(d));
        let norm = &other.u * &other.u - (&other.v * &other.v) * &radicand;
        debug_assert!(!norm.is_zero(), "nonzero surd has nonzero norm");
        let u = (&self.u * &other.u - (&self.v * &other.v) * &radicand) / &norm;
        let v = (&self.v * &other.u - &self.u * &other.v) / &norm;
        Ok(if v.is_zero() {
            Self::from_big_rational(u)
        } else {
            ExactScalar { u, v, d }
        })
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            self.clone().neg()
        } else {
            self.clone()
        }
    }

    /// Exact sign of `u + v*sqrt(d)`: `-1`, `0` or `1`.
    ///
    /// For mixed-sign coefficients the sign is decided by comparing `u^2`
    /// against `v^2 d`; equality cannot occur for `d` square-free unless both
    /// coefficients vanish.
    pub fn sign(&self) -> i32 {
        let su = rational_sign(&self.u);
        if self.v.is_zero() {
            return su;
        }
        let sv = rational_sign(&self.v);
        if su == 0 {
            return sv;
        }
        if su == sv {
            return su;
        }
        let u2 = &self.u * &self.u;
        let v2d = (&self.v * &self.v) * BigRational::from(BigInt::from(self.d));
        match u2.cmp(&v2d) {
            Ordering::Greater => su,
            Ordering::Less => sv,
            Ordering::Equal => unreachable!("u^2 = v^2 d forces sqrt(d) rational"),
        }
    }

    /// Exact three-way comparison; errors on incompatible radicands.
    pub fn cmp_checked(&self, other: &Self) -> Result<Ordering> {
        let diff = self.checked_sub(other)?;
        Ok(match diff.sign() {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    pub fn min_checked(&self, other: &Self) -> Result<Self> {
        Ok(match self.cmp_checked(other)? {
            Ordering::Greater => other.clone(),
            _ => self.clone(),
        })
    }

    pub fn max_checked(&self, other: &Self) -> Result<Self> {
        Ok(match self.cmp_checked(other)? {
            Ordering::Less => other.clone(),
            _ => self.clone(),
        })
    }

    /// Largest integer `n` with `n <= self`, computed exactly (a float seed
    /// corrected by exact comparisons).
    pub fn floor_int(&self) -> BigInt {
        if self.is_rational() {
            return self.u.floor().to_integer();
        }
        let seed = self.to_f64();
        let mut n = if seed.is_finite() {
            BigInt::from(seed.floor() as i128)
        } else {
            BigInt::zero()
        };
        // The float seed is within a few ulps; walk to the exact floor.
        let mut guard = 0u32;
        while self.cmp_big_int(&n) == Ordering::Less {
            n -= 1;
            guard += 1;
            if guard > 64 {
                return self.floor_int_bisect();
            }
        }
        while self.cmp_big_int(&(&n + 1)) != Ordering::Less {
            n += 1;
            guard += 1;
            if guard > 64 {
                return self.floor_int_bisect();
            }
        }
        n
    }

    fn cmp_big_int(&self, n: &BigInt) -> Ordering {
        let diff = ExactScalar {
            u: &self.u - BigRational::from(n.clone()),
            v: self.v.clone(),
            d: self.d,
        };
        match diff.sign() {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Fallback exact floor by bisection between coarse integer bounds.
    fn floor_int_bisect(&self) -> BigInt {
        let bound = self.u.abs().ceil().to_integer()
            + (self.v.abs().ceil().to_integer() + 1) * BigInt::from(self.d + 1);
        let mut lo = -&bound;
        let mut hi = bound;
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) / 2;
            if self.cmp_big_int(&mid) == Ordering::Less {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Writes `self = k1 + k2 * y` over the rationals, for `y` a quadratic
    /// irrational sharing the radicand (or with `self` rational). Returns
    /// `(k1, k2)`; the decomposition is unique since `{1, y}` is a `Q`-basis.
    pub fn decompose_over(&self, y: &Self) -> Result<(BigRational, BigRational)> {
        if y.is_rational() {
            return Err(Error::InvalidArgument(
                "decompose_over requires an irrational basis element".into(),
            ));
        }
        self.joint_radicand(y)?;
        let k2 = &self.v / &y.v;
        let k1 = &self.u - &k2 * &y.u;
        Ok((k1, k2))
    }

    /// Float approximation; rendering only, never used for decisions.
    pub fn to_f64(&self) -> f64 {
        let u = self.u.to_f64().unwrap_or(f64::NAN);
        if self.v.is_zero() {
            return u;
        }
        let v = self.v.to_f64().unwrap_or(f64::NAN);
        u + v * (self.d as f64).sqrt()
    }

    /// Parses the scalar grammar documented at module level.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = compact.as_str();
        if s.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        if let Some(idx) = s.find("*sqrt(") {
            if !s.ends_with(')') {
                return Err(Error::Parse(format!("missing ')' in {text:?}")));
            }
            let radicand: u64 = s[idx + 6..s.len() - 1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad radicand in {text:?}")))?;
            let head = &s[..idx];
            // Split u and v at the sign separating the two rationals.
            let mut split = None;
            for (i, c) in head.char_indices().skip(1) {
                if (c == '+' || c == '-') && !head[..i].ends_with(['+', '-']) {
                    split = Some(i);
                }
            }
            let i = split
                .ok_or_else(|| Error::Parse(format!("missing sign before surd in {text:?}")))?;
            let u = parse_rational(&head[..i])?;
            let sign = if head.as_bytes()[i] == b'-' { -1 } else { 1 };
            let v = parse_rational(&head[i + 1..])? * BigRational::from(BigInt::from(sign));
            Self::surd(u, v, radicand)
        } else {
            Ok(Self::from_big_rational(parse_rational(s)?))
        }
    }
}

fn rational_sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("bad rational literal {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if body.is_empty() {
        return Err(err());
    }
    let (num_s, den_s) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    if !num_s.bytes().all(|b| b.is_ascii_digit()) || !den_s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let num: BigUint = num_s.parse().map_err(|_| err())?;
    let den: BigUint = den_s.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    let mut num = BigInt::from(num);
    if neg {
        num = -num;
    }
    Ok(BigRational::new(num, BigInt::from(den)))
}

fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ExactScalar {
    /// Canonical text form; `parse` of the output returns the same scalar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            return write!(f, "{}", format_rational(&self.u));
        }
        let sign = if self.v.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}*sqrt({})",
            format_rational(&self.u),
            sign,
            format_rational(&self.v.abs()),
            self.d
        )
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl PartialOrd for ExactScalar {
    /// `None` when the radicands are incompatible.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.cmp_checked(other).ok()
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        ExactScalar::parse(&text).map_err(serde::de::Error::custom)
    }
}

// Operator sugar for contexts that uphold the single-radicand invariant;
// panics where the checked methods would error.

impl Neg for ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        ExactScalar {
            u: -self.u,
            v: -self.v,
            d: self.d,
        }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        self.clone().neg()
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;

            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                self.$checked(rhs).expect("scalar radicands must agree")
            }
        }

        impl $trait<ExactScalar> for ExactScalar {
            type Output = ExactScalar;

            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;

            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }

        impl $trait<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;

            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                self.$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, checked_add);
scalar_binop!(Sub, sub, checked_sub);
scalar_binop!(Mul, mul, checked_mul);
scalar_binop!(Div, div, checked_div);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> ExactScalar {
        ExactScalar::parse(text).unwrap()
    }

    #[test]
    fn parses_rational_literal() {
        let x = s("3/4");
        assert_eq!(x.u(), &big_rational(3, 4));
        assert!(x.is_rational());
        assert_eq!(x.radicand(), 0);
    }

    #[test]
    fn parses_surd_literal() {
        let x = s("1/2+1/3*sqrt(2)");
        assert_eq!(x.u(), &big_rational(1, 2));
        assert_eq!(x.v(), &big_rational(1, 3));
        assert_eq!(x.radicand(), 2);
    }

    #[test]
    fn canonicalizes_square_factors() {
        // sqrt(8) = 2*sqrt(2), and 2/4 * 2 = 1.
        let x = s("0+2/4*sqrt(8)");
        assert_eq!(x.u(), &big_rational(0, 1));
        assert_eq!(x.v(), &big_rational(1, 1));
        assert_eq!(x.radicand(), 2);
        // Perfect squares collapse to rationals.
        let y = s("0+1*sqrt(9)");
        assert_eq!(y, ExactScalar::integer(3));
    }

    #[test]
    fn surd_cancellation_and_norm() {
        let a = s("1+1*sqrt(2)");
        let b = s("1-1*sqrt(2)");
        assert_eq!(&a + &b, ExactScalar::integer(2));
        assert_eq!(&a * &b, ExactScalar::integer(-1));
    }

    #[test]
    fn compares_rational_against_surd() {
        // 7/5 < sqrt(2) because 49/25 < 2.
        let q = s("7/5");
        let r = s("0+1*sqrt(2)");
        assert_eq!(q.cmp_checked(&r).unwrap(), Ordering::Less);
        assert_eq!(r.cmp_checked(&q).unwrap(), Ordering::Greater);
    }

    #[test]
    fn mixing_radicands_is_an_error() {
        let a = s("0+1*sqrt(2)");
        let b = s("0+1*sqrt(3)");
        assert_eq!(
            a.checked_add(&b).unwrap_err(),
            Error::IncompatibleRadicands(2, 3)
        );
        assert!(a.cmp_checked(&b).is_err());
        assert!(a.partial_cmp(&b).is_none());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let a = s("1");
        assert_eq!(
            a.checked_div(&ExactScalar::zero()).unwrap_err(),
            Error::DivisionByZero
        );
    }

    #[test]
    fn divides_by_surds_exactly() {
        let a = s("1+1*sqrt(5)");
        let b = s("2-1*sqrt(5)");
        let q = a.checked_div(&b).unwrap();
        assert_eq!(&q * &b, a);
    }

    #[test]
    fn floor_of_surds() {
        assert_eq!(s("0+1*sqrt(2)").floor_int(), BigInt::from(1));
        assert_eq!(s("0-1*sqrt(2)").floor_int(), BigInt::from(-2));
        assert_eq!(s("3-1*sqrt(2)").floor_int(), BigInt::from(1));
        assert_eq!(s("-7/2").floor_int(), BigInt::from(-4));
        assert_eq!(s("4").floor_int(), BigInt::from(4));
    }

    #[test]
    fn decomposes_over_irrational_basis() {
        let y = s("0+1/2*sqrt(2)");
        let x = s("1+1/2*sqrt(2)");
        let (k1, k2) = x.decompose_over(&y).unwrap();
        assert_eq!(k1, big_rational(1, 1));
        assert_eq!(k2, big_rational(1, 1));
    }

    fn arb_rational() -> impl Strategy<Value = BigRational> {
        (-40i64..=40, 1i64..=12).prop_map(|(n, q)| big_rational(n, q))
    }

    fn arb_scalar() -> impl Strategy<Value = ExactScalar> {
        (arb_rational(), arb_rational(), prop_oneof![Just(0u64), Just(2), Just(3), Just(5)])
            .prop_map(|(u, v, d)| ExactScalar::surd(u, v, d).unwrap())
    }

    proptest! {
        #[test]
        fn field_axioms_hold_exactly(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            // Restrict to a shared field so the panicking operators apply.
            let d = a.radicand().max(b.radicand()).max(c.radicand());
            prop_assume!([a.radicand(), b.radicand(), c.radicand()]
                .iter()
                .all(|&r| r == 0 || r == d));
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn sign_matches_float_evaluation(a in arb_scalar()) {
            let approx = a.to_f64();
            // Stay away from the float noise floor.
            prop_assume!(approx.abs() > 1e-9);
            prop_assert_eq!(a.sign(), if approx > 0.0 { 1 } else { -1 });
        }

        #[test]
        fn parse_format_round_trip(a in arb_scalar()) {
            let text = a.to_string();
            prop_assert_eq!(ExactScalar::parse(&text).unwrap(), a);
        }

        #[test]
        fn floor_is_exact(a in arb_scalar()) {
            let n = a.floor_int();
            prop_assert_ne!(a.cmp_big_int(&n), Ordering::Less);
            prop_assert_eq!(a.cmp_big_int(&(&n + 1)), Ordering::Less);
        }
    }
}
