//! Packing by disjoint split tori and ball-embeddability types.
//!
//! The packing number by disjoint split tori equals the number of
//! admissible bouncing points over the four reflections of the base point:
//! stationary points contribute their reflections only, rational tables
//! contribute one finite trajectory orbit, and irrational tables pack
//! infinitely. For `y = p/q` in lowest terms the count closes to a formula
//! in `p`, `q` and the class of `x`:
//!
//! * `4p + 2q - 4` when `x = p'/q` with `p' = p + q (mod 2)` (the corner
//!   class: four bouncing points die at corners),
//! * `4p + 2q` when `x = p'/q` with the opposite parity (orbit endpoints
//!   on the half-period boundary),
//! * `8p + 4q` otherwise (free orbit).
//!
//! A brute-force enumeration over the reflected trajectories cross-checks
//! the formula. The module also carries the sphere-packing upper bound for
//! tori over the central segment, the handful of exactly known packing
//! numbers, and the ball-embeddability trichotomy with its countable
//! exceptional set `{((k - 2l - 1)/k, +-1/k)}`.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::billiard;
use crate::domain::{self, CanonicalForm, Point};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// A packing count; infinity is a first-class value. Serializes as the
/// number itself or the string `"infinite"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackingCount {
    Finite(u64),
    Infinite,
}

impl Serialize for PackingCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PackingCount::Finite(n) => s.serialize_u64(*n),
            PackingCount::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for PackingCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(n) => Ok(PackingCount::Finite(n)),
            Raw::Text(t) if t == "infinite" => Ok(PackingCount::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad packing count {t:?}"))),
        }
    }
}

impl fmt::Display for PackingCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PackingCount::Finite(n) => write!(f, "{n}"),
            PackingCount::Infinite => write!(f, "infinite"),
        }
    }
}

impl PackingCount {
    pub fn le(&self, other: &PackingCount) -> bool {
        match (self, other) {
            (PackingCount::Finite(a), PackingCount::Finite(b)) => a <= b,
            (_, PackingCount::Infinite) => true,
            (PackingCount::Infinite, PackingCount::Finite(_)) => false,
        }
    }
}

/// Packing number of `T(p)` by disjoint split tori, from the closed
/// formulas. Independent of the rectangle size.
pub fn toric_packing_number(p: &Point) -> Result<PackingCount> {
    let norm = domain::normalize_to_wedge(p);
    let q = &norm.point;
    if domain::is_stationary(q) {
        // Origin packs once; the central segment (endpoints included)
        // packs its two x-reflections; cross rays pack all four.
        let count = if q.x.is_zero() && q.y.is_zero() {
            1
        } else if q.y.is_zero() {
            2
        } else {
            4
        };
        return Ok(PackingCount::Finite(count));
    }
    match domain::canonical_form_unchecked(p) {
        CanonicalForm::Stationary { .. } => unreachable!("handled above"),
        CanonicalForm::Orbit { y, rep_x } => {
            let Some(y_rat) = y.as_rational() else {
                return Ok(PackingCount::Infinite);
            };
            let q_big = y_rat.denom().clone();
            let p_big = y_rat.numer().clone();
            let pp = big_u64(&p_big);
            let qq = big_u64(&q_big);
            let scaled = match rep_x.as_rational() {
                Some(xr) => xr * BigRational::from(q_big.clone()),
                None => return Ok(PackingCount::Finite(8 * pp + 4 * qq)),
            };
            if !scaled.is_integer() {
                return Ok(PackingCount::Finite(8 * pp + 4 * qq));
            }
            let p_prime = scaled.to_integer();
            if (&p_prime - &p_big - &q_big).is_even() {
                Ok(PackingCount::Finite(4 * pp + 2 * qq - 4))
            } else {
                Ok(PackingCount::Finite(4 * pp + 2 * qq))
            }
        }
    }
}

fn big_u64(n: &BigInt) -> u64 {
    n.to_u64().expect("table data fits machine integers")
}

/// Brute-force packing count: cardinality of the union of the bouncing
/// sets of the four reflections. `None` when the table is irrational (the
/// union is infinite).
pub fn toric_packing_brute_force(p: &Point) -> Result<Option<u64>> {
    if !domain::is_stationary(p) && !domain::r_value(p).is_rational() {
        return Ok(None);
    }
    let mut union: HashSet<Point> = HashSet::new();
    for (fx, fy) in [(false, false), (true, false), (false, true), (true, true)] {
        union.extend(billiard::bouncing_set(&p.reflect(fx, fy))?);
    }
    Ok(Some(union.len() as u64))
}

/// Least `k >= 2` with `|x| < (k-1)/(k+1)`: an upper bound for the packing
/// number of the torus over `(x, 0)`. Vacuous (`None`) for `|x| >= 1`.
pub fn ps_upper_bound(x: &ExactScalar) -> Option<u64> {
    let one = ExactScalar::one();
    let ax = x.abs();
    if ax.cmp_checked(&one).ok()? != std::cmp::Ordering::Less {
        return None;
    }
    // Least integer strictly above (1 + |x|) / (1 - |x|), clamped to >= 2.
    let ratio = (&one + &ax).checked_div(&(&one - &ax)).ok()?;
    let k = ratio.floor_int() + 1u8;
    let k = k.to_u64().unwrap_or(u64::MAX).max(2);
    Some(k)
}

/// Provenance of an exactly known packing number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackingProvenance {
    /// The origin torus is non-displaceable.
    Nondisplaceable,
    /// Sphere-packing bound met by a circle packing of the larger factor.
    CirclePacking,
    /// Same, valid only for small rectangle sizes (caller-asserted).
    CirclePackingSmallAlpha,
    /// Irrational table: infinitely many disjoint equivalent split tori.
    IrrationalTrajectory,
}

/// The packing numbers known exactly. `assume_small_alpha` unlocks the
/// interval cases that require a small rectangle; everything else is
/// size-free. Returns `None` outside the known cases.
pub fn known_packing_number(
    p: &Point,
    assume_small_alpha: bool,
) -> Option<(PackingCount, PackingProvenance)> {
    let one = ExactScalar::one();
    if p.x.is_zero() && p.y.is_zero() {
        return Some((PackingCount::Finite(1), PackingProvenance::Nondisplaceable));
    }
    if !domain::r_value(p).is_rational() {
        return Some((PackingCount::Infinite, PackingProvenance::IrrationalTrajectory));
    }
    if !p.y.is_zero() {
        return None;
    }
    let ax = p.x.abs();
    if ax.sign() > 0 && ax < ExactScalar::rational(1, 3) {
        return Some((PackingCount::Finite(2), PackingProvenance::CirclePacking));
    }
    if assume_small_alpha && ax < one {
        // Unique k with (k-2)/k < |x| < (k-1)/(k+1): the interval
        // ((1+|x|)/(1-|x|), 2/(1-|x|)) has length one.
        let lower = (&one + &ax).checked_div(&(&one - &ax)).ok()?;
        let upper = (&ExactScalar::integer(2)).checked_div(&(&one - &ax)).ok()?;
        let k = &lower.floor_int() + 1u8;
        let k_scalar = ExactScalar::from_big_rational(BigRational::from(k.clone()));
        if lower < k_scalar && k_scalar < upper {
            let k = k.to_u64()?;
            if k >= 2 {
                return Some((
                    PackingCount::Finite(k),
                    PackingProvenance::CirclePackingSmallAlpha,
                ));
            }
        }
    }
    None
}

/// Ball-embeddability type of a split torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallType {
    /// Image of an equal-factor product torus under some ball embedding:
    /// exactly the stationary points off the central segment.
    pub clifford: bool,
    /// Image of a Chekanov torus: exactly the non-stationary points whose
    /// trajectory runs through a table corner.
    pub chekanov: bool,
    /// Image of an unequal-factor product torus: everything off the
    /// stationary set and the exceptional dots `((k-2l-1)/k, +-1/k)`.
    pub nonmonotone: bool,
}

/// Classifies `T(p)` among the three ball-embeddable types.
pub fn ball_type(p: &Point, alpha: &ExactScalar) -> Result<BallType> {
    p.ensure_interior(alpha)?;
    let stationary = domain::is_stationary(p);
    let clifford = stationary && !p.y.is_zero();
    let chekanov = if stationary {
        false
    } else {
        billiard::hits_corner(&domain::normalize_to_wedge(p).point)?
    };
    let nonmonotone = !stationary && !in_exceptional_dots(p);
    Ok(BallType { clifford, chekanov, nonmonotone })
}

/// Membership in `{((k - 2l - 1)/k, +-1/k) : k >= 1, 0 <= l < k}`: the
/// ordinate forces `k`, then the abscissa must be `m/k` with `|m| <= k-1`
/// and `m` of the opposite parity to `k`. Irrational coordinates never
/// qualify.
fn in_exceptional_dots(p: &Point) -> bool {
    let Some(y) = p.y.as_rational() else {
        return false;
    };
    if !y.numer().abs().is_one() {
        return false;
    }
    let k = y.denom().clone();
    let Some(x) = p.x.as_rational() else {
        return false;
    };
    let scaled = x * BigRational::from(k.clone());
    if !scaled.is_integer() {
        return false;
    }
    let m = scaled.to_integer();
    m.abs() <= &k - 1 && (&m - &k).is_odd()
}

/// Base point of the image of a Chekanov torus of parameter `a` under the
/// corner reference ball embedding: `(alpha - a - 1, alpha - a)`. Requires
/// `0 < a < alpha`.
pub fn chekanov_image(a: &ExactScalar, alpha: &ExactScalar) -> Result<Point> {
    if a.sign() <= 0 || a.cmp_checked(alpha)? != std::cmp::Ordering::Less {
        return Err(Error::InvalidArgument(format!(
            "parameter a = {a} must satisfy 0 < a < {alpha}"
        )));
    }
    let x = &(alpha - a) - &ExactScalar::one();
    Ok(Point::new(x, alpha - a))
}

/// Base point of the image of the product torus with factor areas `(b, c)`
/// under the corner reference ball embedding: `(b - alpha - 1, c - alpha)`.
/// Requires `b, c > 0` and `b + c < 2 alpha` (the embedding must fit).
pub fn product_image(b: &ExactScalar, c: &ExactScalar, alpha: &ExactScalar) -> Result<Point> {
    let two_alpha = &ExactScalar::integer(2) * alpha;
    if b.sign() <= 0
        || c.sign() <= 0
        || (b + c).cmp_checked(&two_alpha)? != std::cmp::Ordering::Less
    {
        return Err(Error::InvalidArgument(format!(
            "factor areas ({b}, {c}) must be positive with sum below {two_alpha}"
        )));
    }
    Ok(Point::new(&(b - alpha) - &ExactScalar::one(), c - alpha))
}

/// Whether the embedded Chekanov torus of parameter `a` is equivalent to an
/// embedded unequal-factor product torus: true exactly when `alpha - a` is
/// not a unit fraction `1/k`.
pub fn chek_nonmonotone_equiv(a: &ExactScalar, alpha: &ExactScalar) -> Result<bool> {
    if a.sign() <= 0 || a.cmp_checked(alpha)? != std::cmp::Ordering::Less {
        return Err(Error::InvalidArgument(format!(
            "parameter a = {a} must satisfy 0 < a < {alpha}"
        )));
    }
    let t = alpha - a;
    let Some(t_rat) = t.as_rational() else {
        return Ok(true);
    };
    Ok(!t_rat.numer().is_one())
}

/// Combined packing report for one base point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingReport {
    pub toric_packing: PackingCount,
    /// Sphere-packing upper bound; only defined over the central segment.
    pub ps_upper_bound: Option<u64>,
    pub known_exact: Option<(PackingCount, PackingProvenance)>,
}

pub fn packing_report(p: &Point, assume_small_alpha: bool) -> Result<PackingReport> {
    let toric_packing = toric_packing_number(p)?;
    let ps = if p.y.is_zero() { ps_upper_bound(&p.x) } else { None };
    let known = known_packing_number(p, assume_small_alpha);
    if let Some((known_count, _)) = &known {
        debug_assert!(toric_packing.le(known_count), "toric packing exceeds a known packing");
    }
    Ok(PackingReport { toric_packing, ps_upper_bound: ps, known_exact: known })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(text: &str) -> Point {
        Point::parse(text).unwrap()
    }

    fn sc(text: &str) -> ExactScalar {
        ExactScalar::parse(text).unwrap()
    }

    #[test]
    fn packing_anchor_values() {
        assert_eq!(toric_packing_number(&pt("(0,0)")).unwrap(), PackingCount::Finite(1));
        assert_eq!(toric_packing_number(&pt("(0,1)")).unwrap(), PackingCount::Finite(2));
        assert_eq!(toric_packing_number(&pt("(1/4,1/2)")).unwrap(), PackingCount::Finite(16));
        // Cross-ray points pack four reflections.
        assert_eq!(toric_packing_number(&pt("(-3/2,-1/2)")).unwrap(), PackingCount::Finite(4));
        // Segment points pack two.
        assert_eq!(toric_packing_number(&pt("(1/2,0)")).unwrap(), PackingCount::Finite(2));
        assert_eq!(toric_packing_number(&pt("(1,0)")).unwrap(), PackingCount::Finite(2));
        // Irrational tables pack infinitely.
        let p = Point::new(sc("1/3"), sc("0+1/2*sqrt(2)"));
        assert_eq!(toric_packing_number(&p).unwrap(), PackingCount::Infinite);
    }

    #[test]
    fn formula_matches_brute_force_on_examples() {
        for text in ["(0,1)", "(1/4,1/2)", "(1/2,1/2)", "(2/3,1)", "(2,1/3)", "(5/4,-1/2)"] {
            let p = pt(text);
            let formula = toric_packing_number(&p).unwrap();
            let brute = toric_packing_brute_force(&p).unwrap().unwrap();
            assert_eq!(formula, PackingCount::Finite(brute), "at {p}");
        }
    }

    #[test]
    fn ps_bound_examples() {
        assert_eq!(ps_upper_bound(&sc("0")), Some(2));
        assert_eq!(ps_upper_bound(&sc("1/3")), Some(3));
        assert_eq!(ps_upper_bound(&sc("-1/3")), Some(3));
        assert_eq!(ps_upper_bound(&sc("1")), None);
        assert_eq!(ps_upper_bound(&sc("3/2")), None);
    }

    #[test]
    fn known_packing_cases() {
        assert_eq!(
            known_packing_number(&pt("(0,0)"), false),
            Some((PackingCount::Finite(1), PackingProvenance::Nondisplaceable))
        );
        assert_eq!(
            known_packing_number(&pt("(1/5,0)"), false),
            Some((PackingCount::Finite(2), PackingProvenance::CirclePacking))
        );
        let p = Point::new(sc("1/3"), sc("0+1/2*sqrt(2)"));
        assert_eq!(
            known_packing_number(&p, false),
            Some((PackingCount::Infinite, PackingProvenance::IrrationalTrajectory))
        );
        // Interval case needs the small-size assertion.
        assert_eq!(known_packing_number(&pt("(2/5,0)"), false), None);
        assert_eq!(
            known_packing_number(&pt("(2/5,0)"), true),
            Some((PackingCount::Finite(3), PackingProvenance::CirclePackingSmallAlpha))
        );
        // Interval endpoints stay unknown: 1/3 = (k-1)/(k+1) for k = 2.
        assert_eq!(known_packing_number(&pt("(1/3,0)"), true), None);
        // Central-segment points without a case stay unknown.
        assert_eq!(known_packing_number(&pt("(1,0)"), true), None);
    }

    #[test]
    fn ball_type_examples() {
        let one = sc("1");
        let two = sc("2");
        assert_eq!(
            ball_type(&pt("(-3/2,-1/2)"), &two).unwrap(),
            BallType { clifford: true, chekanov: false, nonmonotone: false }
        );
        assert_eq!(
            ball_type(&pt("(1/2,1/2)"), &one).unwrap(),
            BallType { clifford: false, chekanov: true, nonmonotone: false }
        );
        assert_eq!(
            ball_type(&pt("(3/10,1/2)"), &one).unwrap(),
            BallType { clifford: false, chekanov: false, nonmonotone: true }
        );
        // Central-segment points are of no type.
        assert_eq!(
            ball_type(&pt("(1/2,0)"), &one).unwrap(),
            BallType { clifford: false, chekanov: false, nonmonotone: false }
        );
    }

    #[test]
    fn chekanov_images_hit_corners() {
        let alpha = sc("2");
        for a_text in ["1/3", "1/2", "1", "3/2", "7/5"] {
            let a = sc(a_text);
            let p = chekanov_image(&a, &alpha).unwrap();
            assert!(domain::in_upper_wedge(&p), "image {p} off the wedge");
            assert!(billiard::hits_corner(&p).unwrap(), "image {p} misses corners");
            let t = ball_type(&p, &alpha).unwrap();
            assert!(t.chekanov);
        }
        // Surd parameter.
        let a = sc("0+1/2*sqrt(2)");
        let p = chekanov_image(&a, &alpha).unwrap();
        assert!(billiard::hits_corner(&p).unwrap());
        assert!(chekanov_image(&sc("2"), &alpha).is_err());
        assert!(chekanov_image(&sc("0"), &alpha).is_err());
    }

    #[test]
    fn image_formulas() {
        assert_eq!(chekanov_image(&sc("1/2"), &sc("1")).unwrap(), pt("(-1/2,1/2)"));
        assert_eq!(chekanov_image(&sc("1"), &sc("2")).unwrap(), pt("(0,1)"));
        assert_eq!(
            product_image(&sc("1/2"), &sc("1/2"), &sc("1")).unwrap(),
            pt("(-3/2,-1/2)")
        );
        assert_eq!(product_image(&sc("1"), &sc("2"), &sc("2")).unwrap(), pt("(-2,0)"));
        assert!(product_image(&sc("1"), &sc("1"), &sc("1")).is_err());
    }

    #[test]
    fn chek_nonmonotone_equiv_examples() {
        assert!(!chek_nonmonotone_equiv(&sc("1/2"), &sc("1")).unwrap());
        assert!(chek_nonmonotone_equiv(&sc("1/3"), &sc("1")).unwrap());
        assert!(!chek_nonmonotone_equiv(&sc("1"), &sc("2")).unwrap());
        // Irrational difference is never a unit fraction.
        assert!(chek_nonmonotone_equiv(&sc("0+1/2*sqrt(2)"), &sc("1")).unwrap());
    }

    #[test]
    fn exceptional_dots_are_chekanov_not_nonmonotone() {
        let alpha = sc("2");
        for k in 1i64..=8 {
            for l in 0..k {
                for sign in [1i64, -1] {
                    let p = Point::new(
                        ExactScalar::rational(k - 2 * l - 1, k),
                        ExactScalar::rational(sign, k),
                    );
                    let t = ball_type(&p, &alpha).unwrap();
                    assert!(t.chekanov, "dot {p} must be a Chekanov image");
                    assert!(!t.nonmonotone, "dot {p} must not be nonmonotone");
                    assert!(!t.clifford);
                }
            }
        }
    }
}
