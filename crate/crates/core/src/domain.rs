//! The moment rectangle, base points, region decomposition and canonical
//! forms.
//!
//! For size `alpha > 0` the rectangle is `[-1-alpha, 1+alpha] x [-alpha,
//! alpha]`; base points of split tori live in its interior. The plane
//! decomposes into
//!
//! * the *stationary cross* `|x| = |y| + 1` together with the central
//!   segment `[-1, 1] x {0}` — these points sit at a corner of their own
//!   billiard table (or have a degenerate table) and never move;
//! * the *upper wedge* `y > 0, y > |x| - 1` — the (reflected) point lies on
//!   the interior of the top edge of its table, and every equivalence class
//!   off the cross has a representative here;
//! * the *side wedges* `|x| - 1 > |y|` — the point lies on a vertical edge
//!   of its table; one billiard bounce moves it into the upper wedge.
//!
//! Canonical forms make the Hamiltonian classification a structural equality
//! test: reflections and, in the side wedges, one bounce normalize the point
//! into the cross or the wedge, and wedge points are then reduced to a unique
//! representative of the orbit `+-x + 2Z + 2yZ`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// Base point `(x, y)` of a split torus. Carries no size parameter; the
/// rectangle size is always passed alongside where containment matters.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: ExactScalar,
    pub y: ExactScalar,
}

impl Point {
    pub fn new(x: ExactScalar, y: ExactScalar) -> Self {
        Point { x, y }
    }

    /// Parses `"(x,y)"` with the scalar grammar for both coordinates.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("point {text:?} must be parenthesized")))?;
        // Split at the comma that sits outside any sqrt(...) parentheses.
        let mut depth = 0usize;
        let mut split = None;
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    if split.is_some() {
                        return Err(Error::Parse(format!("too many commas in {text:?}")));
                    }
                    split = Some(i);
                }
                _ => {}
            }
        }
        let i = split.ok_or_else(|| Error::Parse(format!("missing comma in {text:?}")))?;
        Ok(Point {
            x: ExactScalar::parse(&inner[..i])?,
            y: ExactScalar::parse(&inner[i + 1..])?,
        })
    }

    /// Applies the reflection `(x, y) -> (sx * x, sy * y)`.
    pub fn reflect(&self, flip_x: bool, flip_y: bool) -> Point {
        Point {
            x: if flip_x { -&self.x } else { self.x.clone() },
            y: if flip_y { -&self.y } else { self.y.clone() },
        }
    }

    /// True when the point lies in the open rectangle of size `alpha`.
    pub fn in_interior(&self, alpha: &ExactScalar) -> bool {
        let one = ExactScalar::one();
        let wide = alpha + &one;
        self.x.abs().cmp_checked(&wide).map(Ordering::is_lt).unwrap_or(false)
            && self.y.abs().cmp_checked(alpha).map(Ordering::is_lt).unwrap_or(false)
    }

    /// True when the point lies in the closed rectangle of size `alpha`.
    pub fn in_closed(&self, alpha: &ExactScalar) -> bool {
        let one = ExactScalar::one();
        let wide = alpha + &one;
        self.x.abs().cmp_checked(&wide).map(Ordering::is_le).unwrap_or(false)
            && self.y.abs().cmp_checked(alpha).map(Ordering::is_le).unwrap_or(false)
    }

    pub(crate) fn ensure_interior(&self, alpha: &ExactScalar) -> Result<()> {
        if self.in_interior(alpha) {
            Ok(())
        } else {
            Err(Error::OutsideRectangle(self.to_string(), alpha.to_string()))
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Billiard-table size of a base point: `r(x, y) = max(|x| - 1, |y|)`.
///
/// Stationary points have `r <= 0` (degenerate or corner-pinned tables) and
/// never reach the billiard engine.
pub fn r_value(p: &Point) -> ExactScalar {
    let r = &p.x.abs() - &ExactScalar::one();
    r.max_checked(&p.y.abs()).expect("|x|-1 and |y| share a radicand")
}

/// True when the point belongs to the stationary set: the cross
/// `|x| = |y| + 1` or the central segment `[-1, 1] x {0}`.
pub fn is_stationary(p: &Point) -> bool {
    let ax = p.x.abs();
    let ay = p.y.abs();
    let cross = ax == &ay + &ExactScalar::one();
    let segment = p.y.is_zero() && ax.cmp_checked(&ExactScalar::one()) != Ok(Ordering::Greater);
    cross || segment
}

/// True when the point lies in the open upper wedge `y > 0, y > |x| - 1`.
pub fn in_upper_wedge(p: &Point) -> bool {
    p.y.sign() > 0 && p.y > &p.x.abs() - &ExactScalar::one()
}

/// Variants of the region decomposition, after reflecting into the closed
/// first quadrant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// The single point `(0, 0)`.
    Origin,
    /// Interior of the central segment, `0 < |x| < 1`, `y = 0`.
    CentralSegment,
    /// The endpoints `(+-1, 0)` of the central segment.
    SegmentEnd,
    /// The open cross rays `|x| = |y| + 1`, `y != 0`.
    CornerRay,
    /// The upper wedge: the point sits on the top edge of its table.
    UpperWedge,
    /// The side wedges: the point sits on a vertical edge of its table.
    SideWedge,
}

/// Region classification together with the reflection that moves the point
/// into the closed first quadrant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionTag {
    pub region: Region,
    pub flip_x: bool,
    pub flip_y: bool,
}

/// Classifies `p` within the open rectangle of size `alpha`.
pub fn region_of(p: &Point, alpha: &ExactScalar) -> Result<RegionTag> {
    p.ensure_interior(alpha)?;
    let flip_x = p.x.sign() < 0;
    let flip_y = p.y.sign() < 0;
    let x = p.x.abs();
    let y = p.y.abs();
    let one = ExactScalar::one();
    let region = if x == &y + &one {
        if y.is_zero() {
            Region::SegmentEnd
        } else {
            Region::CornerRay
        }
    } else if y.is_zero() {
        if x.is_zero() {
            Region::Origin
        } else if x < one {
            Region::CentralSegment
        } else {
            // x > 1, on the axis: vertical-edge point of its table.
            Region::SideWedge
        }
    } else if &x - &one < y {
        Region::UpperWedge
    } else {
        Region::SideWedge
    };
    Ok(RegionTag { region, flip_x, flip_y })
}

/// Geometric normalization into the stationary set or the upper wedge:
/// reflections into the first quadrant, then (in the side wedges) the single
/// bounce `(1 + r, t) -> (1 + t, r)` onto a horizontal table edge, followed
/// by one more quadrant reflection. Needs no size parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    /// Reflection applied before the bounce.
    pub flip_x: bool,
    pub flip_y: bool,
    /// Whether the side-wedge bounce was taken.
    pub bounced: bool,
    /// Normalized point, in the stationary set or the upper wedge.
    pub point: Point,
}

/// Normalizes any point into `stationary set ∪ upper wedge` (first
/// quadrant), recording the moves so callers can replay them as probes.
pub fn normalize_to_wedge(p: &Point) -> Normalization {
    let flip_x = p.x.sign() < 0;
    let flip_y = p.y.sign() < 0;
    let q = p.reflect(flip_x, flip_y);
    if is_stationary(&q) {
        return Normalization { flip_x, flip_y, bounced: false, point: q };
    }
    let one = ExactScalar::one();
    let r = &q.x.abs() - &one;
    if r > q.y {
        // Side wedge: bounce target (1 + y0, r) lands on the top edge of the
        // table and inside the upper wedge; it is never a table corner since
        // y0 < r on the open edge.
        let target = Point::new(&one + &q.y, r);
        debug_assert!(in_upper_wedge(&target));
        Normalization { flip_x, flip_y, bounced: true, point: target }
    } else {
        debug_assert!(in_upper_wedge(&q));
        Normalization { flip_x, flip_y, bounced: false, point: q }
    }
}

/// Canonical form of a Hamiltonian equivalence class.
///
/// Two base points are equivalent exactly when their canonical forms are
/// equal, and the form does not depend on the rectangle size.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CanonicalForm {
    /// Stationary class, rigid up to reflections: stored as `(|x|, |y|)`.
    Stationary { x: ExactScalar, y: ExactScalar },
    /// Billiard class of upper-wedge points on the table of half-height `y`:
    /// `rep_x` is the unique orbit representative of `+-x + 2Z + 2yZ`.
    Orbit { y: ExactScalar, rep_x: ExactScalar },
}

/// Canonicalizes a point of the open rectangle of size `alpha`. The result
/// is independent of `alpha` (any size exceeding `r(p)` classifies alike).
pub fn canonicalize(p: &Point, alpha: &ExactScalar) -> Result<CanonicalForm> {
    p.ensure_interior(alpha)?;
    Ok(canonical_form_unchecked(p))
}

pub(crate) fn canonical_form_unchecked(p: &Point) -> CanonicalForm {
    let norm = normalize_to_wedge(p);
    let q = norm.point;
    if is_stationary(&q) {
        CanonicalForm::Stationary { x: q.x, y: q.y }
    } else {
        let rep_x = orbit_representative(&q.x, &q.y);
        CanonicalForm::Orbit { y: q.y, rep_x }
    }
}

/// Reduces `x` to the canonical representative of the orbit
/// `{ +-x + 2 k1 + 2 k2 y : k1, k2 in Z }` for a table half-height `y > 0`.
///
/// * Rational `y = p/q`: the translations form `(2/q) Z`. For rational `x`
///   the representative is the unique orbit point in `[0, 1/q]`. When `x`
///   carries a surd part the translations act on the rational part only; the
///   sign is fixed by making the surd coefficient positive and the rational
///   part is then reduced into `[0, 2/q)`.
/// * Irrational `y = a + b sqrt(d)`: for each sign choice the surd part of
///   the candidate is reduced into `[0, 2|b|)` (this pins `k2`) and the
///   rational part into `[0, 2)` (this pins `k1`); the lexicographically
///   smaller candidate (surd part first) is the representative.
pub fn orbit_representative(x: &ExactScalar, y: &ExactScalar) -> ExactScalar {
    debug_assert!(y.sign() > 0);
    if let Some(y_rat) = y.as_rational() {
        let q = y_rat.denom().clone();
        let step = BigRational::new(BigInt::from(2), q); // 2/q
        if let Some(x_rat) = x.as_rational() {
            let mut t = rational_mod(x_rat, &step);
            let half = &step / BigRational::from(BigInt::from(2)); // 1/q
            if t > half {
                t = &step - &t;
            }
            ExactScalar::from_big_rational(t)
        } else {
            let xs = if x.v().is_negative() { -x } else { x.clone() };
            ExactScalar::surd(rational_mod(xs.u(), &step), xs.v().clone(), xs.radicand())
                .expect("canonical radicand stays in range")
        }
    } else {
        let two = BigRational::from(BigInt::from(2));
        let b2 = y.v().abs() * &two; // 2|b|
        let mut best: Option<(BigRational, BigRational)> = None;
        for flip in [false, true] {
            let xs = if flip { -x } else { x.clone() };
            // Choose k2 so the surd part lands in [0, 2|b|).
            let w = xs.v().clone();
            let vp = rational_mod(&w, &b2);
            let k2 = (&vp - &w) / (y.v() * &two);
            debug_assert!(k2.is_integer());
            let raw_u = xs.u() + &two * &k2 * y.u();
            let up = rational_mod(&raw_u, &two);
            let cand = (vp, up);
            best = Some(match best {
                None => cand,
                Some(b) if cand < b => cand,
                Some(b) => b,
            });
        }
        let (vp, up) = best.unwrap();
        ExactScalar::surd(up, vp, x.radicand().max(y.radicand()))
            .expect("canonical radicand stays in range")
    }
}

/// `a mod m` reduced into `[0, m)` for `m > 0`.
fn rational_mod(a: &BigRational, m: &BigRational) -> BigRational {
    let q = (a / m).floor();
    a - q * m
}
