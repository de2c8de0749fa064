//! The exact 45 degree billiard kernel.
//!
//! A non-stationary base point `p` sits on the boundary of its own table,
//! the rectangle `[-1-r, 1+r] x [-r, r]` with `r = r_value(p) > 0`. Its
//! trajectory bounces at 45 degrees with the usual reflection law and is
//! reflected straight backwards when it runs into a table corner; corners
//! are never counted as bouncing points. Indices follow the clockwise
//! branch for `k >= 0` (a top-edge point departs with heading `(1, -1)`)
//! and the counterclockwise branch for `k <= 0`.
//!
//! The unfolding picture drives the arithmetic: folding the plane onto the
//! table by reflections sends the line of slope one through a lift of `p`
//! to the trajectory, and grid crossings to bouncing points. Corner hits
//! correspond to crossings through grid intersections, which is what makes
//! corner detection a parity test instead of a simulation.

use std::collections::HashSet;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::domain::{self, Point};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// Environment variable overriding the simulation step budget.
pub const ITERATION_CAP_ENV: &str = "SPLIT_TORI_ITERATION_CAP";

const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

/// Step budget for simulations; a safety net for misuse with irrational
/// tables, read once from [`ITERATION_CAP_ENV`].
pub fn iteration_cap() -> u64 {
    static CAP: OnceLock<u64> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(ITERATION_CAP_ENV)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_ITERATION_CAP)
    })
}

/// Which open edge of the table a boundary point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Edge {
    Top,
    Bottom,
    Left,
    Right,
}

/// Velocity direction of a 45 degree segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Heading {
    pub dx: i8,
    pub dy: i8,
}

impl Heading {
    pub const fn new(dx: i8, dy: i8) -> Self {
        Heading { dx, dy }
    }

    pub fn reversed(self) -> Self {
        Heading::new(-self.dx, -self.dy)
    }
}

/// Clockwise departure heading from each edge: the next bouncing point lies
/// clockwise along the boundary.
pub fn clockwise_heading(edge: Edge) -> Heading {
    match edge {
        Edge::Top => Heading::new(1, -1),
        Edge::Right => Heading::new(-1, -1),
        Edge::Bottom => Heading::new(-1, 1),
        Edge::Left => Heading::new(1, 1),
    }
}

/// Counterclockwise departure heading (the time reversal of the incoming
/// clockwise segment).
pub fn counterclockwise_heading(edge: Edge) -> Heading {
    match edge {
        Edge::Top => Heading::new(-1, -1),
        Edge::Right => Heading::new(-1, 1),
        Edge::Bottom => Heading::new(1, 1),
        Edge::Left => Heading::new(1, -1),
    }
}

/// Identifies the open edge of the size-`r` table containing `p`, if any.
pub fn edge_of(p: &Point, r: &ExactScalar) -> Option<Edge> {
    let wide = &ExactScalar::one() + r;
    let on_vertical = p.x.abs() == wide;
    let on_horizontal = p.y.abs() == *r;
    match (on_vertical, on_horizontal) {
        (true, true) | (false, false) => None, // corner or interior
        (true, false) => Some(if p.x.sign() > 0 { Edge::Right } else { Edge::Left }),
        (false, true) => Some(if p.y.sign() > 0 { Edge::Top } else { Edge::Bottom }),
    }
}

/// One admissible bouncing point annotated with its index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedPoint {
    pub index: i64,
    pub point: Point,
}

/// A corner event between two admissible bounces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerHit {
    pub corner: Point,
    /// Admissible indices straddling the event (equal-index pairs mean the
    /// corner was hit before the first admissible bounce of that branch).
    pub between: (i64, i64),
}

/// An indexed window of a good billiard trajectory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Point,
    /// Table half-height `r(start)`; meaningless for stationary starts.
    pub r: ExactScalar,
    /// Stationary starts have the single bouncing point `start`.
    pub stationary: bool,
    /// Admissible bouncing points, indexed over the requested window.
    pub points: Vec<IndexedPoint>,
    pub corner_hits: Vec<CornerHit>,
    /// Number of distinct admissible bouncing points per period, when the
    /// table is rational.
    pub period: Option<u64>,
}

impl Trajectory {
    pub fn point_at(&self, index: i64) -> Option<&Point> {
        self.points.iter().find(|ip| ip.index == index).map(|ip| &ip.point)
    }
}

/// Folding map onto the size-`r` table:
/// `(x, y) -> ((-1)^m (x - 2m(r+1)), (-1)^n (y - 2nr))` with `(m, n)` chosen
/// so that the image lands in the table. On the ambiguous grid lines any
/// valid choice yields the same image.
pub fn fold(r: &ExactScalar, p: &Point) -> Result<Point> {
    if r.sign() <= 0 {
        return Err(Error::InvalidArgument(format!(
            "fold requires a positive table size, got {r}"
        )));
    }
    let half_x = &ExactScalar::one() + r;
    let half_y = r.clone();
    Ok(Point::new(fold_coord(&p.x, &half_x), fold_coord(&p.y, &half_y)))
}

/// Folds one coordinate into `[-h, h]` by reflections at odd multiples of
/// `h`: index `m = floor((t + h) / 2h)`, image `(-1)^m (t - 2mh)`.
fn fold_coord(t: &ExactScalar, h: &ExactScalar) -> ExactScalar {
    let two_h = &(&ExactScalar::integer(2) * h);
    let m = (&(t + h) / two_h).floor_int();
    let shifted = t - &(two_h * &scalar_from_bigint(&m));
    if m.is_odd() {
        -shifted
    } else {
        shifted
    }
}

fn scalar_from_bigint(n: &BigInt) -> ExactScalar {
    ExactScalar::from_big_rational(num_rational::BigRational::from(n.clone()))
}

/// Unfolding map `(x, y) -> ((-1)^m x + 2m(r+1), (-1)^n y + 2nr)`; a right
/// inverse of [`fold`] on the table for every `(m, n)`.
pub fn unfold_map(r: &ExactScalar, m: i64, n: i64, p: &Point) -> Point {
    let unfold_coord = |t: &ExactScalar, h: &ExactScalar, k: i64| {
        let sign = if k.rem_euclid(2) == 1 { -t } else { t.clone() };
        &sign + &(&ExactScalar::integer(2 * k) * h)
    };
    Point::new(
        unfold_coord(&p.x, &(&ExactScalar::one() + r), m),
        unfold_coord(&p.y, r, n),
    )
}

/// Walker over the bounce events of one branch.
pub(crate) struct Walker {
    r: ExactScalar,
    wide: ExactScalar, // 1 + r
    point: Point,
    heading: Heading,
    steps: u64,
}

pub(crate) enum BounceEvent {
    /// Arrived at an admissible bouncing point.
    Bounce(Point),
    /// Ran into a corner and was reflected backwards.
    Corner(Point),
}

impl Walker {
    fn new(point: Point, heading: Heading, r: ExactScalar) -> Self {
        let wide = &ExactScalar::one() + &r;
        Walker { r, wide, point, heading, steps: 0 }
    }

    fn state(&self) -> (Point, Heading) {
        (self.point.clone(), self.heading)
    }

    /// Advances to the next boundary event.
    pub(crate) fn step(&mut self) -> Result<BounceEvent> {
        self.steps += 1;
        if self.steps > iteration_cap() {
            return Err(Error::IterationCap(iteration_cap()));
        }
        let (x, y) = (&self.point.x, &self.point.y);
        let tx = if self.heading.dx > 0 { &self.wide - x } else { x + &self.wide };
        let ty = if self.heading.dy > 0 { &self.r - y } else { y + &self.r };
        let c = tx.cmp_checked(&ty).expect("table coordinates share a radicand");
        let t = if c.is_le() { tx } else { ty };
        let sx = ExactScalar::integer(self.heading.dx as i64);
        let sy = ExactScalar::integer(self.heading.dy as i64);
        let next = Point::new(x + &(&sx * &t), y + &(&sy * &t));
        self.point = next.clone();
        match c {
            std::cmp::Ordering::Equal => {
                self.heading = self.heading.reversed();
                Ok(BounceEvent::Corner(next))
            }
            std::cmp::Ordering::Less => {
                self.heading = Heading::new(-self.heading.dx, self.heading.dy);
                Ok(BounceEvent::Bounce(next))
            }
            std::cmp::Ordering::Greater => {
                self.heading = Heading::new(self.heading.dx, -self.heading.dy);
                Ok(BounceEvent::Bounce(next))
            }
        }
    }
}

pub(crate) fn start_walker(p: &Point, clockwise: bool) -> Result<Walker> {
    let r = domain::r_value(p);
    let edge = edge_of(p, &r)
        .unwrap_or_else(|| unreachable!("non-stationary points lie on an open table edge"));
    let heading = if clockwise { clockwise_heading(edge) } else { counterclockwise_heading(edge) };
    Ok(Walker::new(p.clone(), heading, r))
}

/// Admissible bouncing points `(x, y)_(k)` for `k` in `[k_min, k_max]`,
/// with corner events recorded separately (they do not consume an index).
pub fn bouncing_points(p: &Point, k_min: i64, k_max: i64) -> Result<Trajectory> {
    if k_min > k_max {
        return Err(Error::InvalidArgument(format!(
            "empty index window [{k_min}, {k_max}]"
        )));
    }
    if domain::is_stationary(p) {
        return Ok(Trajectory {
            start: p.clone(),
            r: domain::r_value(p),
            stationary: true,
            points: vec![IndexedPoint { index: 0, point: p.clone() }],
            corner_hits: Vec::new(),
            period: None,
        });
    }
    let r = domain::r_value(p);
    let mut points = Vec::new();
    let mut corner_hits = Vec::new();
    if k_min <= 0 && 0 <= k_max {
        points.push(IndexedPoint { index: 0, point: p.clone() });
    }
    for clockwise in [true, false] {
        let bound = if clockwise { k_max } else { -k_min };
        if bound <= 0 {
            continue;
        }
        let mut walker = start_walker(p, clockwise)?;
        let mut k = 0i64;
        while k < bound {
            match walker.step()? {
                BounceEvent::Bounce(pt) => {
                    k += 1;
                    let index = if clockwise { k } else { -k };
                    let lo = if clockwise { k_min.max(1) } else { k_min };
                    let hi = if clockwise { k_max } else { k_max.min(-1) };
                    if index >= lo && index <= hi {
                        points.push(IndexedPoint { index, point: pt });
                    }
                }
                BounceEvent::Corner(pt) => {
                    let between = if clockwise { (k, k + 1) } else { (-k - 1, -k) };
                    corner_hits.push(CornerHit { corner: pt, between });
                }
            }
        }
    }
    points.sort_by_key(|ip| ip.index);
    corner_hits.sort_by_key(|ch| ch.between);
    let period = if r.is_rational() { Some(period_of(p)?) } else { None };
    Ok(Trajectory { start: p.clone(), r, stationary: false, points, corner_hits, period })
}

/// Number of distinct admissible bouncing points per period, for rational
/// tables. Irrational tables are aperiodic and yield `None`.
pub fn trajectory_period(p: &Point) -> Result<Option<u64>> {
    if domain::is_stationary(p) {
        return Err(Error::StationaryPoint(p.to_string()));
    }
    if !domain::r_value(p).is_rational() {
        return Ok(None);
    }
    Ok(Some(period_of(p)?))
}

fn period_of(p: &Point) -> Result<u64> {
    Ok(bouncing_set(p)?.len() as u64)
}

/// The full set of admissible bouncing points of the trajectory of `p`,
/// by exact simulation until the state `(point, heading)` recurs. Requires
/// a rational table (finite orbit).
pub fn bouncing_set(p: &Point) -> Result<HashSet<Point>> {
    if domain::is_stationary(p) {
        let mut set = HashSet::new();
        set.insert(p.clone());
        return Ok(set);
    }
    if !domain::r_value(p).is_rational() {
        return Err(Error::AperiodicOrbit(p.to_string()));
    }
    let mut walker = start_walker(p, true)?;
    let initial = walker.state();
    let mut set = HashSet::new();
    set.insert(p.clone());
    loop {
        if let BounceEvent::Bounce(pt) = walker.step()? {
            set.insert(pt);
        }
        if walker.state() == initial {
            return Ok(set);
        }
    }
}

/// Iterator over the forward admissible bouncing points of one trajectory:
/// yields `(x, y)_(1), (x, y)_(2), ...` (corner events pass through
/// transparently; after a corner the trajectory retraces). Stationary
/// starts yield the start point forever.
pub struct BounceIter {
    walker: Option<Walker>,
    stationary: Option<Point>,
}

impl BounceIter {
    pub fn new(p: &Point) -> Result<Self> {
        if domain::is_stationary(p) {
            return Ok(BounceIter { walker: None, stationary: Some(p.clone()) });
        }
        Ok(BounceIter { walker: Some(start_walker(p, true)?), stationary: None })
    }

    /// Next admissible bouncing point along the branch.
    pub fn next_point(&mut self) -> Result<Point> {
        if let Some(p) = &self.stationary {
            return Ok(p.clone());
        }
        let walker = self.walker.as_mut().expect("non-stationary iterator has a walker");
        loop {
            if let BounceEvent::Bounce(pt) = walker.step()? {
                return Ok(pt);
            }
        }
    }
}

/// Decides whether the trajectory of an upper-wedge point ever hits a table
/// corner, by arithmetic on `x = k1 + k2 y`:
///
/// * rational `y = p/q`: a corner is hit exactly when `x = p'/q` for an
///   integer `p'` with `p' = p + q (mod 2)`;
/// * irrational `y`: exactly when `x` decomposes as `k1 + k2 y` with both
///   coefficients odd integers.
///
/// Defined on the closed top edge of the table of half-height `y` (`y > 0`,
/// `y >= |x| - 1`); the table corners themselves trivially qualify.
pub fn hits_corner(p: &Point) -> Result<bool> {
    let closed_wedge = p.y.sign() > 0
        && (&p.x.abs() - &ExactScalar::one())
            .cmp_checked(&p.y)
            .map(|c| c.is_le())
            .unwrap_or(true);
    if !closed_wedge {
        return Err(Error::NotInUpperWedge(p.to_string()));
    }
    let y = &p.y;
    let x = &p.x;
    if x.radicand() != 0 && y.radicand() != 0 && x.radicand() != y.radicand() {
        // Distinct fields: x = (odd) + (odd) y has no solution.
        return Ok(false);
    }
    if let Some(y_rat) = y.as_rational() {
        let Some(x_rat) = x.as_rational() else {
            return Ok(false);
        };
        let q = y_rat.denom();
        let pp = y_rat.numer();
        let scaled = x_rat * num_rational::BigRational::from(q.clone());
        if !scaled.is_integer() {
            return Ok(false);
        }
        let p_prime = scaled.to_integer();
        Ok((&p_prime - pp - q).is_even())
    } else {
        let (k1, k2) = x.decompose_over(y)?;
        Ok(k1.is_integer()
            && k2.is_integer()
            && k1.to_integer().is_odd()
            && k2.to_integer().is_odd())
    }
}
