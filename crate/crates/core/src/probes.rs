//! Symmetric probes: constructive witnesses and their homology matrices.
//!
//! A symmetric probe is a segment crossing the rectangle integrally
//! transversely: horizontal and vertical probes always qualify, and the two
//! diagonal slopes qualify exactly when the segment misses the four
//! vertices. Reflecting a fibre across the probe midpoint realizes a
//! Hamiltonian isotopy, and on first homology (in the torus-action basis)
//! each probe acts by one of six integer matrices, fixed by the probe's
//! slope and by which pair of rectangle edges it meets:
//!
//! | probe                            | matrix              |
//! |----------------------------------|---------------------|
//! | horizontal                       | `[[-1,0],[0,1]]`    |
//! | vertical                         | `[[1,0],[0,-1]]`    |
//! | slope `(1,1)`, bottom and top    | `[[1,0],[-2,-1]]`   |
//! | slope `(1,1)`, mixed edges       | `[[0,-1],[-1,0]]`   |
//! | slope `(-1,1)`, bottom and top   | `[[1,0],[2,-1]]`    |
//! | slope `(-1,1)`, mixed edges      | `[[0,1],[1,0]]`     |
//!
//! The table follows from `a -> a + <v, a>(xi' - xi)` with `v` the probe
//! direction and `xi`, `xi'` the inward facet normals; it does not depend
//! on the traversal orientation. Consecutive bouncing points of a billiard
//! trajectory always span a valid diagonal probe and sit symmetrically on
//! it, which is what lets a witness sequence trace a trajectory step by
//! step.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::billiard::{self, BounceEvent};
use crate::domain::{self, canonicalize, normalize_to_wedge, Point};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// The four supported probe directions (as lines; sign is immaterial).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeDirection {
    /// Direction `(1, 0)`.
    Horizontal,
    /// Direction `(0, 1)`.
    Vertical,
    /// Direction `(1, 1)`.
    DiagUp,
    /// Direction `(-1, 1)`.
    DiagDown,
}

/// Edge of the rectangle met by a probe endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RectEdge {
    Top,
    Bottom,
    Left,
    Right,
}

/// A validated symmetric probe in the rectangle of size `alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub direction: ProbeDirection,
    /// Segment endpoints on the rectangle boundary, in a canonical order
    /// (increasing `x` for horizontal probes, increasing `y` otherwise).
    pub endpoints: (Point, Point),
    /// Rectangle edges met by the endpoints, in the same order.
    pub edges: (RectEdge, RectEdge),
}

/// Why a candidate probe was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum InvalidProbe {
    /// Anchor outside the open rectangle.
    AnchorOutside,
    /// A diagonal through this anchor passes through a rectangle vertex, so
    /// the boundary intersection is not integrally transverse.
    HitsVertex { vertex: Point },
    /// Directions other than the four supported ones are redundant for the
    /// classification and are rejected outright.
    UnsupportedDirection,
}

/// Validation outcome; invalidity is a value, not an error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeValidity {
    Valid(Probe),
    Invalid(InvalidProbe),
}

impl ProbeValidity {
    pub fn valid(self) -> Option<Probe> {
        match self {
            ProbeValidity::Valid(p) => Some(p),
            ProbeValidity::Invalid(_) => None,
        }
    }
}

/// 2x2 integer matrix acting on first homology in the torus-action basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonodromyMatrix(pub [[i64; 2]; 2]);

impl MonodromyMatrix {
    pub const IDENTITY: MonodromyMatrix = MonodromyMatrix([[1, 0], [0, 1]]);

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        MonodromyMatrix([[a, b], [c, d]])
    }

    pub fn det(&self) -> i64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Inverse of a determinant `+-1` matrix.
    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let det = self.det();
        debug_assert!(det == 1 || det == -1);
        MonodromyMatrix([
            [det * m[1][1], -det * m[0][1]],
            [-det * m[1][0], det * m[0][0]],
        ])
    }

    pub fn conjugate_by(&self, c: &MonodromyMatrix) -> Self {
        *c * *self * c.inverse()
    }
}

impl Mul for MonodromyMatrix {
    type Output = MonodromyMatrix;

    fn mul(self, rhs: MonodromyMatrix) -> MonodromyMatrix {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[0i64; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        MonodromyMatrix(out)
    }
}

impl fmt::Debug for MonodromyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{},{}],[{},{}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl fmt::Display for MonodromyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One symmetric-probe move: the probe, the pair of symmetric points it
/// exchanges, and the induced homology matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeStep {
    pub probe: Probe,
    pub from: Point,
    pub to: Point,
    pub matrix: MonodromyMatrix,
}

/// Validates the probe through `anchor` with the given integer direction.
/// Anchors may sit anywhere in the closed rectangle (the probe is a segment
/// of the rectangle either way); [`probe_action`] is what insists on
/// interior points.
pub fn validate_probe(
    direction: (i64, i64),
    anchor: &Point,
    alpha: &ExactScalar,
) -> ProbeValidity {
    let dir = match primitive_direction(direction) {
        Some(d) => d,
        None => return ProbeValidity::Invalid(InvalidProbe::UnsupportedDirection),
    };
    if !anchor.in_closed(alpha) {
        return ProbeValidity::Invalid(InvalidProbe::AnchorOutside);
    }
    build_probe(dir, anchor, alpha)
}

fn primitive_direction(direction: (i64, i64)) -> Option<ProbeDirection> {
    let (dx, dy) = direction;
    if dx == 0 && dy == 0 {
        return None;
    }
    let g = num_integer::gcd(dx.unsigned_abs(), dy.unsigned_abs()) as i64;
    match (dx / g, dy / g) {
        (1, 0) | (-1, 0) => Some(ProbeDirection::Horizontal),
        (0, 1) | (0, -1) => Some(ProbeDirection::Vertical),
        (1, 1) | (-1, -1) => Some(ProbeDirection::DiagUp),
        (-1, 1) | (1, -1) => Some(ProbeDirection::DiagDown),
        _ => None,
    }
}

fn build_probe(dir: ProbeDirection, anchor: &Point, alpha: &ExactScalar) -> ProbeValidity {
    let one = ExactScalar::one();
    let wide = &one + alpha;
    match dir {
        ProbeDirection::Horizontal => ProbeValidity::Valid(Probe {
            direction: dir,
            endpoints: (
                Point::new(-&wide, anchor.y.clone()),
                Point::new(wide.clone(), anchor.y.clone()),
            ),
            edges: (RectEdge::Left, RectEdge::Right),
        }),
        ProbeDirection::Vertical => ProbeValidity::Valid(Probe {
            direction: dir,
            endpoints: (
                Point::new(anchor.x.clone(), -alpha),
                Point::new(anchor.x.clone(), alpha.clone()),
            ),
            edges: (RectEdge::Bottom, RectEdge::Top),
        }),
        ProbeDirection::DiagUp => {
            // Line y - x = c; vertices lie on |c| = 1.
            let c = &anchor.y - &anchor.x;
            match c.abs().cmp_checked(&one).expect("coordinates share a radicand") {
                std::cmp::Ordering::Equal => {
                    let vertex = if c.sign() > 0 {
                        Point::new(-&wide, -alpha)
                    } else {
                        Point::new(wide.clone(), alpha.clone())
                    };
                    ProbeValidity::Invalid(InvalidProbe::HitsVertex { vertex })
                }
                std::cmp::Ordering::Less => ProbeValidity::Valid(Probe {
                    direction: dir,
                    endpoints: (
                        Point::new(-&(alpha + &c), -alpha),
                        Point::new(alpha - &c, alpha.clone()),
                    ),
                    edges: (RectEdge::Bottom, RectEdge::Top),
                }),
                std::cmp::Ordering::Greater => {
                    if c.sign() > 0 {
                        // Left edge up to the top edge.
                        ProbeValidity::Valid(Probe {
                            direction: dir,
                            endpoints: (
                                Point::new(-&wide, &c - &wide),
                                Point::new(alpha - &c, alpha.clone()),
                            ),
                            edges: (RectEdge::Left, RectEdge::Top),
                        })
                    } else {
                        // Bottom edge up to the right edge.
                        ProbeValidity::Valid(Probe {
                            direction: dir,
                            endpoints: (
                                Point::new(-&(alpha + &c), -alpha),
                                Point::new(wide.clone(), &wide + &c),
                            ),
                            edges: (RectEdge::Bottom, RectEdge::Right),
                        })
                    }
                }
            }
        }
        ProbeDirection::DiagDown => {
            // Line y + x = c; vertices lie on |c| = 1.
            let c = &anchor.y + &anchor.x;
            match c.abs().cmp_checked(&one).expect("coordinates share a radicand") {
                std::cmp::Ordering::Equal => {
                    let vertex = if c.sign() > 0 {
                        Point::new(wide.clone(), -alpha)
                    } else {
                        Point::new(-&wide, alpha.clone())
                    };
                    ProbeValidity::Invalid(InvalidProbe::HitsVertex { vertex })
                }
                std::cmp::Ordering::Less => ProbeValidity::Valid(Probe {
                    direction: dir,
                    endpoints: (
                        Point::new(&c + alpha, -alpha),
                        Point::new(&c - alpha, alpha.clone()),
                    ),
                    edges: (RectEdge::Bottom, RectEdge::Top),
                }),
                std::cmp::Ordering::Greater => {
                    if c.sign() > 0 {
                        // Right edge up to the top edge.
                        ProbeValidity::Valid(Probe {
                            direction: dir,
                            endpoints: (
                                Point::new(wide.clone(), &c - &wide),
                                Point::new(&c - alpha, alpha.clone()),
                            ),
                            edges: (RectEdge::Right, RectEdge::Top),
                        })
                    } else {
                        // Bottom edge up to the left edge.
                        ProbeValidity::Valid(Probe {
                            direction: dir,
                            endpoints: (
                                Point::new(&c + alpha, -alpha),
                                Point::new(-&wide, &c + &wide),
                            ),
                            edges: (RectEdge::Bottom, RectEdge::Left),
                        })
                    }
                }
            }
        }
    }
}

/// Homology matrix of a probe, from the direction and the edge pair.
fn probe_matrix(probe: &Probe) -> MonodromyMatrix {
    let horizontal_edges = matches!(
        probe.edges,
        (RectEdge::Bottom, RectEdge::Top) | (RectEdge::Top, RectEdge::Bottom)
    );
    match (probe.direction, horizontal_edges) {
        (ProbeDirection::Horizontal, _) => MonodromyMatrix::new(-1, 0, 0, 1),
        (ProbeDirection::Vertical, _) => MonodromyMatrix::new(1, 0, 0, -1),
        (ProbeDirection::DiagUp, true) => MonodromyMatrix::new(1, 0, -2, -1),
        (ProbeDirection::DiagUp, false) => MonodromyMatrix::new(0, -1, -1, 0),
        (ProbeDirection::DiagDown, true) => MonodromyMatrix::new(1, 0, 2, -1),
        (ProbeDirection::DiagDown, false) => MonodromyMatrix::new(0, 1, 1, 0),
    }
}

/// Applies the probe to a point on its segment: the image is the reflection
/// across the probe midpoint (the unique point of the segment at equal
/// boundary distance), and the matrix is the probe's homology action.
pub fn probe_action(probe: &Probe, p: &Point) -> Result<ProbeStep> {
    if !on_segment(probe, p) {
        return Err(Error::NotOnProbe(p.to_string()));
    }
    let (e1, e2) = &probe.endpoints;
    let to = Point::new(&(&e1.x + &e2.x) - &p.x, &(&e1.y + &e2.y) - &p.y);
    Ok(ProbeStep { probe: probe.clone(), from: p.clone(), to, matrix: probe_matrix(probe) })
}

fn on_segment(probe: &Probe, p: &Point) -> bool {
    let (e1, e2) = &probe.endpoints;
    let on_line = match probe.direction {
        ProbeDirection::Horizontal => p.y == e1.y,
        ProbeDirection::Vertical => p.x == e1.x,
        ProbeDirection::DiagUp => &p.y - &p.x == &e1.y - &e1.x,
        ProbeDirection::DiagDown => &p.y + &p.x == &e1.y + &e1.x,
    };
    if !on_line {
        return false;
    }
    let within = |t: &ExactScalar, a: &ExactScalar, b: &ExactScalar| {
        a.cmp_checked(t).map(|c| c.is_le()).unwrap_or(false)
            && t.cmp_checked(b).map(|c| c.is_le()).unwrap_or(false)
    };
    match probe.direction {
        ProbeDirection::Horizontal => within(&p.x, &e1.x, &e2.x),
        _ => within(&p.y, &e1.y, &e2.y),
    }
}

/// Builds the probe through two distinct points one diagonal billiard
/// segment apart and applies it, checking that it indeed exchanges them.
fn diagonal_step(from: &Point, to: &Point, alpha: &ExactScalar) -> Result<ProbeStep> {
    let dx = (&to.x - &from.x).sign();
    let dy = (&to.y - &from.y).sign();
    debug_assert!(dx != 0 && dy != 0);
    let dir = if dx == dy { ProbeDirection::DiagUp } else { ProbeDirection::DiagDown };
    let probe = build_probe(dir, from, alpha)
        .valid()
        .expect("billiard segments never lie on a vertex diagonal");
    let step = probe_action(&probe, from)?;
    debug_assert_eq!(&step.to, to, "probe midpoint reflection must match the bounce");
    Ok(step)
}

fn horizontal_flip_step(p: &Point, alpha: &ExactScalar) -> Result<ProbeStep> {
    let probe = build_probe(ProbeDirection::Horizontal, p, alpha)
        .valid()
        .expect("horizontal probes are always valid");
    probe_action(&probe, p)
}

fn vertical_flip_step(p: &Point, alpha: &ExactScalar) -> Result<ProbeStep> {
    let probe = build_probe(ProbeDirection::Vertical, p, alpha)
        .valid()
        .expect("vertical probes are always valid");
    probe_action(&probe, p)
}

/// Appends the reflections carrying `cur` to `target` (same coordinates up
/// to sign).
fn flip_steps(
    steps: &mut Vec<ProbeStep>,
    mut cur: Point,
    target: &Point,
    alpha: &ExactScalar,
) -> Result<Point> {
    if cur.x != target.x {
        let step = horizontal_flip_step(&cur, alpha)?;
        cur = step.to.clone();
        steps.push(step);
    }
    if cur.y != target.y {
        let step = vertical_flip_step(&cur, alpha)?;
        cur = step.to.clone();
        steps.push(step);
    }
    debug_assert_eq!(&cur, target);
    Ok(cur)
}

/// Probe steps tracing the forward billiard branch of `p` through `count`
/// admissible bounces. Corner events contribute no step (the trajectory
/// retraces). Returns the steps and the final admissible bouncing point.
pub fn trajectory_steps(
    p: &Point,
    count: u64,
    alpha: &ExactScalar,
) -> Result<(Vec<ProbeStep>, Point)> {
    p.ensure_interior(alpha)?;
    if domain::is_stationary(p) {
        return Err(Error::StationaryPoint(p.to_string()));
    }
    let mut walker = billiard::start_walker(p, true)?;
    let mut steps = Vec::new();
    let mut cur = p.clone();
    let mut bounces = 0;
    while bounces < count {
        match walker.step()? {
            BounceEvent::Corner(_) => {}
            BounceEvent::Bounce(pt) => {
                bounces += 1;
                if pt != cur {
                    steps.push(diagonal_step(&cur, &pt, alpha)?);
                    cur = pt;
                }
            }
        }
    }
    Ok((steps, cur))
}

/// Constructs a finite probe sequence carrying `p` to `q` when they are
/// equivalent, or `None` when they are not. Stationary pairs take at most
/// two reflection probes; all other witnesses trace the billiard trajectory
/// of `p` until it meets a reflection of `q`, then restore signs.
pub fn witness_sequence(
    p: &Point,
    q: &Point,
    alpha: &ExactScalar,
) -> Result<Option<Vec<ProbeStep>>> {
    let cp = canonicalize(p, alpha)?;
    let cq = canonicalize(q, alpha)?;
    if cp != cq {
        return Ok(None);
    }
    if p == q {
        return Ok(Some(Vec::new()));
    }
    let mut steps = Vec::new();
    if domain::is_stationary(p) {
        flip_steps(&mut steps, p.clone(), q, alpha)?;
        return Ok(Some(steps));
    }
    let targets: Vec<Point> = [(false, false), (true, false), (false, true), (true, true)]
        .iter()
        .map(|&(fx, fy)| q.reflect(fx, fy))
        .collect();
    if targets.contains(p) {
        flip_steps(&mut steps, p.clone(), q, alpha)?;
        return Ok(Some(steps));
    }
    // Walk both branches in interleaved chunks until a reflection of q
    // appears; equivalence guarantees a finite hit, the cap is a safety net.
    let chunk = 64u64;
    let mut forward = billiard::start_walker(p, true)?;
    let mut backward = billiard::start_walker(p, false)?;
    let mut fw_steps: Vec<ProbeStep> = Vec::new();
    let mut bw_steps: Vec<ProbeStep> = Vec::new();
    let mut fw_cur = p.clone();
    let mut bw_cur = p.clone();
    loop {
        for (walker, acc, cur) in [
            (&mut forward, &mut fw_steps, &mut fw_cur),
            (&mut backward, &mut bw_steps, &mut bw_cur),
        ] {
            for _ in 0..chunk {
                match walker.step()? {
                    BounceEvent::Corner(_) => {}
                    BounceEvent::Bounce(pt) => {
                        if pt != *cur {
                            acc.push(diagonal_step(cur, &pt, alpha)?);
                            *cur = pt.clone();
                        }
                        if targets.contains(cur) {
                            let mut steps = std::mem::take(acc);
                            flip_steps(&mut steps, cur.clone(), q, alpha)?;
                            return Ok(Some(steps));
                        }
                    }
                }
            }
        }
    }
}

/// Ordered product of the step matrices (last step leftmost), checking that
/// the steps chain end to end.
pub fn compose_monodromy(steps: &[ProbeStep]) -> Result<MonodromyMatrix> {
    for (i, pair) in steps.windows(2).enumerate() {
        if pair[0].to != pair[1].from {
            return Err(Error::StepsNotChained(
                i,
                pair[0].to.to_string(),
                i + 1,
                pair[1].from.to_string(),
            ));
        }
    }
    let mut m = MonodromyMatrix::IDENTITY;
    for step in steps {
        m = step.matrix * m;
    }
    Ok(m)
}

/// Probe steps realizing the geometric normalization of `p` into the
/// stationary set or the upper wedge: quadrant reflections, then the
/// side-wedge bounce. Returns the steps and the normalized point.
pub fn normalization_steps(
    p: &Point,
    alpha: &ExactScalar,
) -> Result<(Vec<ProbeStep>, Point)> {
    p.ensure_interior(alpha)?;
    let norm = normalize_to_wedge(p);
    let mut steps = Vec::new();
    let mut cur = p.clone();
    if norm.flip_x {
        let step = horizontal_flip_step(&cur, alpha)?;
        cur = step.to.clone();
        steps.push(step);
    }
    if norm.flip_y {
        let step = vertical_flip_step(&cur, alpha)?;
        cur = step.to.clone();
        steps.push(step);
    }
    if norm.bounced {
        let step = diagonal_step(&cur, &norm.point, alpha)?;
        cur = step.to.clone();
        steps.push(step);
    }
    debug_assert_eq!(cur, norm.point);
    Ok((steps, cur))
}
