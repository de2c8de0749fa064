//! Cut-off billiard dynamics: strip volumes, delta selection, and grid
//! simulation of late recurrence.
//!
//! Four diagonal lines cut the rectangle: `y - x = +-1` and `y + x = +-1`.
//! The cut-off region of width `delta` is the union of the strips of
//! integral-affine distance below `delta` from these lines (the defining
//! functionals `y -+ x -+ 1` have primitive integer gradient, so the strip
//! condition is `|f_i| < delta`). Outside the strips the cut-off map
//! advances every base point one billiard bounce per application; orbits
//! entering a strip are "burned" and make no further guarantees. The
//! measure of the burned set over `N` iterates is at most `(N + 1)` times
//! the strip volume, which is what [`delta_for`] inverts.
//!
//! Areas are exact: strips clipped to the rectangle are convex polygons,
//! and the union volume comes from inclusion-exclusion over half-plane
//! clipping with shoelace areas.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::billiard;
use crate::domain::{self, Point};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// The four cut lines and strip geometry for a rectangle of size `alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripConfig {
    pub alpha: ExactScalar,
    pub delta: ExactScalar,
}

impl StripConfig {
    pub fn new(alpha: ExactScalar, delta: ExactScalar) -> Result<Self> {
        if alpha.sign() <= 0 {
            return Err(Error::InvalidArgument(format!("size {alpha} must be positive")));
        }
        if delta.sign() < 0 {
            return Err(Error::InvalidArgument(format!("width {delta} must be nonnegative")));
        }
        Ok(StripConfig { alpha, delta })
    }

    /// Values of the four line functionals `y - x - 1`, `y - x + 1`,
    /// `y + x - 1`, `y + x + 1` at `p`.
    pub fn functionals(p: &Point) -> [ExactScalar; 4] {
        let one = ExactScalar::one();
        let diff = &p.y - &p.x;
        let sum = &p.y + &p.x;
        [&diff - &one, &diff + &one, &sum - &one, &sum + &one]
    }

    /// Whether `p` lies in the open cut-off region (some `|f_i| < delta`).
    pub fn in_cutoff(&self, p: &Point) -> bool {
        Self::functionals(p).iter().any(|f| {
            f.abs()
                .cmp_checked(&self.delta)
                .map(|c| c.is_lt())
                .unwrap_or(false)
        })
    }
}

/// Convex polygon with exact vertices, counterclockwise.
type Polygon = Vec<Point>;

fn rectangle(alpha: &ExactScalar) -> Polygon {
    let wide = &ExactScalar::one() + alpha;
    vec![
        Point::new(-&wide, -alpha),
        Point::new(wide.clone(), -alpha),
        Point::new(wide.clone(), alpha.clone()),
        Point::new(-&wide, alpha.clone()),
    ]
}

/// Clips a convex polygon by the half-plane `a x + b y <= c`.
fn clip_half_plane(
    poly: &Polygon,
    a: &ExactScalar,
    b: &ExactScalar,
    c: &ExactScalar,
) -> Polygon {
    let value = |p: &Point| &(a * &p.x) + &(b * &p.y);
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let cur = &poly[i];
        let next = &poly[(i + 1) % n];
        let vc = value(cur);
        let vn = value(next);
        let inside_cur = vc.cmp_checked(c).map(|o| o.is_le()).unwrap_or(false);
        let inside_next = vn.cmp_checked(c).map(|o| o.is_le()).unwrap_or(false);
        if inside_cur {
            out.push(cur.clone());
        }
        if inside_cur != inside_next {
            // Intersection of the edge with the line a x + b y = c.
            let t = (c - &vc).checked_div(&(&vn - &vc)).expect("crossing edge is transverse");
            let x = &cur.x + &(&t * &(&next.x - &cur.x));
            let y = &cur.y + &(&t * &(&next.y - &cur.y));
            out.push(Point::new(x, y));
        }
    }
    out
}

/// Shoelace area of a convex polygon (counterclockwise positive).
fn polygon_area(poly: &Polygon) -> ExactScalar {
    let mut twice = ExactScalar::zero();
    let n = poly.len();
    if n < 3 {
        return twice;
    }
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        twice = &twice + &(&(&p.x * &q.y) - &(&q.x * &p.y));
    }
    twice
        .checked_div(&ExactScalar::integer(2))
        .expect("division by two is exact")
        .abs()
}

/// Half-plane pair of one strip `|f_i| < delta` as `(a, b, c_low, c_high)`
/// meaning `c_low <= a x + b y <= c_high`.
fn strip_bounds(i: usize, delta: &ExactScalar) -> (ExactScalar, ExactScalar, ExactScalar, ExactScalar) {
    let one = ExactScalar::one();
    // f1 = y - x - 1, f2 = y - x + 1, f3 = y + x - 1, f4 = y + x + 1.
    let (a, b, shift) = match i {
        0 => (ExactScalar::integer(-1), ExactScalar::one(), one.clone()),
        1 => (ExactScalar::integer(-1), ExactScalar::one(), -&one),
        2 => (ExactScalar::one(), ExactScalar::one(), one.clone()),
        _ => (ExactScalar::one(), ExactScalar::one(), -&one),
    };
    // |a x + b y - shift| <= delta.
    (a, b, &shift - delta, &shift + delta)
}

/// Normalized volume of the cut-off region: the area of the union of the
/// four strips inside the rectangle, divided by the rectangle area.
/// Computed by inclusion-exclusion over exact half-plane clipping.
pub fn cutoff_volume(alpha: &ExactScalar, delta: &ExactScalar) -> Result<ExactScalar> {
    let config = StripConfig::new(alpha.clone(), delta.clone())?;
    let alpha = &config.alpha;
    let delta = &config.delta;
    if delta.is_zero() {
        return Ok(ExactScalar::zero());
    }
    let rect = rectangle(alpha);
    let mut total = ExactScalar::zero();
    for mask in 1u32..16 {
        let mut poly = rect.clone();
        for i in 0..4 {
            if mask & (1 << i) == 0 {
                continue;
            }
            let (a, b, lo, hi) = strip_bounds(i, delta);
            poly = clip_half_plane(&poly, &a, &b, &hi);
            let neg_a = -&a;
            let neg_b = -&b;
            let neg_lo = -&lo;
            poly = clip_half_plane(&poly, &neg_a, &neg_b, &neg_lo);
            if poly.len() < 3 {
                poly.clear();
                break;
            }
        }
        let area = polygon_area(&poly);
        if mask.count_ones() % 2 == 1 {
            total = &total + &area;
        } else {
            total = &total - &area;
        }
    }
    let rect_area = polygon_area(&rect);
    total.checked_div(&rect_area)
}

/// Picks `delta > 0` with `(N + 1) * cutoff_volume(alpha, delta) < epsilon`
/// by halving from `alpha / 4`. Requires `0 < epsilon`.
pub fn delta_for(epsilon: &ExactScalar, n: u64, alpha: &ExactScalar) -> Result<ExactScalar> {
    if epsilon.sign() <= 0 {
        return Err(Error::InvalidArgument(format!("budget {epsilon} must be positive")));
    }
    let budget = ExactScalar::integer((n + 1) as i64);
    let mut delta = alpha
        .checked_div(&ExactScalar::integer(4))
        .expect("size is positive");
    loop {
        let volume = cutoff_volume(alpha, &delta)?;
        if (&budget * &volume)
            .cmp_checked(epsilon)
            .map(|c| c.is_lt())
            .unwrap_or(false)
        {
            return Ok(delta);
        }
        delta = delta
            .checked_div(&ExactScalar::integer(2))
            .expect("halving is exact");
    }
}

/// One cell of a recurrence grid simulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub point: Point,
    /// Burned: some iterate `0..=n` entered the cut-off region.
    pub burned: bool,
    /// Survived: never burned and all iterates `0..=n` pairwise distinct.
    pub survived: bool,
}

/// Result of a grid simulation of the cut-off billiard map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub alpha: ExactScalar,
    pub delta: ExactScalar,
    pub iterates: u64,
    pub grid_resolution: u32,
    pub survivors: u64,
    pub total: u64,
    /// Exact fraction `survivors / total`.
    pub fraction: ExactScalar,
    pub cells: Vec<GridCell>,
}

/// Simulates the idealized cut-off billiard map on a cell-centered
/// `grid_resolution^2` rational grid: each application advances one
/// admissible billiard bounce, orbits are burned on entering the cut-off
/// region, and a point survives when its `n + 1` iterates (start included)
/// stay unburned and pairwise distinct. Returns the exact surviving
/// fraction together with the per-cell outcomes.
pub fn simulate_delta_billiard(
    alpha: &ExactScalar,
    delta: &ExactScalar,
    n: u64,
    grid_resolution: u32,
) -> Result<SimulationReport> {
    if grid_resolution == 0 {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    let config = StripConfig::new(alpha.clone(), delta.clone())?;
    let g = grid_resolution as i64;
    let wide = &ExactScalar::one() + alpha;
    let two = ExactScalar::integer(2);
    let mut cells = Vec::with_capacity((g * g) as usize);
    let mut survivors = 0u64;
    for i in 0..g {
        // x = -width + (2i + 1) * width / g, cell-centered.
        let fx = ExactScalar::rational(2 * i + 1, g);
        let x = &(&fx * &wide) - &wide;
        for j in 0..g {
            let fy = ExactScalar::rational(2 * j + 1, g);
            let y = &(&fy * alpha) - alpha;
            let start = Point::new(x.clone(), y.clone());
            let (burned, survived) = simulate_orbit(&config, &start, n)?;
            if survived {
                survivors += 1;
            }
            cells.push(GridCell { point: start, burned, survived });
        }
    }
    let total = (g * g) as u64;
    let fraction = ExactScalar::from_big_rational(BigRational::new(
        survivors.into(),
        total.into(),
    ));
    let _ = two;
    Ok(SimulationReport {
        alpha: alpha.clone(),
        delta: delta.clone(),
        iterates: n,
        grid_resolution,
        survivors,
        total,
        fraction,
        cells,
    })
}

fn simulate_orbit(config: &StripConfig, start: &Point, n: u64) -> Result<(bool, bool)> {
    if config.in_cutoff(start) {
        return Ok((true, false));
    }
    let mut seen = vec![start.clone()];
    let mut iter = billiard::BounceIter::new(start)?;
    for _ in 0..n {
        let cur = iter.next_point()?;
        if config.in_cutoff(&cur) {
            return Ok((true, false));
        }
        if seen.contains(&cur) {
            return Ok((false, false));
        }
        seen.push(cur);
    }
    Ok((false, true))
}

/// Whether the first `n` admissible bouncing points of `p` are pairwise
/// distinct and distinct from `p` itself: the base-point certificate for
/// `n` disjoint iterates. Errors on stationary points.
pub fn disjoint_iterates(p: &Point, n: u64) -> Result<bool> {
    if domain::is_stationary(p) {
        return Err(Error::StationaryPoint(p.to_string()));
    }
    let mut seen = vec![p.clone()];
    let mut iter = billiard::BounceIter::new(p)?;
    for _ in 0..n {
        let cur = iter.next_point()?;
        if seen.contains(&cur) {
            return Ok(false);
        }
        seen.push(cur);
    }
    Ok(true)
}
