//! Dual-route check of the bouncing-set computation: the simulated set must
//! match an enumeration that never simulates, obtained by folding the slope
//! one line through the point across the reflection grid.
//!
//! The grid preimage of the table boundary consists of the vertical lines
//! `x = (2 l1 + 1)(1 + r)` and the horizontal lines `y = (2 l2 + 1) r`;
//! grid intersections fold onto table corners. The trajectory is the folded
//! image of one connected component of the line minus the corner preimages,
//! so the oracle enumerates line-grid crossings inside the component around
//! the base point (one full pattern period when no corner interferes) and
//! folds them.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;
use split_tori::billiard::{bouncing_set, fold};
use split_tori::domain::{is_stationary, r_value, Point};
use split_tori::ExactScalar;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Crossing parameters `t` of the line `(x + t, y + t)` with one family of
/// grid lines `coord + t = (2l + 1) * h`, for `l` chosen so `t` covers
/// `[lo, hi]`.
fn family_crossings(coord: &BigRational, h: &BigRational, lo: &BigRational, hi: &BigRational) -> Vec<BigRational> {
    // (2l + 1) h = coord + t  =>  l = ((coord + t) / h - 1) / 2.
    let l_min = (((coord + lo) / h - rat(1, 1)) / rat(2, 1)).floor().to_integer() - 1;
    let l_max = (((coord + hi) / h - rat(1, 1)) / rat(2, 1)).ceil().to_integer() + 1;
    let mut out = Vec::new();
    let mut l = l_min;
    while l <= l_max {
        let t = BigRational::from(&l * 2 + 1) * h - coord;
        if &t >= lo && &t <= hi {
            out.push(t);
        }
        l += 1;
    }
    out
}

/// Bouncing set by line folding, without any billiard simulation.
fn folded_bouncing_set(p: &Point) -> HashSet<Point> {
    let r = r_value(p);
    let r_rat = r.as_rational().expect("oracle is for rational tables").clone();
    let x = p.x.as_rational().unwrap().clone();
    let y = p.y.as_rational().unwrap().clone();
    let h_v = &r_rat + rat(1, 1); // vertical grid spacing base (1 + r)
    let h_h = r_rat.clone();
    // Pattern period of the crossing sequence: lcm of the two spacings.
    let a = r_rat.numer().clone();
    let b = r_rat.denom().clone();
    let lcm = (2 * (&a + &b)).lcm(&(2 * &a));
    let period = BigRational::new(lcm, b);
    let window = &period * rat(2, 1);
    let lo = -window.clone();
    let hi = window.clone();
    let vert = family_crossings(&x, &h_v, &lo, &hi);
    let horiz = family_crossings(&y, &h_h, &lo, &hi);
    // Corner preimages: common crossings.
    let vset: HashSet<BigRational> = vert.iter().cloned().collect();
    let corners: Vec<BigRational> = horiz.iter().filter(|t| vset.contains(t)).cloned().collect();
    let zero = rat(0, 1);
    // Corner-free lines fold the whole two-period window; otherwise only
    // the open component around the base point maps onto the trajectory.
    let bounds = if corners.is_empty() {
        None
    } else {
        let t_lo = corners
            .iter()
            .filter(|t| **t < zero)
            .max()
            .cloned()
            .unwrap_or(-window.clone());
        let t_hi = corners
            .iter()
            .filter(|t| **t > zero)
            .min()
            .cloned()
            .unwrap_or(window.clone());
        Some((t_lo, t_hi))
    };
    let mut out = HashSet::new();
    for t in vert.into_iter().chain(horiz) {
        if let Some((t_lo, t_hi)) = &bounds {
            if &t <= t_lo || &t >= t_hi {
                continue;
            }
        }
        let lift = Point::new(
            ExactScalar::from_big_rational(&x + &t),
            ExactScalar::from_big_rational(&y + &t),
        );
        out.insert(fold(&r, &lift).unwrap());
    }
    out
}

#[test]
fn simulation_agrees_with_line_folding() {
    for q in 1i64..=6 {
        for p in 1i64..=7 - q {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let y = ExactScalar::rational(p, q);
            for j in 0..4 * (p + q) {
                let point = Point::new(ExactScalar::rational(j, 4 * q), y.clone());
                if is_stationary(&point) {
                    continue;
                }
                let simulated = bouncing_set(&point).unwrap();
                let folded = folded_bouncing_set(&point);
                assert_eq!(simulated, folded, "at {point}");
            }
        }
    }
}

#[test]
fn folding_oracle_covers_side_wedge_points() {
    for text in ["(3/2,0)", "(2,1/3)", "(-7/4,1/4)", "(5/2,-1/2)"] {
        let point = Point::parse(text).unwrap();
        let simulated = bouncing_set(&point).unwrap();
        let folded = folded_bouncing_set(&point);
        assert_eq!(simulated, folded, "at {point}");
    }
}
