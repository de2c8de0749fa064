//! Hamiltonian monodromy groups of split tori.
//!
//! In the torus-action basis every realizable monodromy element of a split
//! torus is lower triangular of the form `[[+-1, 0], [2k, +-1]]` once the
//! base point is normalized into the stationary set or the upper wedge;
//! points elsewhere carry the conjugate group under the base change induced
//! by the normalizing probes. The group depends only on arithmetic of the
//! normalized point `(x, y)`:
//!
//! * stationary points split into origin / central segment / segment ends /
//!   cross rays, each with its own finite or dihedral group;
//! * wedge points with irrational `y` have trivial group unless
//!   `x = k1 + k2 y` over the integers, in which case the involution
//!   `[[-1, 0], [2 k2, 1]]` appears — exactly when some coefficient is
//!   even; with both coefficients odd the trajectory runs through a table
//!   corner and only the upper bound is known;
//! * wedge points with `y = p/q` carry the shear `[[1, 0], [2q, 1]]`, and
//!   when `x = p'/q` also `[[-1, 0], [2 m2, 1]]` with `m2 = p' p^{-1} mod
//!   q`; the group is exact when `p'` and `p + q` have opposite parity and
//!   an upper bound otherwise (the corner-hitting case again).
//!
//! The two bound cases are genuinely open; groups carry an exactness flag
//! and, where known, separately realizable lower-bound generators so the
//! gap stays machine-readable.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::domain::{self, Point};
use crate::error::{Error, Result};
use crate::probes::{self, MonodromyMatrix};
use crate::scalar::ExactScalar;

/// Which arithmetic case produced the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonodromyCase {
    /// `(0, 0)`.
    Origin,
    /// Central segment, `0 < |x| < 1`, `y = 0`.
    CentralSegment,
    /// `(+-1, 0)`.
    SegmentEnd,
    /// Cross rays `|x| = |y| + 1`, `y != 0`.
    CornerRay,
    /// Wedge, irrational `y`, `x` outside `Z + Z y`.
    IrrationalGeneric,
    /// Wedge, irrational `y`, `x = k1 + k2 y` with some coefficient even.
    IrrationalInvolution,
    /// Wedge, irrational `y`, both coefficients odd: upper bound only.
    IrrationalInvolutionBound,
    /// Wedge, `y = p/q`, `x` outside `(1/q) Z`.
    RationalShear,
    /// Wedge, `y = p/q`, `x = p'/q`, `p'` and `p + q` of opposite parity.
    RationalDihedral,
    /// Wedge, `y = p/q`, `x = p'/q`, `p' = p + q (mod 2)`: upper bound only.
    RationalDihedralBound,
}

/// Whether the listed generators pin the group or only bound it above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    UpperBound,
}

/// Isomorphism type of the (bounding) group presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsoType {
    #[serde(rename = "trivial")]
    Trivial,
    #[serde(rename = "Z2")]
    Z2,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "Z x| Z2")]
    ZRtimesZ2,
    #[serde(rename = "Z2 |x Z")]
    Z2LtimesZ,
    #[serde(rename = "Z2 |x Z x| Z2")]
    Z2LtimesZRtimesZ2,
}

/// Arithmetic parameters pinning the matrix family of each case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum CaseParams {
    None {},
    /// `{1, [[-1,0],[2 k2, 1]]}`.
    Involution { k2: i64 },
    /// `{[[1,0],[2 k q, 1]]}`, and with `m2` also the odd-determinant coset
    /// `[[-1,0],[2(m2 + k q), 1]]`.
    Shear { q: i64, m2: Option<i64> },
}

/// The Hamiltonian monodromy group of a split torus.
///
/// `generators` present the group at the normalized base point;
/// `base_change` is the homology map induced by the normalizing probe
/// sequence, so the group at the original point is the conjugate
/// `base_change^{-1} . <generators> . base_change`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyGroup {
    pub case: MonodromyCase,
    pub iso_type: IsoType,
    pub exactness: Exactness,
    /// Generators of the group (or of the upper bound) at the normalized
    /// point; always of the form `[[+-1, 0], [2k, +-1]]`.
    pub generators: Vec<MonodromyMatrix>,
    /// Elements known to be realizable in the bound cases (empty for exact
    /// cases, where `generators` are all realizable).
    pub lower_bound_generators: Vec<MonodromyMatrix>,
    /// Normalized base point in the stationary set or the upper wedge.
    pub base_point: Point,
    /// Homology map from the original point's frame to `base_point`'s.
    pub base_change: MonodromyMatrix,
    params: CaseParams,
}

const SHEAR_2: MonodromyMatrix = MonodromyMatrix([[1, 0], [2, 1]]);
const FLIP_X: MonodromyMatrix = MonodromyMatrix([[-1, 0], [0, 1]]);
const FLIP_Y: MonodromyMatrix = MonodromyMatrix([[1, 0], [0, -1]]);
const SWAP: MonodromyMatrix = MonodromyMatrix([[0, 1], [1, 0]]);

/// Computes the Hamiltonian monodromy group of `T(p)` in the rectangle of
/// size `alpha`.
pub fn monodromy_group(p: &Point, alpha: &ExactScalar) -> Result<MonodromyGroup> {
    p.ensure_interior(alpha)?;
    let (steps, base) = probes::normalization_steps(p, alpha)?;
    let base_change = probes::compose_monodromy(&steps)?;
    let mut group = normalized_group(&base)?;
    group.base_change = base_change;
    Ok(group)
}

fn normalized_group(p: &Point) -> Result<MonodromyGroup> {
    let make = |case, iso_type, exactness, generators, lower, params| MonodromyGroup {
        case,
        iso_type,
        exactness,
        generators,
        lower_bound_generators: lower,
        base_point: p.clone(),
        base_change: MonodromyMatrix::IDENTITY,
        params,
    };
    if domain::is_stationary(p) {
        let x = p.x.abs();
        let one = ExactScalar::one();
        return Ok(if p.y.is_zero() && x.is_zero() {
            make(
                MonodromyCase::Origin,
                IsoType::Z2LtimesZRtimesZ2,
                Exactness::Exact,
                vec![SHEAR_2, FLIP_Y, FLIP_X],
                vec![],
                CaseParams::None {},
            )
        } else if p.y.is_zero() && x == one {
            make(
                MonodromyCase::SegmentEnd,
                IsoType::Z2,
                Exactness::Exact,
                vec![FLIP_Y],
                vec![],
                CaseParams::None {},
            )
        } else if p.y.is_zero() {
            make(
                MonodromyCase::CentralSegment,
                IsoType::Z2LtimesZ,
                Exactness::Exact,
                vec![SHEAR_2, FLIP_Y],
                vec![],
                CaseParams::None {},
            )
        } else {
            make(
                MonodromyCase::CornerRay,
                IsoType::Z2,
                Exactness::Exact,
                vec![SWAP],
                vec![],
                CaseParams::None {},
            )
        });
    }
    debug_assert!(domain::in_upper_wedge(p));
    let y = &p.y;
    let x = &p.x;
    if let Some(y_rat) = y.as_rational() {
        let q_big = y_rat.denom().clone();
        let p_big = y_rat.numer().clone();
        let q = big_to_i64(&q_big)?;
        let shear = MonodromyMatrix::new(1, 0, 2 * q, 1);
        let in_lattice = x
            .as_rational()
            .map(|xr| (xr * num_rational::BigRational::from(q_big.clone())).is_integer())
            .unwrap_or(false);
        if !in_lattice {
            return Ok(make(
                MonodromyCase::RationalShear,
                IsoType::Z,
                Exactness::Exact,
                vec![shear],
                vec![],
                CaseParams::Shear { q, m2: None },
            ));
        }
        let p_prime = (x.as_rational().unwrap() * num_rational::BigRational::from(q_big.clone()))
            .to_integer();
        let m2_big = minimal_m2(&p_prime, &p_big, &q_big);
        let m2 = big_to_i64(&m2_big)?;
        let involution = MonodromyMatrix::new(-1, 0, 2 * m2, 1);
        let corner_parity = (&p_prime - &p_big - &q_big).is_even();
        if corner_parity {
            // Trajectory meets a corner; only the inclusion is known. The
            // horizontal reflection fixes the point when x = 0 and is then
            // genuinely realized.
            let lower = if x.is_zero() { vec![FLIP_X] } else { vec![] };
            Ok(make(
                MonodromyCase::RationalDihedralBound,
                IsoType::ZRtimesZ2,
                Exactness::UpperBound,
                vec![shear, involution],
                lower,
                CaseParams::Shear { q, m2: Some(m2) },
            ))
        } else {
            Ok(make(
                MonodromyCase::RationalDihedral,
                IsoType::ZRtimesZ2,
                Exactness::Exact,
                vec![shear, involution],
                vec![],
                CaseParams::Shear { q, m2: Some(m2) },
            ))
        }
    } else {
        let (k1, k2) = x.decompose_over(y)?;
        if !(k1.is_integer() && k2.is_integer()) {
            return Ok(make(
                MonodromyCase::IrrationalGeneric,
                IsoType::Trivial,
                Exactness::Exact,
                vec![],
                vec![],
                CaseParams::None {},
            ));
        }
        let k1 = k1.to_integer();
        let k2_big = k2.to_integer();
        let k2 = big_to_i64(&k2_big)?;
        let involution = MonodromyMatrix::new(-1, 0, 2 * k2, 1);
        if k1.is_odd() && k2_big.is_odd() {
            let lower = if x.is_zero() { vec![FLIP_X] } else { vec![] };
            Ok(make(
                MonodromyCase::IrrationalInvolutionBound,
                IsoType::Z2,
                Exactness::UpperBound,
                vec![involution],
                lower,
                CaseParams::Involution { k2 },
            ))
        } else {
            Ok(make(
                MonodromyCase::IrrationalInvolution,
                IsoType::Z2,
                Exactness::Exact,
                vec![involution],
                vec![],
                CaseParams::Involution { k2 },
            ))
        }
    }
}

/// Minimal `m2 >= 0` with `p' = m1 q + m2 p` solvable, i.e. the least
/// nonnegative residue of `p' p^{-1} mod q`.
fn minimal_m2(p_prime: &BigInt, p: &BigInt, q: &BigInt) -> BigInt {
    if q.is_one() {
        return BigInt::from(0);
    }
    let p_inv = mod_inverse(p, q).expect("p and q are coprime");
    (p_prime * p_inv).mod_floor(q)
}

fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(modulus);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(modulus))
}

fn big_to_i64(n: &BigInt) -> Result<i64> {
    n.to_i64().ok_or_else(|| {
        Error::InvalidArgument(format!("group parameter {n} exceeds the machine range"))
    })
}

/// Exact membership test of `m` (expressed in the original point's frame)
/// against the group's displayed family. For `UpperBound` groups a `true`
/// answer means "consistent with the bound".
pub fn monodromy_membership(m: &MonodromyMatrix, group: &MonodromyGroup) -> bool {
    // Move into the normalized frame.
    let mm = m.conjugate_by(&group.base_change).0;
    let lower_shear = |c_mod: i64, residue: i64| {
        // Matrices [[a, 0], [c, 1]] with a = +-1 and the stated congruence.
        mm[0][1] == 0
            && mm[1][1] == 1
            && (mm[0][0] == 1 || mm[0][0] == -1)
            && (mm[1][0] - residue).rem_euclid(c_mod) == 0
    };
    match group.case {
        MonodromyCase::Origin => {
            mm[0][1] == 0
                && (mm[0][0] == 1 || mm[0][0] == -1)
                && (mm[1][1] == 1 || mm[1][1] == -1)
                && mm[1][0] % 2 == 0
        }
        MonodromyCase::CentralSegment => {
            mm[0][1] == 0
                && mm[0][0] == 1
                && (mm[1][1] == 1 || mm[1][1] == -1)
                && mm[1][0] % 2 == 0
        }
        MonodromyCase::SegmentEnd => mm == MonodromyMatrix::IDENTITY.0 || mm == FLIP_Y.0,
        MonodromyCase::CornerRay => mm == MonodromyMatrix::IDENTITY.0 || mm == SWAP.0,
        MonodromyCase::IrrationalGeneric => mm == MonodromyMatrix::IDENTITY.0,
        MonodromyCase::IrrationalInvolution | MonodromyCase::IrrationalInvolutionBound => {
            let CaseParams::Involution { k2 } = group.params else { unreachable!() };
            mm == MonodromyMatrix::IDENTITY.0 || mm == MonodromyMatrix::new(-1, 0, 2 * k2, 1).0
        }
        MonodromyCase::RationalShear => {
            let CaseParams::Shear { q, .. } = group.params else { unreachable!() };
            mm[0][0] == 1 && lower_shear(2 * q, 0)
        }
        MonodromyCase::RationalDihedral | MonodromyCase::RationalDihedralBound => {
            let CaseParams::Shear { q, m2 } = group.params else { unreachable!() };
            let m2 = m2.expect("dihedral cases carry m2");
            if mm[0][0] == 1 {
                lower_shear(2 * q, 0)
            } else {
                lower_shear(2 * q, 2 * m2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::{compose_monodromy, trajectory_steps, witness_sequence};
    use rand::prelude::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn pt(text: &str) -> Point {
        Point::parse(text).unwrap()
    }

    fn sc(text: &str) -> ExactScalar {
        ExactScalar::parse(text).unwrap()
    }

    #[test]
    fn stationary_cases() {
        let two = sc("2");
        let g = monodromy_group(&pt("(0,0)"), &two).unwrap();
        assert_eq!(g.case, MonodromyCase::Origin);
        assert_eq!(g.generators, vec![SHEAR_2, FLIP_Y, FLIP_X]);
        assert_eq!(g.exactness, Exactness::Exact);

        let g = monodromy_group(&pt("(1/2,0)"), &two).unwrap();
        assert_eq!(g.case, MonodromyCase::CentralSegment);
        assert_eq!(g.iso_type, IsoType::Z2LtimesZ);

        let g = monodromy_group(&pt("(-1,0)"), &two).unwrap();
        assert_eq!(g.case, MonodromyCase::SegmentEnd);
        assert_eq!(g.generators, vec![FLIP_Y]);

        let g = monodromy_group(&pt("(3/2,1/2)"), &two).unwrap();
        assert_eq!(g.case, MonodromyCase::CornerRay);
        assert_eq!(g.generators, vec![SWAP]);
    }

    #[test]
    fn bound_case_at_the_cautionary_point() {
        // (0, 1): p = q = 1, p' = 0, m2 = 0; only the bound is known, and
        // the horizontal reflection is the known realizable part.
        let g = monodromy_group(&pt("(0,1)"), &sc("2")).unwrap();
        assert_eq!(g.case, MonodromyCase::RationalDihedralBound);
        assert_eq!(g.exactness, Exactness::UpperBound);
        assert_eq!(
            g.generators,
            vec![MonodromyMatrix::new(1, 0, 2, 1), MonodromyMatrix::new(-1, 0, 0, 1)]
        );
        assert_eq!(g.lower_bound_generators, vec![FLIP_X]);
        assert_eq!(g.iso_type, IsoType::ZRtimesZ2);
    }

    #[test]
    fn shear_case() {
        let g = monodromy_group(&pt("(1/4,1/2)"), &sc("2")).unwrap();
        assert_eq!(g.case, MonodromyCase::RationalShear);
        assert_eq!(g.generators, vec![MonodromyMatrix::new(1, 0, 4, 1)]);
        assert_eq!(g.iso_type, IsoType::Z);
        assert_eq!(g.exactness, Exactness::Exact);
        assert!(monodromy_membership(&MonodromyMatrix::new(1, 0, 4, 1), &g));
        assert!(monodromy_membership(&MonodromyMatrix::new(1, 0, -8, 1), &g));
        assert!(!monodromy_membership(&MonodromyMatrix::new(1, 0, 2, 1), &g));
    }

    #[test]
    fn irrational_cases() {
        let alpha = sc("2");
        // x outside Z + Z y: trivial group.
        let p = Point::new(sc("1/3"), sc("0+1/2*sqrt(2)"));
        let g = monodromy_group(&p, &alpha).unwrap();
        assert_eq!(g.case, MonodromyCase::IrrationalGeneric);
        assert!(g.generators.is_empty());
        assert!(monodromy_membership(&MonodromyMatrix::IDENTITY, &g));
        assert!(!monodromy_membership(&MonodromyMatrix::new(-1, 0, 2, 1), &g));

        // x = y - 2 in the wedge: k1 = -2 even, k2 = 1: exact involution.
        let y = sc("0+3/2*sqrt(2)");
        let p = Point::new(&y - &sc("2"), y);
        assert!(domain::in_upper_wedge(&p));
        let alpha3 = sc("3");
        let g = monodromy_group(&p, &alpha3).unwrap();
        assert_eq!(g.case, MonodromyCase::IrrationalInvolution);
        assert_eq!(g.generators, vec![MonodromyMatrix::new(-1, 0, 2, 1)]);
        assert!(monodromy_membership(&MonodromyMatrix::new(-1, 0, 2, 1), &g));
        assert!(!monodromy_membership(&MonodromyMatrix::new(-1, 0, 4, 1), &g));

        // A side-wedge point with the same arithmetic carries the conjugate
        // group: the normalizing bounce swaps the basis vectors.
        let side = Point::new(sc("2+1/2*sqrt(2)"), sc("0+1/2*sqrt(2)"));
        let g = monodromy_group(&side, &alpha).unwrap();
        assert_eq!(g.case, MonodromyCase::IrrationalInvolution);
        assert_eq!(g.base_change, MonodromyMatrix::new(0, 1, 1, 0));
        let conjugated = MonodromyMatrix::new(-1, 0, 2, 1).conjugate_by(&g.base_change.inverse());
        assert_eq!(conjugated, MonodromyMatrix::new(1, 2, 0, -1));
        assert!(monodromy_membership(&conjugated, &g));
        assert!(!monodromy_membership(&MonodromyMatrix::new(-1, 0, 2, 1), &g));

        // x = y - 1: k1 = -1, k2 = 1, both odd: bound only.
        let y = sc("0+3/4*sqrt(2)");
        let p = Point::new(&y - &sc("1"), y);
        assert!(domain::in_upper_wedge(&p));
        let g = monodromy_group(&p, &alpha).unwrap();
        assert_eq!(g.case, MonodromyCase::IrrationalInvolutionBound);
        assert_eq!(g.exactness, Exactness::UpperBound);
        assert_eq!(g.generators, vec![MonodromyMatrix::new(-1, 0, 2, 1)]);
    }

    #[test]
    fn m2_is_well_defined() {
        // 0 <= m2 < q and p' = m2 p (mod q).
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let q: i64 = rng.gen_range(1..=9);
            let p: i64 = rng.gen_range(1..=9);
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let p_prime: i64 = rng.gen_range(-(q + p)..=(q + p));
            let x = ExactScalar::rational(p_prime, q);
            let point = Point::new(x, ExactScalar::rational(p, q));
            if !domain::in_upper_wedge(&point) {
                continue;
            }
            let g = monodromy_group(&point, &(&sc("3") + &ExactScalar::rational(p, q))).unwrap();
            let CaseParams::Shear { q: gq, m2: Some(m2) } = g.params else {
                panic!("expected a dihedral case at {point}");
            };
            assert_eq!(gq, q);
            assert!(0 <= m2 && m2 < q.max(1));
            // m2 belongs to the normalized (reflected) point.
            assert_eq!((p_prime.abs() - m2 * p).rem_euclid(q.max(1)), 0, "at {point}");
        }
    }

    #[test]
    fn groups_conjugate_under_normalization() {
        let alpha = sc("2");
        // A side-wedge point and its normalized image.
        let p = pt("(2,1/3)");
        let g = monodromy_group(&p, &alpha).unwrap();
        let (steps, base) = probes::normalization_steps(&p, &alpha).unwrap();
        assert_eq!(g.base_point, base);
        assert_eq!(g.base_change, compose_monodromy(&steps).unwrap());
        let gb = monodromy_group(&base, &alpha).unwrap();
        assert_eq!(g.case, gb.case);
        assert_eq!(g.generators, gb.generators);
        // Membership happens in the original frame: conjugated generators
        // belong, raw generators need not.
        for gen in &g.generators {
            let back = gen.conjugate_by(&g.base_change.inverse());
            assert!(monodromy_membership(&back, &g));
        }
    }

    #[test]
    fn case_partition_is_total() {
        // Every interior rational point lands in exactly one case without
        // panicking; spot check a grid.
        let alpha = sc("2");
        for i in -20..=20 {
            for j in -13..=13 {
                let p = Point::new(ExactScalar::rational(i, 7), ExactScalar::rational(j, 7));
                if !p.in_interior(&alpha) {
                    continue;
                }
                let g = monodromy_group(&p, &alpha).unwrap();
                let stationary = domain::is_stationary(&p);
                let stationary_case = matches!(
                    g.case,
                    MonodromyCase::Origin
                        | MonodromyCase::CentralSegment
                        | MonodromyCase::SegmentEnd
                        | MonodromyCase::CornerRay
                );
                assert_eq!(stationary, stationary_case, "at {p}");
                let bound = matches!(
                    g.case,
                    MonodromyCase::IrrationalInvolutionBound
                        | MonodromyCase::RationalDihedralBound
                );
                assert_eq!(
                    g.exactness == Exactness::UpperBound,
                    bound,
                    "exactness flag out of sync at {p}"
                );
            }
        }
    }

    #[test]
    fn probe_loops_land_in_the_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 60 {
            let q: i64 = rng.gen_range(1..=4);
            let p: i64 = rng.gen_range(1..=4);
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let y = ExactScalar::rational(p, q);
            let alpha = &y + &sc("2");
            let x = ExactScalar::rational(rng.gen_range(0..4 * (p + q)), 4 * q);
            let point = Point::new(x, y);
            if !domain::in_upper_wedge(&point) || domain::is_stationary(&point) {
                continue;
            }
            // Walk k bounces, then close the loop with reflections if the
            // endpoint is a reflection of the start.
            let period = crate::billiard::trajectory_period(&point).unwrap().unwrap();
            let k = rng.gen_range(1..=2 * period);
            let (mut steps, end) = trajectory_steps(&point, k, &alpha).unwrap();
            let closable = [(false, false), (true, false), (false, true), (true, true)]
                .iter()
                .any(|&(fx, fy)| end.reflect(fx, fy) == point);
            if !closable {
                continue;
            }
            if let Some(tail) = witness_sequence(&end, &point, &alpha).unwrap() {
                steps.extend(tail);
            }
            let m = compose_monodromy(&steps).unwrap();
            let g = monodromy_group(&point, &alpha).unwrap();
            assert!(
                monodromy_membership(&m, &g),
                "loop matrix {m} outside group at {point} (case {:?})",
                g.case
            );
            checked += 1;
        }
    }
}
