//! The Hamiltonian-equivalence decision and the distance obstructions.
//!
//! Equivalence of split tori reduces to equality of canonical forms: two
//! base points are equivalent exactly when reflections plus a billiard
//! trajectory carry one to the other, and [`crate::domain::canonicalize`]
//! compresses that relation into a structural equality test. Alongside the
//! decision this module computes the classical necessary invariants — the
//! minimal integral-affine boundary distance, the set of facets realizing
//! it, and the subgroup of the reals generated by the shifted distances —
//! which certify non-equivalence independently of the billiard argument.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{canonicalize, CanonicalForm, Point};
use crate::error::Result;
use crate::scalar::ExactScalar;

/// Outcome of the equivalence decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent { reason: NotEquivalentReason },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

/// A datum distinguishing the two classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotEquivalentReason {
    /// One point is stationary, the other is not.
    StationaryMismatch,
    /// Both stationary but with different coordinates up to reflection.
    StationaryCoordinates,
    /// Billiard classes over tables of different half-heights.
    TableSize,
    /// Same table, different orbit representative.
    OrbitClass,
}

/// Decides Hamiltonian equivalence of `T(p)` and `T(q)` inside the
/// rectangle of size `alpha`. The verdict does not depend on `alpha`.
pub fn equivalent(p: &Point, q: &Point, alpha: &ExactScalar) -> Result<Verdict> {
    let cp = canonicalize(p, alpha)?;
    let cq = canonicalize(q, alpha)?;
    Ok(compare_forms(&cp, &cq))
}

fn compare_forms(cp: &CanonicalForm, cq: &CanonicalForm) -> Verdict {
    if cp == cq {
        return Verdict::Equivalent;
    }
    let reason = match (cp, cq) {
        (CanonicalForm::Stationary { .. }, CanonicalForm::Orbit { .. })
        | (CanonicalForm::Orbit { .. }, CanonicalForm::Stationary { .. }) => {
            NotEquivalentReason::StationaryMismatch
        }
        (CanonicalForm::Stationary { .. }, CanonicalForm::Stationary { .. }) => {
            NotEquivalentReason::StationaryCoordinates
        }
        (CanonicalForm::Orbit { y: y1, .. }, CanonicalForm::Orbit { y: y2, .. }) => {
            if y1 == y2 {
                NotEquivalentReason::OrbitClass
            } else {
                NotEquivalentReason::TableSize
            }
        }
    };
    Verdict::NotEquivalent { reason }
}

/// Distance invariants of a base point: minimal integral-affine distance to
/// the four facets, the facets realizing it, and the subgroup of the reals
/// generated by the shifted distances.
///
/// Facet distances in the rectangle of size `alpha`, indexed 1 to 4:
/// `l1 = alpha - y`, `l2 = 1 + alpha - x`, `l3 = alpha + y`,
/// `l4 = 1 + alpha + x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChekanovInvariants {
    /// `min_i l_i`.
    pub d: ExactScalar,
    /// Facet indices `i` with `l_i = d`, ascending. Reflections of the
    /// rectangle permute facets, so equivalence preserves only the
    /// cardinality of this set; both the set and its size are exposed.
    pub index_set: Vec<u8>,
    /// Canonical basis (Hermite form over a common denominator) of the
    /// subgroup of the reals generated by `l_i - d`.
    pub gamma_basis: Vec<ExactScalar>,
}

impl ChekanovInvariants {
    /// Number of facets realizing the minimum.
    pub fn multiplicity(&self) -> usize {
        self.index_set.len()
    }

    /// Invariant comparison: equivalent tori agree in `d`, in the
    /// multiplicity of the minimum, and in the subgroup.
    pub fn matches(&self, other: &Self) -> bool {
        self.d == other.d
            && self.multiplicity() == other.multiplicity()
            && self.gamma_basis == other.gamma_basis
    }
}

/// Computes the distance invariants of `p` in the rectangle of size `alpha`.
pub fn chekanov_invariants(p: &Point, alpha: &ExactScalar) -> Result<ChekanovInvariants> {
    p.ensure_interior(alpha)?;
    let one = ExactScalar::one();
    let lengths = [
        alpha - &p.y,
        &(&one + alpha) - &p.x,
        alpha + &p.y,
        &(&one + alpha) + &p.x,
    ];
    let mut d = lengths[0].clone();
    for l in &lengths[1..] {
        d = d.min_checked(l)?;
    }
    let index_set: Vec<u8> = lengths
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == d)
        .map(|(i, _)| (i + 1) as u8)
        .collect();
    let shifted: Vec<ExactScalar> = lengths.iter().map(|l| l - &d).collect();
    let gamma_basis = subgroup_basis(&shifted);
    Ok(ChekanovInvariants { d, index_set, gamma_basis })
}

/// Canonical basis of the subgroup of `R` generated by elements of a common
/// quadratic field: scale coefficient pairs to integers over the least
/// common denominator, take the row Hermite form, and scale back. The
/// result is independent of the chosen denominator, so equal subgroups get
/// equal bases.
pub fn subgroup_basis(generators: &[ExactScalar]) -> Vec<ExactScalar> {
    let radicand = generators.iter().map(|g| g.radicand()).max().unwrap_or(0);
    let mut denom = BigInt::one();
    for g in generators {
        denom = denom.lcm(g.u().denom());
        denom = denom.lcm(g.v().denom());
    }
    let scale = BigRational::from(denom.clone());
    let rows: Vec<[BigInt; 2]> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let a = (g.u() * &scale).to_integer();
            let b = (g.v() * &scale).to_integer();
            [a, b]
        })
        .collect();
    hermite_rows(rows)
        .into_iter()
        .map(|[a, b]| {
            ExactScalar::surd(
                BigRational::new(a, denom.clone()),
                BigRational::new(b, denom.clone()),
                radicand,
            )
            .expect("basis stays in the generators' field")
        })
        .collect()
}

/// Row Hermite normal form of an integer matrix with two columns: at most
/// two rows `[a, b]`, `[0, c]` with `a > 0`, `c > 0` and `0 <= b < c` when
/// both are present.
fn hermite_rows(mut rows: Vec<[BigInt; 2]>) -> Vec<[BigInt; 2]> {
    rows.retain(|r| !r[0].is_zero() || !r[1].is_zero());
    if rows.is_empty() {
        return rows;
    }
    // Reduce the first column to a single nonzero entry by Euclid.
    loop {
        let mut nonzero: Vec<usize> =
            (0..rows.len()).filter(|&i| !rows[i][0].is_zero()).collect();
        if nonzero.len() <= 1 {
            break;
        }
        nonzero.sort_by_key(|&i| rows[i][0].abs());
        let (small, big) = (nonzero[0], nonzero[1]);
        let q = rows[big][0].div_floor(&rows[small][0]);
        let (s0, s1) = (rows[small][0].clone(), rows[small][1].clone());
        rows[big][0] -= &q * s0;
        rows[big][1] -= &q * s1;
        rows.retain(|r| !r[0].is_zero() || !r[1].is_zero());
    }
    let pivot0 = rows.iter().position(|r| !r[0].is_zero());
    // Among rows with zero first column, reduce the second column to a gcd.
    let mut g1 = BigInt::zero();
    for (i, row) in rows.iter().enumerate() {
        if Some(i) != pivot0 {
            g1 = g1.gcd(&row[1]);
        }
    }
    let mut out = Vec::new();
    if let Some(i) = pivot0 {
        let mut head = rows[i].clone();
        if head[0].is_negative() {
            head[0] = -&head[0];
            head[1] = -&head[1];
        }
        if !g1.is_zero() {
            head[1] = head[1].mod_floor(&g1);
        }
        out.push(head);
    }
    if !g1.is_zero() {
        out.push([BigInt::zero(), g1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard;
    use crate::domain;
    use proptest::prelude::*;
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
    fn equivalence_examples() {
        let two = sc("2");
        assert_eq!(
            equivalent(&pt("(1/4,1/2)"), &pt("(5/4,1/2)"), &two).unwrap(),
            Verdict::Equivalent
        );
        assert_eq!(
            equivalent(&pt("(1/4,1/2)"), &pt("(1/2,1/2)"), &two).unwrap(),
            Verdict::NotEquivalent { reason: NotEquivalentReason::OrbitClass }
        );
        let p = pt("(1/4,1/2)");
        assert_eq!(equivalent(&p, &p, &two).unwrap(), Verdict::Equivalent);
    }

    #[test]
    fn invariant_examples() {
        let inv = chekanov_invariants(&pt("(0,0)"), &sc("1")).unwrap();
        assert_eq!(inv.d, sc("1"));
        assert_eq!(inv.index_set, vec![1, 3]);
        assert_eq!(inv.gamma_basis, vec![sc("1")]);

        let inv = chekanov_invariants(&pt("(0,1)"), &sc("2")).unwrap();
        assert_eq!(inv.d, sc("1"));
        assert_eq!(inv.index_set, vec![1]);
        assert_eq!(inv.gamma_basis, vec![sc("2")]);

        let inv = chekanov_invariants(&pt("(3/2,1/2)"), &sc("2")).unwrap();
        assert_eq!(inv.d, sc("3/2"));
        assert_eq!(inv.index_set, vec![1, 2]);
        assert_eq!(inv.multiplicity(), 2);
    }

    #[test]
    fn gamma_basis_spans_its_generators() {
        let p = Point::new(sc("0+1/2*sqrt(2)"), sc("0"));
        let alpha = sc("2");
        let inv = chekanov_invariants(&p, &alpha).unwrap();
        assert_eq!(inv.gamma_basis.len(), 2);
        // Each shifted distance must be an integer combination of the basis.
        let one = ExactScalar::one();
        let lengths = [
            &alpha - &p.y,
            &(&one + &alpha) - &p.x,
            &alpha + &p.y,
            &(&one + &alpha) + &p.x,
        ];
        for l in &lengths {
            let g = l - &inv.d;
            let b0 = &inv.gamma_basis[0];
            let b1 = &inv.gamma_basis[1];
            // Solve g = m*b0 + n*b1 over the rationals in the (1, sqrt(2))
            // basis and check integrality.
            let det = b0.u() * b1.v() - b1.u() * b0.v();
            let m = (g.u() * b1.v() - b1.u() * g.v()) / &det;
            let n = (b0.u() * g.v() - g.u() * b0.v()) / &det;
            assert!(m.is_integer() && n.is_integer(), "{g} outside lattice");
        }
    }

    #[test]
    fn subgroup_basis_is_generator_list_independent() {
        let gens1 = [sc("1/2"), sc("3/4")];
        let gens2 = [sc("3/4"), sc("1/2"), sc("5/4")];
        // Same subgroup (1/4)Z from different generator lists.
        assert_eq!(subgroup_basis(&gens1), subgroup_basis(&gens2));
        assert_eq!(subgroup_basis(&gens1), vec![sc("1/4")]);
        assert!(subgroup_basis(&[sc("0")]).is_empty());
    }

    #[test]
    fn stationary_points_are_rigid() {
        let two = sc("2");
        let p = pt("(3/2,1/2)");
        for (fx, fy) in [(true, false), (false, true), (true, true)] {
            assert!(equivalent(&p, &p.reflect(fx, fy), &two).unwrap().is_equivalent());
        }
        assert_eq!(
            equivalent(&p, &pt("(5/4,1/2)"), &two).unwrap(),
            Verdict::NotEquivalent { reason: NotEquivalentReason::StationaryMismatch }
        );
        assert_eq!(
            equivalent(&p, &pt("(7/4,3/4)"), &two).unwrap(),
            Verdict::NotEquivalent { reason: NotEquivalentReason::StationaryCoordinates }
        );
    }

    /// Billiard soundness on small rational tables: the arithmetic verdict
    /// agrees with brute-force membership of a reflection of `q` in the
    /// bouncing set of `p`.
    #[test]
    fn verdict_agrees_with_bouncing_set_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in 1u64..=7 {
            for p in 1u64..=8 - q {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let y = ExactScalar::rational(p as i64, q as i64);
                let grid: Vec<i64> = (0..4 * (p + q) as i64).collect();
                for _ in 0..20 {
                    let jx = *grid.choose(&mut rng).unwrap();
                    let jq = *grid.choose(&mut rng).unwrap();
                    let a = Point::new(ExactScalar::rational(jx, 4 * q as i64), y.clone());
                    let b = Point::new(ExactScalar::rational(jq, 4 * q as i64), y.clone());
                    let alpha = &y + &sc("2");
                    let verdict = equivalent(&a, &b, &alpha).unwrap().is_equivalent();
                    let orbit = billiard::bouncing_set(&a).unwrap();
                    let brute = [(false, false), (true, false), (false, true), (true, true)]
                        .iter()
                        .any(|&(fx, fy)| orbit.contains(&b.reflect(fx, fy)));
                    assert_eq!(verdict, brute, "at {a} vs {b}");
                }
            }
        }
    }

    /// Random members of one wedge orbit: pairs are equivalent and share
    /// invariants.
    #[test]
    fn equivalent_pairs_share_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let mut q: i64 = rng.gen_range(1..=6);
            let mut p: i64 = rng.gen_range(1..=6);
            let g = num_integer::gcd(p, q);
            p /= g;
            q /= g;
            let y = ExactScalar::rational(p, q);
            let rep: i64 = rng.gen_range(0..=4 * q); // rep/(4q) in [0, 1/q]
            // Orbit members inside the open wedge: |eps*rep/(4q) + 2j/q| < 1 + p/q.
            let mut members = Vec::new();
            for eps in [1i64, -1] {
                for j in -(p + q + 1)..=(p + q + 1) {
                    let num = eps * rep + 8 * j;
                    if num.abs() < 4 * (q + p) {
                        members.push(Point::new(ExactScalar::rational(num, 4 * q), y.clone()));
                    }
                }
            }
            let a = members.choose(&mut rng).unwrap().clone();
            let b = members.choose(&mut rng).unwrap().clone();
            assert!(!domain::is_stationary(&a));
            let alpha = &y + &sc("2");
            assert!(
                equivalent(&a, &b, &alpha).unwrap().is_equivalent(),
                "orbit members must be equivalent: {a} vs {b}"
            );
            let ia = chekanov_invariants(&a, &alpha).unwrap();
            let ib = chekanov_invariants(&b, &alpha).unwrap();
            assert!(ia.matches(&ib), "invariants differ for {a} vs {b}");
        }
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        ((-30i64..=30, 1i64..=8), (-30i64..=30, 1i64..=8)).prop_map(|((a, b), (c, d))| {
            Point::new(ExactScalar::rational(a, b), ExactScalar::rational(c, d))
        })
    }

    proptest! {
        #[test]
        fn verdict_is_size_independent(p in arb_point(), q in arb_point()) {
            let r = domain::r_value(&p).max_checked(&domain::r_value(&q)).unwrap();
            let alpha = (&r + &sc("2")).max_checked(&sc("1")).unwrap();
            let bigger = &alpha + &sc("7/3");
            prop_assert_eq!(
                equivalent(&p, &q, &alpha).unwrap(),
                equivalent(&p, &q, &bigger).unwrap()
            );
        }

        #[test]
        fn relation_is_symmetric(p in arb_point(), q in arb_point()) {
            let r = domain::r_value(&p).max_checked(&domain::r_value(&q)).unwrap();
            let alpha = (&r + &sc("2")).max_checked(&sc("1")).unwrap();
            prop_assert_eq!(
                equivalent(&p, &q, &alpha).unwrap().is_equivalent(),
                equivalent(&q, &p, &alpha).unwrap().is_equivalent()
            );
        }
    }
}
