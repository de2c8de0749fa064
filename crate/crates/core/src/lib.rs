//! Exact billiard classification of split Lagrangian tori in `S^2 x S^2`
//! with a non-monotone split symplectic form.
//!
//! A split torus is a product of two height circles, recorded by its base
//! point `(x, y)` in the open moment rectangle
//! `int [-1-a, 1+a] x [-a, a]` (we write `a` for the size parameter, `alpha`
//! in the API). Two split tori are Hamiltonian isotopic exactly when the 45
//! degree billiard trajectory of one base point, played in the sub-rectangle
//! of size `r(x, y) = max(|x|-1, |y|)`, passes through a reflection of the
//! other. Everything downstream of that equivalence is arithmetic, and this
//! crate computes all of it exactly — no floating point outside rendering:
//!
//! * [`scalar`] — rationals and quadratic surds with decidable comparison;
//! * [`domain`] — the moment rectangle, its region decomposition, and
//!   canonical forms for equivalence classes;
//! * [`billiard`] — the exact 45 degree billiard kernel (folding maps,
//!   bouncing points, corner detection, periods);
//! * [`classify`] — the equivalence decision and the distance/subgroup
//!   obstructions that certify non-equivalence;
//! * [`probes`] — symmetric probes: constructive witnesses for equivalences
//!   and the 2x2 integer matrices they induce on first homology;
//! * [`monodromy`] — Hamiltonian monodromy groups, case by arithmetic case,
//!   with explicit generators and exactness flags;
//! * [`packing`] — packing numbers by disjoint split tori, the
//!   sphere-packing upper bound, and ball-embeddability types;
//! * [`recurrence`] — cut-off billiard maps: strip volumes, delta selection,
//!   and grid simulation of late-return behaviour.

pub mod billiard;
pub mod classify;
pub mod domain;
pub mod error;
pub mod monodromy;
pub mod packing;
pub mod probes;
pub mod recurrence;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::ExactScalar;

pub use domain::{CanonicalForm, Point, Region, RegionTag};
