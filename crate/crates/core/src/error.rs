//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the exact-geometry kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed scalar or point literal.
    #[error("parse error: {0}")]
    Parse(String),

    /// Two scalars live in distinct quadratic fields; exact comparison and
    /// arithmetic between them is undefined by design.
    #[error("incompatible radicands: sqrt({0}) vs sqrt({1})")]
    IncompatibleRadicands(u64, u64),

    /// Division by an exactly-zero scalar.
    #[error("division by zero")]
    DivisionByZero,

    /// Radicands are capped so that square-free canonicalization stays exact.
    #[error("radicand {0} exceeds the supported bound {1}")]
    RadicandTooLarge(u64, u64),

    /// The base point is outside the open moment rectangle for the given size.
    #[error("point {0} lies outside the interior of the rectangle of size {1}")]
    OutsideRectangle(String, String),

    /// Billiard-only operation invoked on a stationary base point.
    #[error("point {0} is stationary; it has no billiard dynamics")]
    StationaryPoint(String),

    /// Operation requires a point in the open upper wedge.
    #[error("point {0} is not in the upper wedge region")]
    NotInUpperWedge(String),

    /// The simulation step budget was exhausted.
    #[error("iteration cap of {0} steps exceeded")]
    IterationCap(u64),

    /// Orbit enumeration requested for an aperiodic trajectory.
    #[error("trajectory of {0} is aperiodic; its bouncing set is infinite")]
    AperiodicOrbit(String),

    /// A probe step was applied to a point not on the probe segment.
    #[error("point {0} does not lie on the probe segment")]
    NotOnProbe(String),

    /// Probe steps passed to composition do not chain end to end.
    #[error("probe steps are not chained: step {0} ends at {1} but step {2} starts at {3}")]
    StepsNotChained(usize, String, usize, String),

    /// A numeric precondition failed (documented per operation).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
