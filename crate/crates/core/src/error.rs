use core::fmt;

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Which runtime bound a flow step violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `E(next) <= F(next, prev) <= E(prev)` failed.
    EnergyIncrease,
    /// Endpoint gap fell to the floor.
    GapFloor,
    /// Gap exceeded the polygonal length.
    TriangleInequality,
    /// `(N-1) l <= 2 (E_0 + 1)` failed.
    LengthBound,
    /// `(eps l / 2) sum kappa^2 <= E_0` failed.
    CurvatureBound,
    /// Some edge turned by more than a right angle in one step.
    Cone,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundKind::EnergyIncrease => "energy increase",
            BoundKind::GapFloor => "endpoint gap below floor",
            BoundKind::TriangleInequality => "gap exceeds length",
            BoundKind::LengthBound => "length bound",
            BoundKind::CurvatureBound => "curvature bound",
            BoundKind::Cone => "cone condition",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    TooFewPoints {
        needed: usize,
        got: usize,
    },
    /// Edge lengths disagree by more than the admissible relative spread.
    UnequalEdges {
        spread: f64,
    },
    /// Coincident endpoints: the Coulomb term is undefined.
    DegenerateGap,
    ZeroEdgeLength,
    /// Anti-parallel consecutive edges at the given vertex (0-based).
    CuspAngle {
        vertex: usize,
    },
    ZeroLengthInput,
    /// The equal-chord shooting did not land on the input endpoint.
    ResampleFailed {
        spread: f64,
    },
    MismatchedN {
        left: usize,
        right: usize,
    },
    NonFinite,
    BadParameters(String),
    LineSearchFailure {
        iteration: usize,
    },
    NotConverged {
        iterations: usize,
        grad_norm: f64,
    },
    BoundViolation {
        step: usize,
        kind: BoundKind,
        detail: String,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooFewPoints { needed, got } => {
                write!(f, "need at least {needed} points, got {got}")
            }
            Error::UnequalEdges { spread } => {
                write!(f, "edge lengths differ (relative spread {spread:e})")
            }
            Error::DegenerateGap => f.write_str("curve endpoints coincide"),
            Error::ZeroEdgeLength => f.write_str("edge length is zero"),
            Error::CuspAngle { vertex } => write!(f, "anti-parallel edges at vertex {vertex}"),
            Error::ZeroLengthInput => f.write_str("input polyline has zero length"),
            Error::ResampleFailed { spread } => {
                write!(
                    f,
                    "equal-chord resampling failed (relative spread {spread:e})"
                )
            }
            Error::MismatchedN { left, right } => {
                write!(f, "point counts differ: {left} vs {right}")
            }
            Error::NonFinite => f.write_str("non-finite coordinate"),
            Error::BadParameters(msg) => write!(f, "bad parameters: {msg}"),
            Error::LineSearchFailure { iteration } => {
                write!(f, "line search found no descent at iteration {iteration}")
            }
            Error::NotConverged {
                iterations,
                grad_norm,
            } => write!(
                f,
                "step solver not converged after {iterations} iterations (|g| = {grad_norm:e})"
            ),
            Error::BoundViolation { step, kind, detail } => {
                write!(f, "step {step}: {kind} violated: {detail}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for {len} recorded steps")
            }
        }
    }
}

impl core::error::Error for Error {}
