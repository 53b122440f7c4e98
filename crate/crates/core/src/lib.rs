//! Minimizing-movement gradient flow of open elastic curves in the plane.
//!
//! A curve is an equal-edge polyline. Each time step minimizes
//!
//! ```text
//! F(x, x~) = E(x) + D(x, x~) / tau
//! E(x)     = (N-1) l + (eps l / 2) sum_i kappa_i^2 - log |x_1 - x_N|
//! ```
//!
//! over equal-edge polylines, where `D` is a symmetrized normal-projection
//! distance plus endpoint displacement terms. The minimization runs in a
//! reduced chart (base point, edge length, edge headings) in which the
//! equal-edge constraint holds by construction.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, plotting and
//! the command line live in the `elastica` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod math;
mod vec2;

pub mod diagnostics;
pub mod energy;
pub mod flow;
pub mod minimize;
pub mod polyline;
pub mod resample;
pub mod scenario;

pub use error::{BoundKind, Error, Result};
pub use vec2::Vec2;

pub use diagnostics::{
    boundary_residual, chord_deviation, fd_gradient_check, interior_residual, loop_diameter,
    residual_report, self_intersections, ResidualReport,
};
pub use energy::{
    dissipation, energy, objective, objective_gradient, EnergyBreakdown, EnergyParams,
};
pub use flow::{
    coupling_residual, run_flow, velocity, CouplingResidual, FlowConfig, Snapshot, StepRecord,
    Trajectory, VelocityField,
};
pub use minimize::{assert_cone_condition, minimize_step, SolverOptions, StepOutcome, StepReport};
pub use polyline::{measures, DiscreteCurve, EdgeFrame, Measures, ReducedCoords};
pub use resample::resample_equal_arclength;
pub use scenario::{make_scenario, Preset, Scenario};
