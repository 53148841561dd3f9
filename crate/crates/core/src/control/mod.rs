//! Continuous layer: point-world transform, navigation function, adaptive
//! navigation and transport laws, and fixed-step simulation.

mod law;
mod navfn;
mod params;
mod sim;
mod transform;

use thiserror::Error;

use crate::geom::Point;

pub use law::{
    adaptation_rates, check_load_sharing, control_navigation, control_transport, reference_rate, reference_velocity,
    Gains, Reference,
};
pub use navfn::{beta, goal_clearance, NavFn};
pub use params::ControlParams;
pub use sim::{
    integrate_step, simulate_motion, svg_plot, Controller, LogRow, MotionError, MotionLog, MotionSpec, Plant, Rates,
    Signals, SimState,
};
pub use transform::{SphereWorld, Transform};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("point ({:.6}, {:.6}) is outside the free space", .0[0], .0[1])]
    OutsideFreeSpace(Point),
    #[error("singular transform Jacobian at ({:.6}, {:.6})", .0[0], .0[1])]
    SingularJacobian(Point),
    #[error("barrier evaluated at nonpositive distance {0}")]
    BarrierDomain(f64),
    #[error("obstacle points violate the clearance r̄ = {0}")]
    Clearance(f64),
    #[error("τ = {tau} must be positive, at most r̄² and below the goal clearance (bound {bound})")]
    TauBound { tau: f64, bound: f64 },
    #[error("load-sharing coefficients {0:?} must be nonnegative and sum to 1")]
    LoadSharing(Vec<f64>),
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
}
