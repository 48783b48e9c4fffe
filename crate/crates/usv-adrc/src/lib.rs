//! Trajectory-tracking testbed for an underactuated unmanned surface vessel.
//!
//! The crate couples a 3-DOF planar manoeuvring simulator (twin stern
//! thrusters plus one bow thruster, first-order thruster lag, current /
//! wave / wind disturbances) with two interchangeable trajectory
//! controllers — a nonlinear ADRC stack and a PID baseline — behind the
//! same Dubins-path guidance, control mixer, and thruster delay
//! compensator. A batch experiment runner executes scenario files and
//! emits per-run CSV telemetry plus JSON summaries for cross-track-error
//! and energy comparisons.

pub mod adrc;
pub mod control;
pub mod disturbances;
pub mod error;
pub mod experiment;
pub mod guidance;
pub mod scenario;
pub mod vessel;

pub use error::{Error, Result};

/// Wrap an angle to (-pi, pi].
#[inline]
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut a = angle % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}
