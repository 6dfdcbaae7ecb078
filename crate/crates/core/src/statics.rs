//! Static equilibrium of the vehicle pressing on the surface.
//!
//! Solves the planar force/moment balance of the free-body diagram: tilted
//! total thrust against weight, horizontal contact force and a conservative
//! downward friction force at the contact point.

use crate::controller::ActuatorLimits;
use crate::plant::{ContactParams, VehicleParams};

/// Equilibrium solution for one contact force level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticEquilibrium {
    /// Pitch angle [rad]
    pub theta: f64,
    /// Thrust of rotor pair 1 [N]
    pub t1: f64,
    /// Thrust of rotor pair 2 [N]
    pub t2: f64,
    /// Vertical (friction) contact force, acting downward [N]
    pub f_v: f64,
}

impl StaticEquilibrium {
    pub fn total_thrust(&self) -> f64 {
        self.t1 + self.t2
    }
}

/// One row of the thrust-versus-contact-force sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub f_h: f64,
    pub theta: f64,
    pub t1: f64,
    pub t2: f64,
    pub total: f64,
    /// Both thrusts inside [0, t_max].
    pub feasible: bool,
}

/// Solve the three planar balances for a given horizontal contact force.
///
/// Horizontal: `(T1+T2) sin(theta) = F_H`
/// Vertical:   `(T1+T2) cos(theta) = M g + mu F_H` (friction downward)
/// Moment:     `(T1-T2) L/2 = F_H l_H - mu F_H l_v`
pub fn solve_equilibrium(
    f_h: f64,
    mu: f64,
    vehicle: &VehicleParams,
    contact: &ContactParams,
) -> StaticEquilibrium {
    assert!(f_h >= 0.0, "contact force must be non-negative");
    let vertical = vehicle.weight() + mu * f_h;
    let theta = (f_h / vertical).atan();
    let total = (f_h * f_h + vertical * vertical).sqrt();
    let diff = 2.0 * f_h * (vehicle.contact_height - mu * contact.contact_offset)
        / vehicle.rotor_separation;
    StaticEquilibrium {
        theta,
        t1: (total + diff) / 2.0,
        t2: (total - diff) / 2.0,
        f_v: mu * f_h,
    }
}

/// Residuals of the three balance equations at a candidate solution [N, N, N m].
pub fn balance_residuals(
    eq: &StaticEquilibrium,
    f_h: f64,
    mu: f64,
    vehicle: &VehicleParams,
    contact: &ContactParams,
) -> [f64; 3] {
    let total = eq.total_thrust();
    [
        total * eq.theta.sin() - f_h,
        total * eq.theta.cos() - (vehicle.weight() + mu * f_h),
        (eq.t1 - eq.t2) * vehicle.rotor_separation / 2.0
            - f_h * (vehicle.contact_height - mu * contact.contact_offset),
    ]
}

/// Pointwise equilibrium sweep over a list of contact forces.
pub fn thrust_sweep(
    forces: &[f64],
    mu: f64,
    vehicle: &VehicleParams,
    contact: &ContactParams,
    limits: &ActuatorLimits,
) -> Vec<SweepRow> {
    forces
        .iter()
        .map(|&f_h| {
            let eq = solve_equilibrium(f_h, mu, vehicle, contact);
            let feasible = eq.t1 >= limits.t_min
                && eq.t1 <= limits.t_max
                && eq.t2 >= limits.t_min
                && eq.t2 <= limits.t_max;
            SweepRow {
                f_h,
                theta: eq.theta,
                t1: eq.t1,
                t2: eq.t2,
                total: eq.total_thrust(),
                feasible,
            }
        })
        .collect()
}

/// Evenly spaced force grid, inclusive of both ends.
pub fn force_range(min: f64, max: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2, "sweep needs at least two points");
    (0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect()
}
