//! Input-output linearizing PD controller for the contact regime.
//!
//! The controlled outputs are horizontal position and pitch. The control law
//! inverts the plant's input coupling to impose commanded output
//! accelerations, an outer PD loop generates those accelerations from
//! reference errors, and a prioritized allocation plus magnitude/slew limiter
//! keep the commands inside the actuator envelope. Pitch keeps its
//! differential-thrust share when the envelope saturates: losing it would let
//! the contact moment run the pitch away, while the position channel only
//! degrades gracefully.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::plant::{ThrustCommand, VehicleParams};

/// Reference values for the controlled outputs, with rate and acceleration
/// feedforward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSetpoint {
    /// Desired horizontal position [m]
    pub x: f64,
    /// Desired horizontal velocity [m/s]
    pub x_dot: f64,
    /// Desired horizontal acceleration [m/s^2]
    pub x_ddot: f64,
    /// Desired pitch [rad]
    pub theta: f64,
    /// Desired pitch rate [rad/s]
    pub theta_dot: f64,
    /// Desired pitch acceleration [rad/s^2]
    pub theta_ddot: f64,
}

impl OutputSetpoint {
    /// Constant setpoint with zero feedforward rates.
    pub fn hold(x: f64, theta: f64) -> Self {
        Self {
            x,
            x_dot: 0.0,
            x_ddot: 0.0,
            theta,
            theta_dot: 0.0,
            theta_ddot: 0.0,
        }
    }
}

/// PD gains of the outer loop, one pair per output.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerGains {
    /// Proportional gain on position error [1/s^2]
    pub kp_x: f64,
    /// Derivative gain on position error [1/s]
    pub kd_x: f64,
    /// Proportional gain on pitch error [1/s^2]
    pub kp_pitch: f64,
    /// Derivative gain on pitch error [1/s]
    pub kd_pitch: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        // Critically damped at 6 rad/s on both outputs.
        Self {
            kp_x: 36.0,
            kd_x: 12.0,
            kp_pitch: 36.0,
            kd_pitch: 12.0,
        }
    }
}

/// Actuator envelope: magnitude, rate and pitch-rate limits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorLimits {
    /// Minimum thrust per rotor pair [N]
    pub t_min: f64,
    /// Maximum thrust per rotor pair [N]
    pub t_max: f64,
    /// Maximum thrust slew rate per rotor pair [N/s]
    pub slew_max: f64,
    /// Pitch-rate monitor threshold [rad/s]
    pub pitch_rate_max: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        Self {
            t_min: 0.0,
            t_max: 21.0,
            slew_max: 200.0,
            pitch_rate_max: 2.0,
        }
    }
}

/// Which limiter constraints bound on a given step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LimitFlags {
    pub t1_magnitude: bool,
    pub t1_slew: bool,
    pub t2_magnitude: bool,
    pub t2_slew: bool,
}

impl LimitFlags {
    pub fn magnitude(&self) -> bool {
        self.t1_magnitude || self.t2_magnitude
    }

    pub fn slew(&self) -> bool {
        self.t1_slew || self.t2_slew
    }

    pub fn any(&self) -> bool {
        self.magnitude() || self.slew()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("decoupling matrix singular at pitch {theta} rad (|sin| below {threshold})")]
    SingularDecoupling { theta: f64, threshold: f64 },
    #[error("force setpoint {force} N is negative")]
    NegativeForceTarget { force: f64 },
}

/// Matrix mapping the thrust pair to output accelerations `[x_ddot, theta_ddot]`.
///
/// Singular exactly at zero pitch, where tilted thrust has no horizontal
/// component; the determinant is `L sin(theta) / (M I_yy)`.
pub fn decoupling_matrix(theta: f64, params: &VehicleParams) -> Matrix2<f64> {
    let s = theta.sin() / params.mass;
    let b = params.rotor_separation / (2.0 * params.pitch_inertia);
    Matrix2::new(s, s, -b, b)
}

/// Output accelerations produced by the contact force alone.
pub fn drift_acceleration(contact_force: f64, params: &VehicleParams) -> Vector2<f64> {
    Vector2::new(
        -contact_force / params.mass,
        contact_force * params.contact_height / params.pitch_inertia,
    )
}

/// Outer PD loop: commanded output accelerations from reference errors.
pub fn outer_loop(
    setpoint: &OutputSetpoint,
    state: &crate::plant::PlantState,
    gains: &ControllerGains,
) -> Vector2<f64> {
    Vector2::new(
        setpoint.x_ddot
            + gains.kd_x * (setpoint.x_dot - state.x_dot)
            + gains.kp_x * (setpoint.x - state.x),
        setpoint.theta_ddot
            + gains.kd_pitch * (setpoint.theta_dot - state.theta_dot)
            + gains.kp_pitch * (setpoint.theta - state.theta),
    )
}

/// Invert the plant so the outputs accelerate exactly at `v`.
///
/// Closed form of `u = A^-1 (v - b)` with `A` the decoupling matrix and `b`
/// the drift acceleration. Fails when `|sin(theta)|` is below
/// `sin_threshold`; near zero pitch the required thrust grows without bound.
pub fn feedback_linearize(
    v: &Vector2<f64>,
    theta: f64,
    contact_force: f64,
    params: &VehicleParams,
    sin_threshold: f64,
) -> Result<ThrustCommand, ControlError> {
    let s = theta.sin();
    if s.abs() < sin_threshold {
        return Err(ControlError::SingularDecoupling {
            theta,
            threshold: sin_threshold,
        });
    }
    let b = drift_acceleration(contact_force, params);
    let common = params.mass / (2.0 * s) * (v[0] - b[0]);
    let diff = params.pitch_inertia / params.rotor_separation * (v[1] - b[1]);
    Ok(ThrustCommand::new(common - diff, common + diff))
}

/// Pitch setpoint that holds a desired contact force quasi-statically:
/// `theta = atan(F / (M g))`.
pub fn setpoint_from_force(f_des: f64, params: &VehicleParams) -> Result<f64, ControlError> {
    if f_des < 0.0 {
        return Err(ControlError::NegativeForceTarget { force: f_des });
    }
    Ok((f_des / params.weight()).atan())
}

/// Fit a raw command into the magnitude envelope, preserving the
/// differential (pitch) share at the expense of the common mode.
///
/// Returns the shaped command and whether anything was clamped.
pub fn allocate_pitch_priority(
    raw: &ThrustCommand,
    limits: &ActuatorLimits,
) -> (ThrustCommand, bool) {
    let common = 0.5 * (raw.t1 + raw.t2);
    let diff = 0.5 * (raw.t2 - raw.t1);
    let half_range = 0.5 * (limits.t_max - limits.t_min);
    let diff_cl = diff.clamp(-half_range, half_range);
    let common_cl = common.clamp(limits.t_min + diff_cl.abs(), limits.t_max - diff_cl.abs());
    let shaped = ThrustCommand::new(common_cl - diff_cl, common_cl + diff_cl);
    let clamped = (shaped.t1 - raw.t1).abs() > 1e-12 || (shaped.t2 - raw.t2).abs() > 1e-12;
    (shaped, clamped)
}

/// Clamp a command to the slew band around the previous command, then to the
/// magnitude range.
pub fn apply_limits(
    raw: &ThrustCommand,
    prev: &ThrustCommand,
    dt: f64,
    limits: &ActuatorLimits,
) -> (ThrustCommand, LimitFlags) {
    let step = limits.slew_max * dt;
    let mut flags = LimitFlags::default();

    let limit_one = |raw: f64, prev: f64, slewed: &mut bool, clamped: &mut bool| {
        let after_slew = raw.clamp(prev - step, prev + step);
        *slewed = after_slew != raw;
        let after_mag = after_slew.clamp(limits.t_min, limits.t_max);
        *clamped = after_mag != after_slew;
        after_mag
    };

    let t1 = limit_one(raw.t1, prev.t1, &mut flags.t1_slew, &mut flags.t1_magnitude);
    let t2 = limit_one(raw.t2, prev.t2, &mut flags.t2_slew, &mut flags.t2_magnitude);
    (ThrustCommand::new(t1, t2), flags)
}

/// Rate- and acceleration-limited reference toward a target value.
///
/// Shapes step targets into trackable trajectories so the outer loop sees
/// consistent position/rate/acceleration references. Also implements the
/// pitch-reference rate clamp: with `max_rate` at or below the pitch-rate
/// limit the commanded pitch trajectory never asks for more.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceProfile {
    position: f64,
    rate: f64,
    accel: f64,
    max_rate: f64,
    max_accel: f64,
}

impl ReferenceProfile {
    /// Start a profile from the current value and rate of the tracked signal.
    pub fn new(position: f64, rate: f64, max_rate: f64, max_accel: f64) -> Self {
        Self {
            position,
            rate,
            accel: 0.0,
            max_rate,
            max_accel,
        }
    }

    /// Advance one step toward `target`.
    pub fn advance(&mut self, target: f64, dt: f64) {
        let dist = target - self.position;
        // Inside the discrete capture box the update would limit-cycle at the
        // a*dt^2 scale; land on the target instead.
        if dist.abs() <= 2.0 * self.max_accel * dt * dt && self.rate.abs() <= 2.0 * self.max_accel * dt
        {
            self.position = target;
            self.rate = 0.0;
            self.accel = 0.0;
            return;
        }
        // Largest rate that can still stop within |dist| in discrete time.
        let stoppable = (self.max_accel * self.max_accel * dt * dt / 4.0
            + 2.0 * self.max_accel * dist.abs())
        .sqrt()
            - self.max_accel * dt / 2.0;
        let rate_cmd = dist.signum() * stoppable.min(self.max_rate);
        self.accel = ((rate_cmd - self.rate) / dt).clamp(-self.max_accel, self.max_accel);
        self.rate += self.accel * dt;
        self.position += self.rate * dt;
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn accel(&self) -> f64 {
        self.accel
    }
}
