//! Free-flight to contact supervision.
//!
//! Two conditions gate the handover to the contact controller: a Schmitt
//! trigger on the measured contact force (chatter-free threshold detection)
//! and a pose-readiness check that the surface point lies in the arm's
//! application space at the current vehicle pose with the pitch inside its
//! admissible window. Contact mode is left again only when the force trigger
//! disengages.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::kinematics::{reachable_with_orientation, JointLimits, LinkGeometry};
use crate::plant::{PlantState, ThrustCommand, VehicleParams};

/// Control regime of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    FreeFlight,
    Contact,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::FreeFlight => write!(f, "free_flight"),
            Mode::Contact => write!(f, "contact"),
        }
    }
}

/// Hysteresis band of the force trigger [N].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchmittConfig {
    /// Disengage below this force [N]
    pub low: f64,
    /// Engage at or above this force [N]
    pub high: f64,
}

impl Default for SchmittConfig {
    fn default() -> Self {
        Self { low: 1.0, high: 2.5 }
    }
}

/// One Schmitt trigger update: engage at `high`, release at `low`, hold in
/// between.
pub fn schmitt_update(engaged: bool, force: f64, cfg: &SchmittConfig) -> bool {
    if force >= cfg.high {
        true
    } else if force <= cfg.low {
        false
    } else {
        engaged
    }
}

/// Mode transition rule given the updated trigger state and pose gate.
pub fn supervisor_step(mode: Mode, engaged: bool, pose_ok: bool) -> Mode {
    match mode {
        Mode::FreeFlight if engaged && pose_ok => Mode::Contact,
        Mode::Contact if !engaged => Mode::FreeFlight,
        m => m,
    }
}

/// Supervisor state: current mode plus the trigger memory.
#[derive(Debug, Clone, Copy)]
pub struct Supervisor {
    mode: Mode,
    engaged: bool,
}

impl Supervisor {
    pub fn new(mode: Mode) -> Self {
        // Starting directly in contact implies the trigger is held.
        Self {
            mode,
            engaged: mode == Mode::Contact,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn engaged(&self) -> bool {
        self.engaged
    }

    pub fn step(&mut self, force: f64, pose_ok: bool, cfg: &SchmittConfig) -> Mode {
        self.engaged = schmitt_update(self.engaged, force, cfg);
        self.mode = supervisor_step(self.mode, self.engaged, pose_ok);
        self.mode
    }
}

/// Geometry of the pose-readiness check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoseGate {
    /// Surface point to inspect, world frame, heights relative to the hover
    /// plane of the center of mass [m]
    pub target: [f64; 3],
    /// Arm base offset above the center of mass along the body z axis [m]
    pub mount_height: f64,
    /// Desired world-frame approach elevation of the end effector [rad]
    pub approach_elevation: f64,
    /// Accepted deviation of the in-plane approach angle [rad]
    pub orientation_tol: f64,
    /// Admissible pitch window at handover [rad]
    pub pitch_min: f64,
    pub pitch_max: f64,
}

impl Default for PoseGate {
    fn default() -> Self {
        // Target frozen from the nominal handover pose of the default
        // approach: pitch 0.1134 rad, trigger force 2.5 N, arm at
        // (0, 35deg, -28.5deg).
        Self {
            target: [0.5357, 0.0, 0.3834],
            mount_height: 0.10,
            approach_elevation: 0.0,
            orientation_tol: 0.15,
            pitch_min: 0.05,
            pitch_max: 0.15,
        }
    }
}

impl PoseGate {
    pub fn target_point(&self) -> Vector3<f64> {
        Vector3::new(self.target[0], self.target[1], self.target[2])
    }
}

/// Whether the handover pose conditions hold: pitch inside the window and
/// the target inside the application space of the arm at the current pose.
///
/// The vehicle pitch rotates the arm base, so the world target is mapped
/// into the base frame and the desired world approach elevation shifts by
/// the pitch angle.
pub fn pose_ready(
    state: &PlantState,
    gate: &PoseGate,
    links: &LinkGeometry,
    limits: &JointLimits,
) -> bool {
    if state.theta < gate.pitch_min || state.theta > gate.pitch_max {
        return false;
    }
    let (s, c) = state.theta.sin_cos();
    // Body axes in world coordinates; thrust along body z.
    let x_body = Vector3::new(c, 0.0, -s);
    let z_body = Vector3::new(s, 0.0, c);
    let base_origin = Vector3::new(state.x, 0.0, 0.0) + gate.mount_height * z_body;
    let rel = gate.target_point() - base_origin;
    let in_base = Vector3::new(rel.dot(&x_body), rel.y, rel.dot(&z_body));
    let wanted_orientation = gate.approach_elevation + state.theta;
    reachable_with_orientation(
        &in_base,
        wanted_orientation,
        gate.orientation_tol,
        links,
        limits,
    )
}

/// Free-flight approach law.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproachConfig {
    /// Commanded approach velocity toward the surface [m/s]
    pub velocity: f64,
    /// Gain of the velocity loop [1/s]
    pub velocity_gain: f64,
    /// Proportional gain of the pitch loop [1/s^2]
    pub pitch_kp: f64,
    /// Derivative gain of the pitch loop [1/s]
    pub pitch_kd: f64,
    /// Clamp on the commanded pitch [rad]
    pub pitch_cmd_max: f64,
}

impl Default for ApproachConfig {
    fn default() -> Self {
        Self {
            velocity: 0.1,
            velocity_gain: 2.0,
            pitch_kp: 36.0,
            pitch_kd: 12.0,
            pitch_cmd_max: 0.25,
        }
    }
}

/// Raw thrust command for the free-flight approach.
///
/// The common mode balances weight under the static-vertical assumption,
/// `Mg / cos(theta)`; the differential tracks a pitch command derived from
/// the velocity error, so the vehicle tilts into the surface exactly as much
/// as holding the approach velocity (and any already-present contact force)
/// requires. Well defined at zero pitch.
pub fn free_flight_controller(
    state: &PlantState,
    approach: &ApproachConfig,
    contact_force: f64,
    params: &VehicleParams,
) -> ThrustCommand {
    let accel_wanted =
        approach.velocity_gain * (approach.velocity - state.x_dot) + contact_force / params.mass;
    let pitch_cmd = (accel_wanted / params.gravity)
        .atan()
        .clamp(-approach.pitch_cmd_max, approach.pitch_cmd_max);
    let pitch_accel =
        approach.pitch_kp * (pitch_cmd - state.theta) - approach.pitch_kd * state.theta_dot;
    let common = params.weight() / state.theta.cos();
    let diff = 2.0
        * (params.pitch_inertia * pitch_accel - contact_force * params.contact_height)
        / params.rotor_separation;
    ThrustCommand::new((common - diff) / 2.0, (common + diff) / 2.0)
}
