//! Planar rigid-body plant of the vehicle in contact.
//!
//! The vehicle is modeled in a vertical plane with the vertical axis treated
//! as static, so the state reduces to horizontal position and pitch together
//! with their rates. Contact with the inspected surface is a lumped
//! unilateral spring-damper acting along the horizontal axis; its force both
//! decelerates the vehicle and pitches it away from the surface through the
//! moment arm above the center of mass.

use nalgebra::{Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

/// Planar vehicle state: horizontal position/velocity and pitch angle/rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantState {
    /// Horizontal position [m]
    pub x: f64,
    /// Horizontal velocity [m/s]
    pub x_dot: f64,
    /// Pitch angle [rad], positive tilting toward the surface
    pub theta: f64,
    /// Pitch rate [rad/s]
    pub theta_dot: f64,
}

impl PlantState {
    pub fn new(x: f64, x_dot: f64, theta: f64, theta_dot: f64) -> Self {
        Self {
            x,
            x_dot,
            theta,
            theta_dot,
        }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.x, self.x_dot, self.theta, self.theta_dot)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.x_dot.is_finite()
            && self.theta.is_finite()
            && self.theta_dot.is_finite()
    }
}

/// Thrust pair commanded to the two rotor groups [N].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustCommand {
    pub t1: f64,
    pub t2: f64,
}

impl ThrustCommand {
    pub fn new(t1: f64, t2: f64) -> Self {
        Self { t1, t2 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.t1, self.t2)
    }

    /// Total thrust T1 + T2 [N].
    pub fn total(&self) -> f64 {
        self.t1 + self.t2
    }

    pub fn max_component(&self) -> f64 {
        self.t1.max(self.t2)
    }
}

/// Mass and geometry of the vehicle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleParams {
    /// Total mass, platform plus manipulator [kg]
    pub mass: f64,
    /// Gravitational acceleration [m/s^2]
    pub gravity: f64,
    /// Rotor separation [m]
    pub rotor_separation: f64,
    /// Vertical offset of the contact point above the center of mass [m]
    pub contact_height: f64,
    /// Pitch moment of inertia about the center of mass [kg m^2]
    pub pitch_inertia: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 2.727,
            gravity: 9.81,
            rotor_separation: 0.65,
            contact_height: 0.25,
            pitch_inertia: 0.05,
        }
    }
}

impl VehicleParams {
    /// Weight of the vehicle [N].
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }
}

/// Lumped compliance of the end-effector contact.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContactParams {
    /// Contact stiffness [N/m]
    pub stiffness: f64,
    /// Contact damping [N s/m]
    pub damping: f64,
    /// Vehicle position at which the unloaded contact just touches [m]
    pub surface_position: f64,
    /// Coulomb friction coefficient at the contact (statics only)
    pub friction: f64,
    /// Horizontal offset of the contact point from the center of mass [m]
    pub contact_offset: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            stiffness: 60.0,
            damping: 2.0,
            // Calibrated so the force is 2.5 N at x = -0.1 m and 8.5 N at x = 0.
            surface_position: -8.5 / 60.0,
            friction: 0.3,
            contact_offset: 0.20,
        }
    }
}

/// Errors raised when the planar model leaves its domain of validity.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlantError {
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("pitch angle {theta} rad outside model validity range |theta| < pi/2")]
    PitchOutOfRange { theta: f64 },
}

/// Unforced part of the state derivative for a given contact force.
///
/// Returns `[x_dot, -F_H/M, theta_dot, F_H*l_H/I_yy]`.
pub fn drift(
    state: &PlantState,
    contact_force: f64,
    params: &VehicleParams,
) -> Result<Vector4<f64>, PlantError> {
    if !state.is_finite() {
        return Err(PlantError::NonFinite { context: "state" });
    }
    if !contact_force.is_finite() {
        return Err(PlantError::NonFinite {
            context: "contact force",
        });
    }
    Ok(Vector4::new(
        state.x_dot,
        -contact_force / params.mass,
        state.theta_dot,
        contact_force * params.contact_height / params.pitch_inertia,
    ))
}

/// Input coupling matrix of the thrust pair into the state derivative.
///
/// Row 2 carries the tilted-thrust horizontal acceleration, row 4 the
/// differential-thrust pitch acceleration; equal thrusts produce no pitch
/// moment.
pub fn input_matrix(state: &PlantState, params: &VehicleParams) -> Matrix4x2<f64> {
    let s = state.theta.sin() / params.mass;
    let b = params.rotor_separation / (2.0 * params.pitch_inertia);
    Matrix4x2::new(0.0, 0.0, s, s, 0.0, 0.0, -b, b)
}

/// Unilateral spring-damper contact force [N].
///
/// Zero whenever the spring plus damping contribution would pull.
pub fn contact_force(state: &PlantState, contact: &ContactParams) -> f64 {
    let f = contact.stiffness * (state.x - contact.surface_position)
        + contact.damping * state.x_dot;
    f.max(0.0)
}

/// Full state derivative, affine in the thrust command.
pub fn state_derivative(
    state: &PlantState,
    u: &ThrustCommand,
    params: &VehicleParams,
    contact: &ContactParams,
) -> Result<Vector4<f64>, PlantError> {
    if state.theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(PlantError::PitchOutOfRange { theta: state.theta });
    }
    if !(u.t1.is_finite() && u.t2.is_finite()) {
        return Err(PlantError::NonFinite { context: "thrust" });
    }
    let f_h = contact_force(state, contact);
    let xdot = drift(state, f_h, params)? + input_matrix(state, params) * u.as_vector();
    Ok(xdot)
}

/// Classical fourth-order Runge-Kutta step with the command held constant.
pub fn rk4_step(
    state: &PlantState,
    u: &ThrustCommand,
    dt: f64,
    params: &VehicleParams,
    contact: &ContactParams,
) -> Result<PlantState, PlantError> {
    let x0 = state.as_vector();
    let k1 = state_derivative(state, u, params, contact)?;
    let k2 = state_derivative(
        &PlantState::from_vector(&(x0 + 0.5 * dt * k1)),
        u,
        params,
        contact,
    )?;
    let k3 = state_derivative(
        &PlantState::from_vector(&(x0 + 0.5 * dt * k2)),
        u,
        params,
        contact,
    )?;
    let k4 = state_derivative(
        &PlantState::from_vector(&(x0 + dt * k3)),
        u,
        params,
        contact,
    )?;
    let next = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Ok(PlantState::from_vector(&next))
}

/// Contact force estimate from pitch and measured horizontal acceleration:
/// `F_H = M g tan(theta) - M x_ddot`.
pub fn force_observer(
    theta: f64,
    x_ddot: f64,
    params: &VehicleParams,
) -> Result<f64, PlantError> {
    if theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(PlantError::PitchOutOfRange { theta });
    }
    Ok(params.mass * params.gravity * theta.tan() - params.mass * x_ddot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> VehicleParams {
        VehicleParams::default()
    }

    fn contact() -> ContactParams {
        ContactParams::default()
    }

    #[test]
    fn drift_zero_force_zero_rates() {
        let s = PlantState::new(0.3, 0.0, 0.2, 0.0);
        let d = drift(&s, 0.0, &params()).unwrap();
        assert_eq!(d, Vector4::zeros());
    }

    #[test]
    fn drift_matches_hand_arithmetic() {
        // -8.5/2.727 and 8.5*0.25/0.05
        let s = PlantState::new(0.0, 0.0, 0.1, 0.0);
        let d = drift(&s, 8.5, &params()).unwrap();
        assert_relative_eq!(d[1], -3.1170, epsilon = 1e-4);
        assert_relative_eq!(d[3], 42.5, epsilon = 1e-12);
    }

    #[test]
    fn drift_passes_pitch_rate_through() {
        let s = PlantState::new(0.0, 0.0, 0.1, 1.0);
        let d = drift(&s, 2.684, &params()).unwrap();
        assert_eq!(d[2], 1.0);
    }

    #[test]
    fn drift_rejects_non_finite() {
        let s = PlantState::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(matches!(
            drift(&s, 0.0, &params()),
            Err(PlantError::NonFinite { .. })
        ));
        let s = PlantState::new(0.0, 0.0, 0.0, 0.0);
        assert!(drift(&s, f64::INFINITY, &params()).is_err());
    }

    #[test]
    fn input_matrix_level_vehicle() {
        let p = params();
        let s = PlantState::new(0.0, 0.0, 0.0, 0.0);
        let g = input_matrix(&s, &p);
        assert_eq!(g[(1, 0)], 0.0);
        assert_eq!(g[(1, 1)], 0.0);
        let b = p.rotor_separation / (2.0 * p.pitch_inertia);
        assert_relative_eq!(g[(3, 0)], -b, epsilon = 1e-15);
        assert_relative_eq!(g[(3, 1)], b, epsilon = 1e-15);
    }

    #[test]
    fn input_matrix_tilted() {
        let s = PlantState::new(0.0, 0.0, std::f64::consts::FRAC_PI_6, 0.0);
        let g = input_matrix(&s, &params());
        assert_relative_eq!(g[(1, 0)], 0.18335, epsilon = 1e-5);
        assert_relative_eq!(g[(1, 1)], 0.18335, epsilon = 1e-5);
    }

    #[test]
    fn equal_thrusts_make_no_pitch_moment() {
        let s = PlantState::new(0.0, 0.0, 0.4, 0.0);
        let g = input_matrix(&s, &params());
        for t in [0.0, 5.0, 21.0] {
            let u = Vector2::new(t, t);
            assert_relative_eq!((g * u)[3], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn contact_force_zero_at_touch() {
        let c = contact();
        let s = PlantState::new(c.surface_position, 0.0, 0.0, 0.0);
        assert_eq!(contact_force(&s, &c), 0.0);
    }

    #[test]
    fn contact_force_calibration_points() {
        let c = contact();
        let s = PlantState::new(-0.1, 0.0, 0.1, 0.0);
        assert_relative_eq!(contact_force(&s, &c), 2.5, epsilon = 1e-9);
        let s = PlantState::new(0.0, 0.0, 0.3, 0.0);
        assert_relative_eq!(contact_force(&s, &c), 8.5, epsilon = 1e-9);
    }

    #[test]
    fn contact_force_never_pulls() {
        let c = contact();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = PlantState::new(
                rng.gen_range(-0.5..0.3),
                rng.gen_range(-2.0..2.0),
                0.0,
                0.0,
            );
            assert!(contact_force(&s, &c) >= 0.0);
        }
    }

    #[test]
    fn state_derivative_rest_without_input() {
        let c = contact();
        // Separated from the surface, level, at rest.
        let s = PlantState::new(c.surface_position - 0.2, 0.0, 0.0, 0.0);
        let d = state_derivative(&s, &ThrustCommand::zero(), &params(), &c).unwrap();
        assert_eq!(d, Vector4::zeros());
    }

    #[test]
    fn state_derivative_equilibrium_input_holds() {
        let p = params();
        let c = contact();
        let s = PlantState::new(0.0, 0.0, 0.3, 0.0);
        let f = contact_force(&s, &c);
        // Solve (T1+T2) sin(theta) = F and (T1-T2) L/2 = F l_H.
        let total = f / s.theta.sin();
        let diff = 2.0 * f * p.contact_height / p.rotor_separation;
        let u = ThrustCommand::new((total + diff) / 2.0, (total - diff) / 2.0);
        let d = state_derivative(&s, &u, &p, &c).unwrap();
        for i in 0..4 {
            assert_relative_eq!(d[i], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn state_derivative_affine_in_input() {
        // Three collinear commands give collinear derivatives.
        let p = params();
        let c = contact();
        let s = PlantState::new(-0.05, 0.2, 0.25, -0.4);
        let u0 = ThrustCommand::new(3.0, 5.0);
        let u1 = ThrustCommand::new(9.0, 11.0);
        let um = ThrustCommand::new(6.0, 8.0);
        let d0 = state_derivative(&s, &u0, &p, &c).unwrap();
        let d1 = state_derivative(&s, &u1, &p, &c).unwrap();
        let dm = state_derivative(&s, &um, &p, &c).unwrap();
        assert_relative_eq!(((d0 + d1) / 2.0 - dm).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn state_derivative_rejects_steep_pitch() {
        let s = PlantState::new(0.0, 0.0, 1.6, 0.0);
        assert!(matches!(
            state_derivative(&s, &ThrustCommand::zero(), &params(), &contact()),
            Err(PlantError::PitchOutOfRange { .. })
        ));
    }

    #[test]
    fn drift_and_input_matrix_match_finite_differences() {
        // Central differences of the full derivative in u recover the input
        // matrix columns; the drift is the derivative at u = 0.
        let p = params();
        let c = contact();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let s = PlantState::new(
                rng.gen_range(-0.3..0.1),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-2.0..2.0),
            );
            let f = contact_force(&s, &c);
            let g = input_matrix(&s, &p);
            let d0 = state_derivative(&s, &ThrustCommand::zero(), &p, &c).unwrap();
            assert_relative_eq!((d0 - drift(&s, f, &p).unwrap()).norm(), 0.0, epsilon = 1e-12);
            let eps = 1e-3;
            for col in 0..2 {
                let mut up = ThrustCommand::zero();
                let mut dn = ThrustCommand::zero();
                if col == 0 {
                    up.t1 = eps;
                    dn.t1 = -eps;
                } else {
                    up.t2 = eps;
                    dn.t2 = -eps;
                }
                let dp = state_derivative(&s, &up, &p, &c).unwrap();
                let dm = state_derivative(&s, &dn, &p, &c).unwrap();
                let fd = (dp - dm) / (2.0 * eps);
                for row in 0..4 {
                    let reference = g[(row, col)];
                    let scale = reference.abs().max(1.0);
                    assert!(
                        (fd[row] - reference).abs() / scale < 1e-8,
                        "row {row} col {col}: fd {} vs {}",
                        fd[row],
                        reference
                    );
                }
            }
        }
    }

    #[test]
    fn rk4_zero_derivative_keeps_state() {
        let c = contact();
        let s = PlantState::new(c.surface_position - 0.1, 0.0, 0.0, 0.0);
        let next = rk4_step(&s, &ThrustCommand::zero(), 1e-3, &params(), &c).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn rk4_free_rotation_advances_pitch_linearly() {
        let c = contact();
        let s = PlantState::new(c.surface_position - 0.1, 0.0, 0.0, 1.0);
        let next = rk4_step(&s, &ThrustCommand::zero(), 1e-3, &params(), &c).unwrap();
        assert_relative_eq!(next.theta, 1e-3, epsilon = 1e-15);
        assert_relative_eq!(next.theta_dot, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        // Richardson check on a smooth in-contact trajectory: halving the
        // step shrinks the error against a fine reference by about 2^4.
        let p = params();
        let c = contact();
        let u = ThrustCommand::new(14.0, 12.0);
        let s0 = PlantState::new(0.0, 0.05, 0.3, 0.1);
        let horizon = 0.1;

        let integrate = |dt: f64| -> Vector4<f64> {
            let n = (horizon / dt).round() as usize;
            let mut s = s0;
            for _ in 0..n {
                s = rk4_step(&s, &u, dt, &p, &c).unwrap();
            }
            s.as_vector()
        };

        let reference = integrate(horizon / 6400.0);
        let coarse = (integrate(horizon / 50.0) - reference).norm();
        let fine = (integrate(horizon / 100.0) - reference).norm();
        let ratio = coarse / fine;
        assert!(
            (10.0..24.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio}"
        );
        // The trajectory must stay in contact for the smoothness argument.
        let mut s = s0;
        for _ in 0..100 {
            s = rk4_step(&s, &u, horizon / 100.0, &p, &c).unwrap();
            assert!(contact_force(&s, &c) > 0.0);
        }
    }

    #[test]
    fn observer_level_at_rest_reads_zero() {
        assert_eq!(force_observer(0.0, 0.0, &params()).unwrap(), 0.0);
    }

    #[test]
    fn observer_static_tilt() {
        // 2.727 * 9.81 * tan(0.1)
        let f = force_observer(0.1, 0.0, &params()).unwrap();
        assert_relative_eq!(f, 2.684, epsilon = 1e-3);
    }

    #[test]
    fn observer_rejects_vertical_pitch() {
        assert!(force_observer(std::f64::consts::FRAC_PI_2, 0.0, &params()).is_err());
    }

    #[test]
    fn observer_in_static_contact_equals_weight_times_tan() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let theta = rng.gen_range(-1.0..1.0);
            let f = force_observer(theta, 0.0, &p).unwrap();
            assert_relative_eq!(f, p.weight() * theta.tan(), epsilon = 1e-12);
        }
    }
}
