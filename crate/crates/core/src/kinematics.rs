//! RRR manipulator kinematics.
//!
//! The arm is a yaw base joint followed by a planar two-link pair, described
//! in standard DH convention:
//!
//! | link | r   | d   | alpha | theta   |
//! |------|-----|-----|-------|---------|
//! | 1    | 0   | l1  | pi/2  | theta_1 |
//! | 2    | l2  | 0   | 0     | theta_2 |
//! | 3    | l3  | 0   | 0     | theta_3 |
//!
//! Inverse kinematics decouples the base yaw from the in-plane two-link
//! solution; the in-plane approach angle of the last link is `theta_2 +
//! theta_3`.

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

/// Joint angles of the arm [rad].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfiguration {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl JointConfiguration {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1,
            theta2,
            theta3,
        }
    }

    /// In-plane approach angle of the last link.
    pub fn orientation(&self) -> f64 {
        self.theta2 + self.theta3
    }
}

/// Link lengths [m].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkGeometry {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        // l2, l3 recovered from the 6 N / 3.5 N worked load case at
        // q = (0, 35deg, -15deg) with joint torques (1.6, 3.1, 1.1) N m.
        Self {
            l1: 0.10,
            l2: 0.387,
            l3: 0.273,
        }
    }
}

impl LinkGeometry {
    /// Largest planar distance from the shoulder the end effector can reach.
    pub fn max_reach(&self) -> f64 {
        self.l2 + self.l3
    }

    /// Smallest planar distance from the shoulder the end effector can reach.
    pub fn min_reach(&self) -> f64 {
        (self.l2 - self.l3).abs()
    }
}

/// One row of DH parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DHRow {
    pub r: f64,
    pub d: f64,
    pub alpha: f64,
    pub theta: f64,
}

/// Force applied at the end effector, expressed in the arm base frame [N].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndEffectorWrench {
    pub force: Vector3<f64>,
}

/// Symmetric joint range limits [rad].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JointLimits {
    pub theta1: (f64, f64),
    pub theta2: (f64, f64),
    pub theta3: (f64, f64),
}

impl Default for JointLimits {
    fn default() -> Self {
        let deg = std::f64::consts::PI / 180.0;
        Self {
            theta1: (-180.0 * deg, 180.0 * deg),
            theta2: (-150.0 * deg, 150.0 * deg),
            theta3: (-150.0 * deg, 150.0 * deg),
        }
    }
}

impl JointLimits {
    pub fn contains(&self, q: &JointConfiguration) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(q.theta1, self.theta1) && inside(q.theta2, self.theta2) && inside(q.theta3, self.theta3)
    }
}

/// Which of the two planar solutions to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElbowBranch {
    /// Elbow above the shoulder-to-wrist line (`theta3 <= 0`).
    #[default]
    Up,
    /// Elbow below the line (`theta3 >= 0`).
    Down,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("target at planar distance {distance} m outside reachable range [{min_reach}, {max_reach}] m")]
    Unreachable {
        distance: f64,
        min_reach: f64,
        max_reach: f64,
    },
}

/// End-effector pose: base-frame position and in-plane approach angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndEffectorPose {
    pub position: Vector3<f64>,
    pub orientation: f64,
}

/// Homogeneous transform of one DH row:
/// `RotZ(theta) TransZ(d) TransX(r) RotX(alpha)`.
pub fn dh_transform(row: &DHRow) -> Matrix4<f64> {
    let (st, ct) = row.theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    Matrix4::new(
        ct, -st * ca, st * sa, row.r * ct,
        st, ct * ca, -ct * sa, row.r * st,
        0.0, sa, ca, row.d,
        0.0, 0.0, 0.0, 1.0,
    )
}

fn dh_rows(q: &JointConfiguration, links: &LinkGeometry) -> [DHRow; 3] {
    [
        DHRow {
            r: 0.0,
            d: links.l1,
            alpha: std::f64::consts::FRAC_PI_2,
            theta: q.theta1,
        },
        DHRow {
            r: links.l2,
            d: 0.0,
            alpha: 0.0,
            theta: q.theta2,
        },
        DHRow {
            r: links.l3,
            d: 0.0,
            alpha: 0.0,
            theta: q.theta3,
        },
    ]
}

/// Chain the three link transforms and read off the end-effector pose.
pub fn forward_kinematics(q: &JointConfiguration, links: &LinkGeometry) -> EndEffectorPose {
    let rows = dh_rows(q, links);
    let t = dh_transform(&rows[0]) * dh_transform(&rows[1]) * dh_transform(&rows[2]);
    EndEffectorPose {
        position: Vector3::new(t[(0, 3)], t[(1, 3)], t[(2, 3)]),
        orientation: q.orientation(),
    }
}

/// Analytic inverse kinematics for a target position.
///
/// The base yaw points at the target; the remaining planar two-link problem
/// is solved by the cosine rule on (planar distance, height above shoulder).
/// At full extension both elbow branches coincide.
pub fn inverse_kinematics(
    target: &Vector3<f64>,
    links: &LinkGeometry,
    elbow: ElbowBranch,
) -> Result<JointConfiguration, KinematicsError> {
    let theta1 = target.y.atan2(target.x);
    let rho = (target.x * target.x + target.y * target.y).sqrt();
    let zeta = target.z - links.l1;
    let r2 = rho * rho + zeta * zeta;
    let r = r2.sqrt();
    if r > links.max_reach() + 1e-12 || r < links.min_reach() - 1e-12 {
        return Err(KinematicsError::Unreachable {
            distance: r,
            min_reach: links.min_reach(),
            max_reach: links.max_reach(),
        });
    }
    let cos3 = ((r2 - links.l2 * links.l2 - links.l3 * links.l3)
        / (2.0 * links.l2 * links.l3))
        .clamp(-1.0, 1.0);
    let theta3 = match elbow {
        ElbowBranch::Up => -cos3.acos(),
        ElbowBranch::Down => cos3.acos(),
    };
    let theta2 = zeta.atan2(rho)
        - (links.l3 * theta3.sin()).atan2(links.l2 + links.l3 * theta3.cos());
    Ok(JointConfiguration::new(theta1, theta2, theta3))
}

/// Geometric position Jacobian (3x3) of the end effector.
pub fn jacobian(q: &JointConfiguration, links: &LinkGeometry) -> Matrix3<f64> {
    let rows = dh_rows(q, links);
    let t1 = dh_transform(&rows[0]);
    let t12 = t1 * dh_transform(&rows[1]);
    let t123 = t12 * dh_transform(&rows[2]);

    let origin = |t: &Matrix4<f64>| Vector3::new(t[(0, 3)], t[(1, 3)], t[(2, 3)]);
    let z_axis = |t: &Matrix4<f64>| Vector3::new(t[(0, 2)], t[(1, 2)], t[(2, 2)]);

    let p_ee = origin(&t123);
    let columns = [
        Vector3::z().cross(&p_ee),
        z_axis(&t1).cross(&(p_ee - origin(&t1))),
        z_axis(&t12).cross(&(p_ee - origin(&t12))),
    ];
    Matrix3::from_columns(&columns)
}

/// Joint torques balancing an end-effector load: `tau = J^T F`.
pub fn joint_torques(
    q: &JointConfiguration,
    links: &LinkGeometry,
    wrench: &EndEffectorWrench,
) -> Vector3<f64> {
    jacobian(q, links).transpose() * wrench.force
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w > std::f64::consts::PI {
        w -= two_pi;
    } else if w <= -std::f64::consts::PI {
        w += two_pi;
    }
    w
}

/// Whether the arm can place the end effector at `point` with the in-plane
/// approach angle within `orientation_tol` of `orientation`, respecting
/// joint limits. Both elbow branches are tried.
pub fn reachable_with_orientation(
    point: &Vector3<f64>,
    orientation: f64,
    orientation_tol: f64,
    links: &LinkGeometry,
    limits: &JointLimits,
) -> bool {
    for elbow in [ElbowBranch::Up, ElbowBranch::Down] {
        if let Ok(q) = inverse_kinematics(point, links, elbow) {
            if limits.contains(&q)
                && wrap_angle(q.orientation() - orientation).abs() <= orientation_tol
            {
                return true;
            }
        }
    }
    false
}

/// One sample of the workspace sweep.
#[derive(Debug, Clone, Copy)]
pub struct WorkspacePoint {
    pub position: Vector3<f64>,
    /// Inside joint limits (always true for a sweep over the limit ranges).
    pub reachable: bool,
    /// Reachable and oriented within tolerance of the desired approach.
    pub application: bool,
}

/// Deterministic joint-space grid sweep mapped through forward kinematics.
///
/// `resolution` points per joint over each limit range, labeled with
/// reachability and application-space membership for the given approach
/// orientation.
pub fn workspace_sample(
    links: &LinkGeometry,
    limits: &JointLimits,
    resolution: usize,
    orientation: f64,
    orientation_tol: f64,
) -> Vec<WorkspacePoint> {
    assert!(resolution > 0, "grid resolution must be positive");
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        if resolution == 1 {
            return vec![(lo + hi) / 2.0];
        }
        (0..resolution)
            .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let g1 = axis(limits.theta1);
    let g2 = axis(limits.theta2);
    let g3 = axis(limits.theta3);
    let mut points = Vec::with_capacity(resolution.pow(3));
    for &a1 in &g1 {
        for &a2 in &g2 {
            for &a3 in &g3 {
                let q = JointConfiguration::new(a1, a2, a3);
                let pose = forward_kinematics(&q, links);
                let reachable = limits.contains(&q);
                let application = reachable
                    && wrap_angle(q.orientation() - orientation).abs() <= orientation_tol;
                points.push(WorkspacePoint {
                    position: pose.position,
                    reachable,
                    application,
                });
            }
        }
    }
    points
}
