//! Deterministic planar simulator and control library for a
//! quadrotor-mounted 3-DoF serial manipulator doing force-regulated contact
//! inspection.
//!
//! The crate covers the pieces needed to study the contact regime at desk
//! scale:
//!
//! - [`plant`]: the planar rigid-body dynamics with a lumped unilateral
//!   spring-damper contact and a pitch/acceleration force observer
//! - [`controller`]: the input-output linearizing PD contact controller with
//!   reference shaping, pitch-priority allocation and actuator limiting
//! - [`kinematics`]: RRR arm forward/inverse kinematics, Jacobian, torque
//!   mapping and workspace sampling
//! - [`statics`]: equilibrium thrust analysis of the vehicle in contact
//! - [`transition`]: the free-flight approach law and the Schmitt-trigger /
//!   pose-gate supervisor for the handover into contact
//! - [`scenario`], [`config`], [`trace`]: the scenario driver, TOML
//!   configuration and plot-ready CSV output behind the `aeromanip` CLI
//!
//! Everything is pure over value types; runs are bit-reproducible.

pub mod config;
pub mod controller;
pub mod kinematics;
pub mod plant;
pub mod scenario;
pub mod statics;
pub mod trace;
pub mod transition;

pub use config::{load_config, parse_config, ConfigError, ScenarioConfig, ScenarioKind};
pub use controller::{
    ActuatorLimits, ControlError, ControllerGains, OutputSetpoint, ReferenceProfile,
};
pub use kinematics::{
    ElbowBranch, EndEffectorWrench, JointConfiguration, JointLimits, KinematicsError, LinkGeometry,
};
pub use plant::{ContactParams, PlantError, PlantState, ThrustCommand, VehicleParams};
pub use scenario::{run_scenario, statics_table, workspace_cloud, ScenarioRun, ScenarioSummary};
pub use trace::{SimulationTrace, StepFlags, TraceRow};
pub use transition::{Mode, SchmittConfig, Supervisor};
