//! Scenario configuration: TOML loading, defaults, validation.
//!
//! A config file needs only the scenario kind; every other value has a
//! documented default. Unknown keys are rejected. `load_config` returns a
//! fully resolved configuration, including per-kind defaults for the horizon
//! and initial state, so the effective config can be written back out and
//! replayed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::{ActuatorLimits, ControllerGains};
use crate::kinematics::{JointLimits, LinkGeometry};
use crate::plant::{ContactParams, PlantState, VehicleParams};
use crate::transition::{ApproachConfig, PoseGate, SchmittConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Closed-loop force regulation from in-contact initial conditions.
    ContactRegulation,
    /// Approach from standoff, trigger-gated handover, then regulation.
    FullTransition,
    /// Equilibrium thrust sweep over a contact-force range.
    StaticsSweep,
    /// Joint-grid workspace point cloud.
    WorkspaceDump,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ScenarioKind::ContactRegulation => "contact-regulation",
            ScenarioKind::FullTransition => "full-transition",
            ScenarioKind::StaticsSweep => "statics-sweep",
            ScenarioKind::WorkspaceDump => "workspace-dump",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contact-regulation" => Ok(ScenarioKind::ContactRegulation),
            "full-transition" => Ok(ScenarioKind::FullTransition),
            "statics-sweep" => Ok(ScenarioKind::StaticsSweep),
            "workspace-dump" => Ok(ScenarioKind::WorkspaceDump),
            other => Err(format!(
                "unknown scenario kind `{other}` (expected contact-regulation, \
                 full-transition, statics-sweep or workspace-dump)"
            )),
        }
    }
}

/// Regulation targets of the contact controller.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Targets {
    /// Desired horizontal position [m]
    pub x: f64,
    /// Desired contact force [N]
    pub force: f64,
}

impl Default for Targets {
    fn default() -> Self {
        Self { x: 0.0, force: 8.5 }
    }
}

/// Rate and acceleration limits of the reference profiles fed to the outer
/// loop. The pitch rate limit doubles as the reference-side enforcement of
/// the pitch-rate constraint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceShaping {
    /// Position reference rate limit [m/s]
    pub x_rate: f64,
    /// Position reference acceleration limit [m/s^2]
    pub x_accel: f64,
    /// Pitch reference rate limit [rad/s]
    pub pitch_rate: f64,
    /// Pitch reference acceleration limit [rad/s^2]
    pub pitch_accel: f64,
}

impl Default for ReferenceShaping {
    fn default() -> Self {
        Self {
            x_rate: 0.25,
            x_accel: 1.5,
            pitch_rate: 1.8,
            pitch_accel: 30.0,
        }
    }
}

/// Parameters of the statics sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaticsConfig {
    /// Lowest contact force [N]
    pub force_min: f64,
    /// Highest contact force [N]
    pub force_max: f64,
    /// Number of sweep points
    pub steps: usize,
    /// Friction coefficient override; contact.friction when absent
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friction: Option<f64>,
}

impl Default for StaticsConfig {
    fn default() -> Self {
        Self {
            force_min: 0.0,
            force_max: 12.0,
            steps: 121,
            friction: None,
        }
    }
}

/// Parameters of the workspace dump.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkspaceConfig {
    /// Grid points per joint
    pub resolution: usize,
    /// Desired in-plane approach orientation [rad]
    pub orientation: f64,
    /// Accepted orientation deviation [rad]
    pub orientation_tol: f64,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        Self {
            resolution: 25,
            orientation: 0.0,
            orientation_tol: 0.15,
        }
    }
}

/// Complete description of one scenario run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Integrator step [s]
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Simulation horizon [s]; per-kind default when omitted
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Guard on |sin(pitch)| below which the contact law holds its output
    #[serde(default = "default_singularity_threshold")]
    pub singularity_threshold: f64,
    /// Initial vehicle state; per-kind default when omitted
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<PlantState>,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default)]
    pub gains: ControllerGains,
    #[serde(default)]
    pub limits: ActuatorLimits,
    #[serde(default)]
    pub shaping: ReferenceShaping,
    #[serde(default)]
    pub schmitt: SchmittConfig,
    #[serde(default)]
    pub links: LinkGeometry,
    #[serde(default)]
    pub joint_limits: JointLimits,
    #[serde(default)]
    pub gate: PoseGate,
    #[serde(default)]
    pub approach: ApproachConfig,
    #[serde(default)]
    pub statics: StaticsConfig,
    #[serde(default)]
    pub workspace: WorkspaceConfig,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_singularity_threshold() -> f64 {
    0.02
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {field}: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Minimal config of the given kind with every default applied.
    pub fn with_kind(kind: ScenarioKind) -> Self {
        let mut cfg = Self {
            kind,
            dt: default_dt(),
            horizon: None,
            singularity_threshold: default_singularity_threshold(),
            initial: None,
            targets: Targets::default(),
            vehicle: VehicleParams::default(),
            contact: ContactParams::default(),
            gains: ControllerGains::default(),
            limits: ActuatorLimits::default(),
            shaping: ReferenceShaping::default(),
            schmitt: SchmittConfig::default(),
            links: LinkGeometry::default(),
            joint_limits: JointLimits::default(),
            gate: PoseGate::default(),
            approach: ApproachConfig::default(),
            statics: StaticsConfig::default(),
            workspace: WorkspaceConfig::default(),
        };
        cfg.resolve();
        cfg
    }

    /// Fill the per-kind defaults for horizon and initial state.
    pub fn resolve(&mut self) {
        self.horizon.get_or_insert(match self.kind {
            ScenarioKind::FullTransition => 10.0,
            _ => 3.0,
        });
        self.initial.get_or_insert_with(|| match self.kind {
            // Standoff start: level hover half a meter short of touching.
            ScenarioKind::FullTransition => {
                PlantState::new(self.contact.surface_position - 0.5, 0.0, 0.0, 0.0)
            }
            // In-contact start matching the nominal handover state.
            _ => PlantState::new(-0.1, 0.0, 0.1, 1.0),
        });
    }

    /// Structural validation: everything a simulation needs to be well posed,
    /// except the strict gain positivity enforced on loaded files.
    // Negated comparisons are deliberate: they reject NaN as well.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate_structure(&self) -> Result<(), ConfigError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        let horizon = self.horizon.unwrap_or(0.0);
        if !(horizon.is_finite() && horizon >= self.dt) {
            return Err(invalid(
                "horizon",
                format!("must be at least dt = {}, got {horizon}", self.dt),
            ));
        }
        if !(self.singularity_threshold > 0.0 && self.singularity_threshold < 1.0) {
            return Err(invalid(
                "singularity_threshold",
                "must lie strictly between 0 and 1",
            ));
        }
        if let Some(initial) = &self.initial {
            if !initial.is_finite() {
                return Err(invalid("initial", "state must be finite"));
            }
            if initial.theta.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(invalid(
                    "initial.theta",
                    "pitch must satisfy |theta| < pi/2",
                ));
            }
        }

        let v = &self.vehicle;
        if !(v.mass > 0.0 && v.gravity > 0.0 && v.rotor_separation > 0.0 && v.pitch_inertia > 0.0)
        {
            return Err(invalid(
                "vehicle",
                "mass, gravity, rotor_separation and pitch_inertia must be positive",
            ));
        }

        let c = &self.contact;
        if !(c.stiffness > 0.0) {
            return Err(invalid("contact.stiffness", "must be positive"));
        }
        if !(c.damping >= 0.0) {
            return Err(invalid("contact.damping", "must be non-negative"));
        }
        if !(c.friction >= 0.0) {
            return Err(invalid("contact.friction", "must be non-negative"));
        }

        let l = &self.limits;
        if !(l.t_min >= 0.0 && l.t_min < l.t_max) {
            return Err(invalid("limits", "need 0 <= t_min < t_max"));
        }
        if !(l.slew_max > 0.0) {
            return Err(invalid("limits.slew_max", "must be positive"));
        }
        if !(l.pitch_rate_max > 0.0) {
            return Err(invalid("limits.pitch_rate_max", "must be positive"));
        }

        let s = &self.shaping;
        if !(s.x_rate > 0.0 && s.x_accel > 0.0 && s.pitch_rate > 0.0 && s.pitch_accel > 0.0) {
            return Err(invalid("shaping", "rates and accelerations must be positive"));
        }
        if s.pitch_rate > l.pitch_rate_max {
            return Err(invalid(
                "shaping.pitch_rate",
                format!(
                    "reference rate {} exceeds limits.pitch_rate_max {}",
                    s.pitch_rate, l.pitch_rate_max
                ),
            ));
        }

        if !(self.schmitt.low >= 0.0 && self.schmitt.low < self.schmitt.high) {
            return Err(invalid("schmitt", "need 0 <= low < high"));
        }

        if !(self.targets.force >= 0.0) {
            return Err(invalid("targets.force", "must be non-negative"));
        }
        let theta_target = (self.targets.force / self.vehicle.weight()).atan();
        if matches!(
            self.kind,
            ScenarioKind::ContactRegulation | ScenarioKind::FullTransition
        ) && theta_target.sin() <= self.singularity_threshold
        {
            return Err(invalid(
                "targets.force",
                format!(
                    "force setpoint implies pitch {theta_target:.4} rad inside the \
                     singularity guard; raise the force or lower the threshold"
                ),
            ));
        }

        let lk = &self.links;
        if !(lk.l1 > 0.0 && lk.l2 > 0.0 && lk.l3 > 0.0) {
            return Err(invalid("links", "lengths must be positive"));
        }
        let jl = &self.joint_limits;
        for (name, (lo, hi)) in [
            ("joint_limits.theta1", jl.theta1),
            ("joint_limits.theta2", jl.theta2),
            ("joint_limits.theta3", jl.theta3),
        ] {
            if !(lo < hi) {
                return Err(invalid("joint_limits", format!("{name}: need low < high")));
            }
        }

        let g = &self.gate;
        if !(g.pitch_min < g.pitch_max) {
            return Err(invalid("gate", "need pitch_min < pitch_max"));
        }
        if !(g.orientation_tol > 0.0) {
            return Err(invalid("gate.orientation_tol", "must be positive"));
        }
        if !(g.mount_height >= 0.0) {
            return Err(invalid("gate.mount_height", "must be non-negative"));
        }

        let a = &self.approach;
        if !(a.velocity >= 0.0) {
            return Err(invalid("approach.velocity", "must be non-negative"));
        }
        if !(a.velocity_gain > 0.0 && a.pitch_kp > 0.0 && a.pitch_kd > 0.0) {
            return Err(invalid("approach", "gains must be positive"));
        }
        if !(a.pitch_cmd_max > 0.0 && a.pitch_cmd_max < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(
                "approach.pitch_cmd_max",
                "must lie strictly between 0 and pi/2",
            ));
        }

        let st = &self.statics;
        if !(st.force_min >= 0.0 && st.force_max > st.force_min) {
            return Err(invalid("statics", "need 0 <= force_min < force_max"));
        }
        if st.steps < 2 {
            return Err(invalid("statics.steps", "need at least two points"));
        }
        if let Some(mu) = st.friction {
            if !(mu >= 0.0) {
                return Err(invalid("statics.friction", "must be non-negative"));
            }
        }

        if self.workspace.resolution == 0 {
            return Err(invalid("workspace.resolution", "must be positive"));
        }
        if !(self.workspace.orientation_tol > 0.0) {
            return Err(invalid("workspace.orientation_tol", "must be positive"));
        }
        Ok(())
    }

    /// Full validation as applied to loaded files: structure plus strictly
    /// positive controller gains (required for stable error dynamics).
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_structure()?;
        let g = &self.gains;
        if !(g.kp_x > 0.0 && g.kd_x > 0.0 && g.kp_pitch > 0.0 && g.kd_pitch > 0.0) {
            return Err(invalid("gains", "all gains must be strictly positive"));
        }
        Ok(())
    }

    /// Effective horizon after `resolve`.
    pub fn horizon(&self) -> f64 {
        self.horizon.expect("config not resolved")
    }

    /// Effective initial state after `resolve`.
    pub fn initial_state(&self) -> PlantState {
        self.initial.expect("config not resolved")
    }

    /// Serialize the effective configuration.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

/// Parse a config file without resolving or validating.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Load, resolve and validate a scenario configuration.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = parse_config(path)?;
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> std::path::PathBuf {
        use std::io::Write;
        let mut path = std::env::temp_dir();
        let unique = format!(
            "aeromanip-config-{}-{:?}.toml",
            std::process::id(),
            std::thread::current().id()
        );
        path.push(unique);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let path = write_temp("kind = \"contact-regulation\"\n");
        let cfg = load_config(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.horizon(), 3.0);
        let init = cfg.initial_state();
        assert_eq!(init.x, -0.1);
        assert_eq!(init.theta, 0.1);
        assert_eq!(init.theta_dot, 1.0);
        assert_eq!(cfg.vehicle.mass, 2.727);
        assert_eq!(cfg.limits.t_max, 21.0);
    }

    #[test]
    fn transition_kind_defaults_differ() {
        let path = write_temp("kind = \"full-transition\"\n");
        let cfg = load_config(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(cfg.horizon(), 10.0);
        let init = cfg.initial_state();
        assert!(init.x < cfg.contact.surface_position);
        assert_eq!(init.theta, 0.0);
    }

    #[test]
    fn zero_dt_rejected() {
        let path = write_temp("kind = \"contact-regulation\"\ndt = 0.0\n");
        let err = load_config(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "dt"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let path = write_temp("kind = \"contact-regulation\"\nbogus = 1\n");
        let err = load_config(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, ConfigError::Parse { .. }), "{err}");
    }

    #[test]
    fn unknown_nested_keys_rejected() {
        let path = write_temp("kind = \"contact-regulation\"\n[vehicle]\nmas = 2.0\n");
        let err = load_config(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn zero_gains_rejected_on_load_but_structurally_fine() {
        let path = write_temp(
            "kind = \"contact-regulation\"\n[gains]\nkp_x = 0.0\nkd_x = 0.0\nkp_pitch = 0.0\nkd_pitch = 0.0\n",
        );
        let err = load_config(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "gains", .. }));
        let mut cfg = parse_config(&path).unwrap();
        std::fs::remove_file(&path).ok();
        cfg.resolve();
        assert!(cfg.validate_structure().is_ok());
    }

    #[test]
    fn effective_config_round_trips() {
        let cfg = ScenarioConfig::with_kind(ScenarioKind::ContactRegulation);
        let text = cfg.to_toml_string();
        let reparsed: ScenarioConfig = toml::from_str(&text).unwrap();
        assert_eq!(reparsed.to_toml_string(), text);
        assert_eq!(reparsed.horizon(), cfg.horizon());
        assert_eq!(reparsed.initial_state(), cfg.initial_state());
    }

    #[test]
    fn kind_parses_from_cli_names() {
        for (name, kind) in [
            ("contact-regulation", ScenarioKind::ContactRegulation),
            ("full-transition", ScenarioKind::FullTransition),
            ("statics-sweep", ScenarioKind::StaticsSweep),
            ("workspace-dump", ScenarioKind::WorkspaceDump),
        ] {
            assert_eq!(name.parse::<ScenarioKind>().unwrap(), kind);
            assert_eq!(kind.to_string(), name);
        }
        assert!("hover".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn small_force_target_hits_singularity_guard() {
        let mut cfg = ScenarioConfig::with_kind(ScenarioKind::ContactRegulation);
        cfg.targets.force = 0.1;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Invalid {
                field: "targets.force",
                ..
            }
        ));
    }
}
