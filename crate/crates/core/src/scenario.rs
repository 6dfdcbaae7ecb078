//! Closed-loop scenario driver: the simulation loop, the energy monitor and
//! the run summary.
//!
//! Each step reads the plant force, updates the supervisor, runs the active
//! controller, shapes the command through the allocation and the
//! magnitude/slew limiter, then advances the plant one fixed RK4 step with
//! the command held. Everything is pure over the configuration, so a given
//! config reproduces its trace exactly.

use crate::config::{ConfigError, ScenarioConfig, ScenarioKind};
use crate::controller::{
    allocate_pitch_priority, apply_limits, feedback_linearize, outer_loop, setpoint_from_force,
    ControllerGains, OutputSetpoint, ReferenceProfile,
};
use crate::kinematics::{workspace_sample, WorkspacePoint};
use crate::plant::{
    contact_force, force_observer, rk4_step, state_derivative, PlantState, ThrustCommand,
    VehicleParams,
};
use crate::statics::{force_range, thrust_sweep, SweepRow};
use crate::trace::{OutputError, SimulationTrace, StepFlags, TraceRow};
use crate::transition::{free_flight_controller, pose_ready, Mode, Supervisor};

/// Energy of the regulated closed loop: kinetic terms plus the proportional
/// gains acting as springs on the output errors.
pub fn energy(
    state: &PlantState,
    setpoint: &OutputSetpoint,
    gains: &ControllerGains,
    params: &VehicleParams,
) -> f64 {
    0.5 * params.mass * state.x_dot * state.x_dot
        + 0.5 * params.pitch_inertia * state.theta_dot * state.theta_dot
        + 0.5 * gains.kp_x * (setpoint.x - state.x) * (setpoint.x - state.x)
        + 0.5 * gains.kp_pitch * (setpoint.theta - state.theta) * (setpoint.theta - state.theta)
}

/// Why a run stopped before its horizon.
#[derive(Debug, Clone)]
pub struct Abort {
    /// Time of the step that could not be completed [s]
    pub t: f64,
    pub reason: String,
}

/// Scalar digest of one run.
#[derive(Debug, Clone)]
pub struct ScenarioSummary {
    pub kind: ScenarioKind,
    pub steps: usize,
    pub dt: f64,
    /// Contact force at the first step [N]
    pub initial_force: f64,
    /// Settling time of the contact force into its 5% band [s]; infinite if
    /// it never settles
    pub settle_time_force: f64,
    /// Settling time of the pitch angle into its 5% band [s]
    pub settle_time_pitch: f64,
    /// Largest limited thrust over the run [N]
    pub peak_thrust: f64,
    /// Largest raw commanded thrust magnitude over the run [N]
    pub peak_raw_thrust: f64,
    /// Largest |pitch rate| over the run [rad/s]
    pub max_pitch_rate: f64,
    /// |F_H - F_des| at the final step [N]
    pub steady_force_error: f64,
    /// E(end) / E(0), zero when E(0) is zero
    pub final_energy_ratio: f64,
    pub mode_transitions: usize,
    pub aborted: bool,
}

/// Full outcome of a simulation scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub trace: SimulationTrace,
    pub summary: ScenarioSummary,
    pub abort: Option<Abort>,
}

/// Relative band of the settling-time computation.
pub const SETTLE_BAND: f64 = 0.05;

/// First time after which the signal stays inside the band around its
/// target; 0 if it never leaves, infinite if it is still outside at the end.
pub fn settling_time(rows: &[TraceRow], value: impl Fn(&TraceRow) -> f64, target: f64) -> f64 {
    let band = SETTLE_BAND * target.abs();
    let last_out = rows
        .iter()
        .rposition(|r| (value(r) - target).abs() > band);
    match last_out {
        None => 0.0,
        Some(i) if i + 1 == rows.len() => f64::INFINITY,
        Some(i) => rows[i + 1].t,
    }
}

/// Digest a finished trace.
pub fn summarize(
    trace: &SimulationTrace,
    kind: ScenarioKind,
    dt: f64,
    force_target: f64,
    pitch_target: f64,
    aborted: bool,
) -> ScenarioSummary {
    let rows = &trace.rows;
    let max_over = |f: &dyn Fn(&TraceRow) -> f64| rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let initial_force = rows.first().map_or(0.0, |r| r.f_h);
    let initial_energy = rows.first().map_or(0.0, |r| r.energy);
    let final_energy = rows.last().map_or(0.0, |r| r.energy);
    ScenarioSummary {
        kind,
        steps: rows.len(),
        dt,
        initial_force,
        settle_time_force: settling_time(rows, |r| r.f_h, force_target),
        settle_time_pitch: settling_time(rows, |r| r.theta, pitch_target),
        peak_thrust: max_over(&|r: &TraceRow| r.t1.max(r.t2)),
        peak_raw_thrust: max_over(&|r: &TraceRow| r.t1_raw.abs().max(r.t2_raw.abs())),
        max_pitch_rate: max_over(&|r: &TraceRow| r.theta_dot.abs()),
        steady_force_error: rows.last().map_or(f64::NAN, |r| (r.f_h - force_target).abs()),
        final_energy_ratio: if initial_energy > 0.0 {
            final_energy / initial_energy
        } else {
            0.0
        },
        mode_transitions: rows.windows(2).filter(|w| w[0].mode != w[1].mode).count(),
        aborted,
    }
}

pub fn summary_to_string(s: &ScenarioSummary) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    line("kind", s.kind.to_string());
    line("steps", s.steps.to_string());
    line("dt_s", s.dt.to_string());
    line("initial_force_n", s.initial_force.to_string());
    line("settle_time_force_s", s.settle_time_force.to_string());
    line("settle_time_pitch_s", s.settle_time_pitch.to_string());
    line("peak_thrust_n", s.peak_thrust.to_string());
    line("peak_raw_thrust_n", s.peak_raw_thrust.to_string());
    line("max_pitch_rate_rad_s", s.max_pitch_rate.to_string());
    line("steady_force_error_n", s.steady_force_error.to_string());
    line("final_energy_ratio", s.final_energy_ratio.to_string());
    line("mode_transitions", s.mode_transitions.to_string());
    line("aborted", s.aborted.to_string());
    out
}

pub fn write_summary(s: &ScenarioSummary, path: &std::path::Path) -> Result<(), OutputError> {
    std::fs::write(path, summary_to_string(s)).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Run a closed-loop scenario (contact regulation or full transition).
///
/// The statics and workspace kinds have no time-domain trace; use
/// [`statics_table`] and [`workspace_cloud`] for those.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, ConfigError> {
    cfg.validate_structure()?;
    let initial_mode = match cfg.kind {
        ScenarioKind::ContactRegulation => Mode::Contact,
        ScenarioKind::FullTransition => Mode::FreeFlight,
        other => {
            return Err(ConfigError::Invalid {
                field: "kind",
                message: format!("scenario kind {other} produces no simulation trace"),
            })
        }
    };
    let pitch_target =
        setpoint_from_force(cfg.targets.force, &cfg.vehicle).map_err(|e| ConfigError::Invalid {
            field: "targets.force",
            message: e.to_string(),
        })?;
    let target_setpoint = OutputSetpoint::hold(cfg.targets.x, pitch_target);

    let dt = cfg.dt;
    let steps = (cfg.horizon() / dt).round() as usize;
    let mut state = cfg.initial_state();
    let mut supervisor = Supervisor::new(initial_mode);
    let mut profiles: Option<(ReferenceProfile, ReferenceProfile)> = None;
    let mut prev: Option<ThrustCommand> = None;
    let mut trace = SimulationTrace::default();
    let mut abort: Option<Abort> = None;

    for k in 0..=steps {
        let t = k as f64 * dt;
        let f_h = contact_force(&state, &cfg.contact);
        let pose_ok = pose_ready(&state, &cfg.gate, &cfg.links, &cfg.joint_limits);
        let mode = supervisor.step(f_h, pose_ok, &cfg.schmitt);

        let mut singular_hold = false;
        let raw = match mode {
            Mode::FreeFlight => {
                profiles = None;
                free_flight_controller(&state, &cfg.approach, f_h, &cfg.vehicle)
            }
            Mode::Contact => {
                let (x_prof, pitch_prof) = profiles.get_or_insert_with(|| {
                    (
                        ReferenceProfile::new(
                            state.x,
                            state.x_dot,
                            cfg.shaping.x_rate,
                            cfg.shaping.x_accel,
                        ),
                        ReferenceProfile::new(
                            state.theta,
                            state.theta_dot,
                            cfg.shaping.pitch_rate,
                            cfg.shaping.pitch_accel,
                        ),
                    )
                });
                x_prof.advance(cfg.targets.x, dt);
                pitch_prof.advance(pitch_target, dt);
                let setpoint = OutputSetpoint {
                    x: x_prof.position(),
                    x_dot: x_prof.rate(),
                    x_ddot: x_prof.accel(),
                    theta: pitch_prof.position(),
                    theta_dot: pitch_prof.rate(),
                    theta_ddot: pitch_prof.accel(),
                };
                let v = outer_loop(&setpoint, &state, &cfg.gains);
                match feedback_linearize(
                    &v,
                    state.theta,
                    f_h,
                    &cfg.vehicle,
                    cfg.singularity_threshold,
                ) {
                    Ok(u) => u,
                    Err(_) => {
                        singular_hold = true;
                        prev.unwrap_or_else(ThrustCommand::zero)
                    }
                }
            }
        };

        let (allocated, envelope_hit) = allocate_pitch_priority(&raw, &cfg.limits);
        let reference = prev.unwrap_or(allocated);
        let (limited, limit_flags) = apply_limits(&allocated, &reference, dt, &cfg.limits);

        let derivative = match state_derivative(&state, &limited, &cfg.vehicle, &cfg.contact) {
            Ok(d) => d,
            Err(e) => {
                abort = Some(Abort {
                    t,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let f_h_obs = force_observer(state.theta, derivative[1], &cfg.vehicle)
            .expect("pitch validity checked by state_derivative");

        let mut flags = StepFlags::default();
        flags.set(
            StepFlags::THRUST_SATURATED,
            envelope_hit || limit_flags.magnitude(),
        );
        flags.set(StepFlags::SLEW_LIMITED, limit_flags.slew());
        flags.set(StepFlags::SINGULAR_HOLD, singular_hold);
        flags.set(
            StepFlags::RAW_OVER_LIMIT,
            raw.t1.max(raw.t2) > cfg.limits.t_max,
        );
        flags.set(
            StepFlags::PITCH_RATE_EXCEEDED,
            state.theta_dot.abs() > cfg.limits.pitch_rate_max,
        );
        flags.set(StepFlags::TRIGGER_ENGAGED, supervisor.engaged());
        flags.set(StepFlags::POSE_READY, pose_ok);

        trace.rows.push(TraceRow {
            t,
            x: state.x,
            x_dot: state.x_dot,
            theta: state.theta,
            theta_dot: state.theta_dot,
            t1_raw: raw.t1,
            t2_raw: raw.t2,
            t1: limited.t1,
            t2: limited.t2,
            f_h,
            f_h_obs,
            energy: energy(&state, &target_setpoint, &cfg.gains, &cfg.vehicle),
            mode,
            flags,
        });

        if k < steps {
            match rk4_step(&state, &limited, dt, &cfg.vehicle, &cfg.contact) {
                Ok(next) => state = next,
                Err(e) => {
                    abort = Some(Abort {
                        t: (k + 1) as f64 * dt,
                        reason: e.to_string(),
                    });
                    break;
                }
            }
        }
        prev = Some(limited);
    }

    let summary = summarize(
        &trace,
        cfg.kind,
        dt,
        cfg.targets.force,
        pitch_target,
        abort.is_some(),
    );
    Ok(ScenarioRun {
        trace,
        summary,
        abort,
    })
}

/// Equilibrium sweep described by the config's statics section.
pub fn statics_table(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>, ConfigError> {
    cfg.validate_structure()?;
    let mu = cfg.statics.friction.unwrap_or(cfg.contact.friction);
    let forces = force_range(cfg.statics.force_min, cfg.statics.force_max, cfg.statics.steps);
    Ok(thrust_sweep(
        &forces,
        mu,
        &cfg.vehicle,
        &cfg.contact,
        &cfg.limits,
    ))
}

/// Workspace point cloud described by the config's workspace section.
pub fn workspace_cloud(cfg: &ScenarioConfig) -> Result<Vec<WorkspacePoint>, ConfigError> {
    cfg.validate_structure()?;
    Ok(workspace_sample(
        &cfg.links,
        &cfg.joint_limits,
        cfg.workspace.resolution,
        cfg.workspace.orientation,
        cfg.workspace.orientation_tol,
    ))
}
