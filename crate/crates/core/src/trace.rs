//! Simulation trace records and plot-ready CSV emission.
//!
//! Floating-point columns are printed with nine significant digits in
//! scientific notation, which round-trips: writing, re-reading and writing
//! again reproduces the file byte for byte.

use std::path::{Path, PathBuf};

use crate::statics::SweepRow;
use crate::transition::Mode;

/// Per-step monitor and limiter flags, packed into a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepFlags(pub u16);

impl StepFlags {
    /// A thrust command was clamped to the magnitude envelope.
    pub const THRUST_SATURATED: u16 = 1 << 0;
    /// A thrust command was slew-rate limited.
    pub const SLEW_LIMITED: u16 = 1 << 1;
    /// The contact law hit the singularity guard and held its output.
    pub const SINGULAR_HOLD: u16 = 1 << 2;
    /// The raw commanded thrust exceeded the thrust limit.
    pub const RAW_OVER_LIMIT: u16 = 1 << 3;
    /// |pitch rate| exceeded the pitch-rate limit.
    pub const PITCH_RATE_EXCEEDED: u16 = 1 << 4;
    /// Force trigger engaged.
    pub const TRIGGER_ENGAGED: u16 = 1 << 5;
    /// Pose gate satisfied.
    pub const POSE_READY: u16 = 1 << 6;

    pub fn set(&mut self, bit: u16, on: bool) {
        if on {
            self.0 |= bit;
        }
    }

    pub fn contains(&self, bit: u16) -> bool {
        self.0 & bit != 0
    }
}

/// One row of the simulation trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    /// Raw controller command before allocation and limiting [N]
    pub t1_raw: f64,
    pub t2_raw: f64,
    /// Limited command applied to the plant [N]
    pub t1: f64,
    pub t2: f64,
    /// Contact force from the plant (sensor signal) [N]
    pub f_h: f64,
    /// Contact force estimated from pitch and achieved acceleration [N]
    pub f_h_obs: f64,
    /// Energy against the regulation targets [J]
    pub energy: f64,
    pub mode: Mode,
    pub flags: StepFlags,
}

/// Time-indexed record of one simulation run.
#[derive(Debug, Clone, Default)]
pub struct SimulationTrace {
    pub rows: Vec<TraceRow>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub const TRACE_HEADER: &str = "t,x,x_dot,theta,theta_dot,T1_raw,T2_raw,T1,T2,F_H,F_H_obs,E,mode,flags";

/// Nine significant digits, scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trace parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn trace_to_csv(trace: &SimulationTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 160 + 80);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.rows {
        let floats = [
            r.t, r.x, r.x_dot, r.theta, r.theta_dot, r.t1_raw, r.t2_raw, r.t1, r.t2, r.f_h,
            r.f_h_obs, r.energy,
        ];
        for v in floats {
            out.push_str(&format_float(v));
            out.push(',');
        }
        out.push_str(&r.mode.to_string());
        out.push(',');
        out.push_str(&r.flags.0.to_string());
        out.push('\n');
    }
    out
}

/// Parse a trace CSV produced by `trace_to_csv`.
pub fn parse_trace(text: &str) -> Result<SimulationTrace, OutputError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        Some((_, other)) => {
            return Err(OutputError::Parse {
                line: 1,
                message: format!("unexpected header `{other}`"),
            })
        }
        None => {
            return Err(OutputError::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(OutputError::Parse {
                line: line_no,
                message: format!("expected 14 fields, got {}", fields.len()),
            });
        }
        let mut f = [0.0f64; 12];
        for (i, v) in f.iter_mut().enumerate() {
            *v = fields[i].parse().map_err(|e| OutputError::Parse {
                line: line_no,
                message: format!("field {i}: {e}"),
            })?;
        }
        let mode = match fields[12] {
            "free_flight" => Mode::FreeFlight,
            "contact" => Mode::Contact,
            other => {
                return Err(OutputError::Parse {
                    line: line_no,
                    message: format!("unknown mode `{other}`"),
                })
            }
        };
        let flags = StepFlags(fields[13].parse().map_err(|e| OutputError::Parse {
            line: line_no,
            message: format!("flags: {e}"),
        })?);
        rows.push(TraceRow {
            t: f[0],
            x: f[1],
            x_dot: f[2],
            theta: f[3],
            theta_dot: f[4],
            t1_raw: f[5],
            t2_raw: f[6],
            t1: f[7],
            t2: f[8],
            f_h: f[9],
            f_h_obs: f[10],
            energy: f[11],
            mode,
            flags,
        });
    }
    Ok(SimulationTrace { rows })
}

fn write_file(path: &Path, content: &str) -> Result<(), OutputError> {
    std::fs::write(path, content).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_trace(trace: &SimulationTrace, path: &Path) -> Result<(), OutputError> {
    write_file(path, &trace_to_csv(trace))
}

pub const STATICS_HEADER: &str = "F_H,theta,T1,T2,T_total,feasible";

pub fn statics_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 80 + 40);
    out.push_str(STATICS_HEADER);
    out.push('\n');
    for r in rows {
        for v in [r.f_h, r.theta, r.t1, r.t2, r.total] {
            out.push_str(&format_float(v));
            out.push(',');
        }
        out.push_str(if r.feasible { "1" } else { "0" });
        out.push('\n');
    }
    out
}

pub fn write_statics(rows: &[SweepRow], path: &Path) -> Result<(), OutputError> {
    write_file(path, &statics_to_csv(rows))
}

pub const WORKSPACE_HEADER: &str = "x,y,z,reachable,application";

pub fn workspace_to_csv(points: &[crate::kinematics::WorkspacePoint]) -> String {
    let mut out = String::with_capacity(points.len() * 50 + 30);
    out.push_str(WORKSPACE_HEADER);
    out.push('\n');
    for p in points {
        for v in [p.position.x, p.position.y, p.position.z] {
            out.push_str(&format_float(v));
            out.push(',');
        }
        out.push_str(if p.reachable { "1," } else { "0," });
        out.push_str(if p.application { "1" } else { "0" });
        out.push('\n');
    }
    out
}

pub fn write_workspace(
    points: &[crate::kinematics::WorkspacePoint],
    path: &Path,
) -> Result<(), OutputError> {
    write_file(path, &workspace_to_csv(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(t: f64) -> TraceRow {
        TraceRow {
            t,
            x: -0.1 + t,
            x_dot: 0.33333333333,
            theta: 0.1,
            theta_dot: 1.0,
            t1_raw: 25.5,
            t2_raw: -3.25,
            t1: 21.0,
            t2: 0.0,
            f_h: 2.5,
            f_h_obs: 2.684,
            energy: 0.98,
            mode: Mode::Contact,
            flags: StepFlags(StepFlags::THRUST_SATURATED | StepFlags::TRIGGER_ENGAGED),
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let csv = trace_to_csv(&SimulationTrace::default());
        assert_eq!(csv, format!("{TRACE_HEADER}\n"));
    }

    #[test]
    fn column_count_constant() {
        let trace = SimulationTrace {
            rows: (0..50).map(|k| sample_row(k as f64 * 1e-3)).collect(),
        };
        let csv = trace_to_csv(&trace);
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), 14);
        }
    }

    #[test]
    fn csv_round_trip_is_bitwise_stable() {
        let trace = SimulationTrace {
            rows: (0..200)
                .map(|k| {
                    let mut r = sample_row(k as f64 * 1e-3);
                    // exercise awkward magnitudes
                    r.x = 1.23456789e-7 * (k as f64 - 100.0);
                    r.energy = 9.876543210987e3 / (k as f64 + 1.0);
                    r
                })
                .collect(),
        };
        let first = trace_to_csv(&trace);
        let reparsed = parse_trace(&first).unwrap();
        let second = trace_to_csv(&reparsed);
        assert_eq!(first, second);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(parse_trace("nonsense\n").is_err());
        let missing = format!("{TRACE_HEADER}\n1.0,2.0\n");
        assert!(matches!(
            parse_trace(&missing),
            Err(OutputError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn flag_bits() {
        let mut flags = StepFlags::default();
        assert!(!flags.contains(StepFlags::SLEW_LIMITED));
        flags.set(StepFlags::SLEW_LIMITED, true);
        flags.set(StepFlags::POSE_READY, true);
        assert!(flags.contains(StepFlags::SLEW_LIMITED));
        assert!(flags.contains(StepFlags::POSE_READY));
        assert!(!flags.contains(StepFlags::SINGULAR_HOLD));
    }
}
