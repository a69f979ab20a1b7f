//! Machine-readable run report and CSV writers.
//!
//! The report carries no timestamps or host data so that identical inputs
//! produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ep_threshold::characteristics::{CharTrajectory, Event, FieldSlice};
use ep_threshold::pcfb::{Classification, Verdict, SNAP, TAU, TAU_V};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub tau: f64,
    pub tau_v: f64,
    pub snap: f64,
    pub rtol: f64,
}

impl Provenance {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: "epct",
            version: env!("CARGO_PKG_VERSION"),
            tau: TAU,
            tau_v: TAU_V,
            snap: SNAP,
            rtol: cfg.sim.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub overall: ep_threshold::pcfb::Overall,
    pub summary: &'static str,
    pub endpoints_stable: bool,
    #[serde(flatten)]
    pub detail: Classification,
}

impl From<Classification> for ClassificationReport {
    fn from(c: Classification) -> Self {
        Self {
            overall: c.overall,
            summary: c.overall.describe(),
            endpoints_stable: c.endpoints_stable(),
            detail: c,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub r: f64,
    pub t_end: f64,
    pub samples: usize,
    pub min_gamma: f64,
    pub max_energy_residual: f64,
    pub event: Option<Event>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrajectorySummary {
    pub fn new(tr: &CharTrajectory) -> Self {
        Self {
            r: tr.r(),
            t_end: tr.last().t,
            samples: tr.samples.len(),
            min_gamma: tr.min_gamma(),
            max_energy_residual: tr.max_energy_residual(),
            event: tr.event,
            error: None,
        }
    }

    pub fn failed(r: f64, err: String) -> Self {
        Self {
            r,
            t_end: 0.0,
            samples: 0,
            min_gamma: f64::NAN,
            max_energy_residual: f64::NAN,
            event: None,
            error: Some(err),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceSummary {
    pub t: f64,
    pub points: usize,
    pub mass: f64,
    pub expected_mass: f64,
    pub mass_relative_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub horizon: f64,
    pub fan: Vec<TrajectorySummary>,
    /// Launch radius and event with the smallest event time.
    pub earliest_event: Option<(f64, Event)>,
    pub min_gamma: f64,
    pub max_energy_residual: f64,
    pub slices: Vec<SliceSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Contradiction {
    pub r: f64,
    pub kind: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CrossValidation {
    pub radii: usize,
    pub agree: usize,
    pub consistent_beyond_horizon: usize,
    pub marginal: usize,
    pub simulation_failures: usize,
    pub closed_form_compared: usize,
    pub closed_form_max_x_error: f64,
    pub contradictions: Vec<Contradiction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub exit_code: i32,
    pub provenance: Provenance,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CrossValidation>,
}

impl Report {
    pub fn new(command: &'static str, cfg: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            exit_code: 0,
            provenance: Provenance::new(cfg),
            config: cfg.clone(),
            classification: None,
            simulation: None,
            cross_validation: None,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Shortest round-trip decimal form, used in file names and CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn verdicts_csv(verdicts: &[Verdict]) -> String {
    let mut s = String::from("r,status,condition_id,margin\n");
    for v in verdicts {
        let _ = writeln!(s, "{},{},{},{}", num(v.r), v.status, v.condition_id, num(v.margin));
    }
    s
}

pub fn trajectory_csv(tr: &CharTrajectory) -> String {
    let mut s = String::from("t,X,Xp,Gamma,Gammap\n");
    for p in &tr.samples {
        let _ = writeln!(s, "{},{},{},{},{}", num(p.t), num(p.x), num(p.xp), num(p.gamma), num(p.gammap));
    }
    s
}

pub fn slice_csv(slice: &FieldSlice) -> String {
    let mut s = String::from("r,rho,v\n");
    for p in &slice.points {
        let _ = writeln!(s, "{},{},{}", num(p.r), num(p.rho), num(p.v));
    }
    s
}

pub fn write(dir: &Path, name: &str, content: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    Ok(path)
}
