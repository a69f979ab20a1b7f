//! Run configuration: one TOML file per run, with command-line overrides.
//!
//! ```toml
//! [problem]
//! n = 3
//! lambda = -1.0
//!
//! [data]
//! density = "constant(1)"
//! velocity = "zero"
//!
//! [scan]
//! r_min = 1e-3
//! r_max = 1e3
//! points = 256
//!
//! [sim]
//! horizon = 20.0
//! fan_size = 50
//! slices = [5.0]
//!
//! [output]
//! dir = "out"
//! format = "json"
//! ```

use std::path::{Path, PathBuf};

use ep_threshold::characteristics::SimConfig;
use ep_threshold::pcfb::ScanConfig;
use ep_threshold::profiles::{InitialData, ProblemConfig};
use ep_threshold::spec::{build_initial_data, ProfileSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub n: u32,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Data {
    pub density: String,
    #[serde(default = "zero")]
    pub velocity: String,
}

fn zero() -> String {
    "zero".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scan {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub max_refinements: usize,
}

impl Default for Scan {
    fn default() -> Self {
        let s = ScanConfig::default();
        Self {
            r_min: s.r_min,
            r_max: s.r_max,
            points: s.points,
            max_refinements: s.max_refinements,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sim {
    pub horizon: f64,
    pub tolerance: f64,
    pub fan_size: usize,
    /// Times at which field slices are reconstructed.
    pub slices: Vec<f64>,
    /// Launch radii for the fan; defaults to the scan range.
    pub fan_r_min: Option<f64>,
    pub fan_r_max: Option<f64>,
}

impl Default for Sim {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            tolerance: 1e-10,
            fan_size: 50,
            slices: Vec::new(),
            fan_r_min: None,
            fan_r_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    /// Write one CSV per trajectory in `simulate`.
    pub trajectories: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Json,
            trajectories: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub data: Data,
    #[serde(default)]
    pub scan: Scan,
    #[serde(default)]
    pub sim: Sim,
    #[serde(default)]
    pub output: Output,
    /// Directory against which relative paths resolve. Not part of the file.
    #[serde(skip)]
    pub base: PathBuf,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<u32>,
    pub lambda: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub points: Option<usize>,
    pub horizon: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    /// Parse and validate a configuration. Profile specs are parsed but table
    /// files are not read.
    pub fn from_toml_str(text: &str, base: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base = base.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(n) = o.n {
            self.problem.n = n;
        }
        if let Some(l) = o.lambda {
            self.problem.lambda = l;
        }
        if let Some(v) = o.r_min {
            self.scan.r_min = v;
        }
        if let Some(v) = o.r_max {
            self.scan.r_max = v;
        }
        if let Some(v) = o.points {
            self.scan.points = v;
        }
        if let Some(v) = o.horizon {
            self.sim.horizon = v;
        }
        if let Some(v) = o.tol {
            self.sim.tolerance = v;
        }
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
        if let Some(v) = o.format {
            self.output.format = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> CliResult<()> {
        self.problem_config()?;
        self.scan_config().validate()?;
        self.sim_config().validate()?;
        self.density_spec()?;
        self.velocity_spec()?;
        if self.sim.fan_size == 0 {
            return Err(CliError::Config("sim.fan_size must be positive".into()));
        }
        let (lo, hi) = self.fan_range();
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(CliError::Config(format!("fan range must satisfy 0 < min <= max, got [{lo}, {hi}]")));
        }
        if let Some(t) = self.sim.slices.iter().find(|t| !(**t >= 0.0 && **t <= self.sim.horizon)) {
            return Err(CliError::Config(format!("slice time {t} outside [0, horizon]")));
        }
        Ok(())
    }

    pub fn problem_config(&self) -> CliResult<ProblemConfig> {
        Ok(ProblemConfig::new(self.problem.n, self.problem.lambda)?)
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            r_min: self.scan.r_min,
            r_max: self.scan.r_max,
            points: self.scan.points,
            max_refinements: self.scan.max_refinements,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            horizon: self.sim.horizon,
            rtol: self.sim.tolerance,
            atol: 1e-2 * self.sim.tolerance,
            outputs: self.sim.slices.clone(),
            ..SimConfig::default()
        }
    }

    pub fn density_spec(&self) -> CliResult<ProfileSpec> {
        Ok(self.data.density.parse()?)
    }

    pub fn velocity_spec(&self) -> CliResult<ProfileSpec> {
        Ok(self.data.velocity.parse()?)
    }

    pub fn initial_data(&self) -> CliResult<InitialData> {
        Ok(build_initial_data(&self.density_spec()?, &self.velocity_spec()?, self.problem_config()?, &self.base)?)
    }

    pub fn fan_range(&self) -> (f64, f64) {
        (self.sim.fan_r_min.unwrap_or(self.scan.r_min), self.sim.fan_r_max.unwrap_or(self.scan.r_max))
    }

    /// Log-spaced launch radii.
    pub fn fan_radii(&self) -> Vec<f64> {
        let (lo, hi) = self.fan_range();
        let m = self.sim.fan_size;
        if m == 1 || lo == hi {
            return vec![lo; 1];
        }
        (0..m)
            .map(|i| match i {
                0 => lo,
                i if i == m - 1 => hi,
                i => (lo.ln() + (hi / lo).ln() * i as f64 / (m - 1) as f64).exp(),
            })
            .collect()
    }
}
