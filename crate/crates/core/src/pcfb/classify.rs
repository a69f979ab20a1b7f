use rayon::prelude::*;
use serde::Serialize;

use super::{pcfb, Status, Verdict};
use crate::error::{Error, Result};
use crate::profiles::{InitialData, ProblemConfig};

/// Log-spaced radius grid with bisection refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub max_refinements: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 1e3,
            points: 64,
            max_refinements: 8,
        }
    }
}

impl ScanConfig {
    pub const MIN_POINTS: usize = 16;

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min.is_finite() && self.r_max.is_finite() && self.r_min < self.r_max) {
            return Err(Error::Config(format!("scan range must satisfy 0 < r_min < r_max, got [{}, {}]", self.r_min, self.r_max)));
        }
        if self.points < Self::MIN_POINTS {
            return Err(Error::Config(format!("scan needs at least {} points, got {}", Self::MIN_POINTS, self.points)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.r_min.ln(), self.r_max.ln());
        let last = self.points - 1;
        (0..self.points)
            .map(|i| match i {
                0 => self.r_min,
                i if i == last => self.r_max,
                i => (lo + (hi - lo) * i as f64 / last as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    Global,
    Breakdown,
    Inconclusive,
}

impl Overall {
    pub fn describe(&self) -> &'static str {
        match self {
            Overall::Global => "no breakdown condition found on scanned radii",
            Overall::Breakdown => "finite-time breakdown",
            Overall::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub overall: Overall,
    /// Smallest scanned radius with a breakdown verdict.
    pub witness: Option<Verdict>,
    /// All evaluated radii in increasing order.
    pub verdicts: Vec<Verdict>,
    pub refinements: usize,
    /// Verdicts at `r_min / 10` and `10 r_max`. They do not enter `overall`.
    pub probes: [Verdict; 2],
}

impl Classification {
    /// True when the probes agree with the nearest scanned endpoint.
    pub fn endpoints_stable(&self) -> bool {
        let first = self.verdicts.first().map(|v| v.status);
        let last = self.verdicts.last().map(|v| v.status);
        first == Some(self.probes[0].status) && last == Some(self.probes[1].status)
    }
}

pub fn classify(data: &InitialData, cfg: ProblemConfig, scan: &ScanConfig) -> Result<Classification> {
    cfg.validate()?;
    classify_with(|r| pcfb(data, cfg, r), scan)
}

/// Scan with an arbitrary pointwise evaluator.
pub fn classify_with<F>(eval: F, scan: &ScanConfig) -> Result<Classification>
where
    F: Fn(f64) -> Verdict + Sync,
{
    scan.validate()?;
    let mut verdicts: Vec<Verdict> = scan.grid().par_iter().map(|&r| eval(r)).collect();
    let mut refinements = 0;
    for _ in 0..scan.max_refinements {
        let fresh: Vec<f64> = verdicts
            .windows(2)
            .filter(|w| w[0].status != w[1].status || w[0].status == Status::Marginal || w[1].status == Status::Marginal)
            .filter(|w| w[1].r / w[0].r > 1.0 + 1e-12)
            .map(|w| (w[0].r * w[1].r).sqrt())
            .collect();
        if fresh.is_empty() {
            break;
        }
        refinements += 1;
        verdicts.extend(fresh.par_iter().map(|&r| eval(r)).collect::<Vec<_>>());
        verdicts.sort_by(|a, b| a.r.total_cmp(&b.r));
    }

    let witness = verdicts.iter().find(|v| v.status == Status::Breakdown).cloned();
    let overall = if witness.is_some() {
        Overall::Breakdown
    } else if verdicts.iter().any(|v| v.status == Status::Marginal) {
        Overall::Inconclusive
    } else {
        Overall::Global
    };
    let probes = [eval(scan.r_min / 10.0), eval(scan.r_max * 10.0)];
    Ok(Classification {
        overall,
        witness,
        verdicts,
        refinements,
        probes,
    })
}
