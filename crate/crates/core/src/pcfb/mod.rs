//! Pointwise breakdown conditions and the radius scan.
//!
//! Every evaluator returns a [`Verdict`] whose `margin` is the normalized slack
//! `(lhs - rhs) / scale` of the decisive comparison: negative means the
//! breakdown inequality holds, positive means it fails. Comparisons whose
//! normalized slack is within [`SNAP`] are treated as exact equalities and
//! resolved by the strictness of the inequality; the remaining band
//! `|margin| < TAU` is reported as marginal.

mod attractive;
mod classify;
mod closed_4d;
pub mod integrals;
mod one_d;
mod repulsive_nd;
mod two_d;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{InitialData, ProblemConfig};
use crate::quantities::{threshold_quantities, ThresholdQuantities};

pub use attractive::pcfb_attractive;
pub use classify::{classify, classify_with, Classification, Overall, ScanConfig};
pub use closed_4d::pcfb_4d_closed;
pub use one_d::pcfb_1d;
pub use repulsive_nd::pcfb_nd_repulsive;
pub use two_d::pcfb_2d_repulsive;

/// Width of the marginal band on normalized margins.
pub const TAU: f64 = 1e-8;
/// Absolute band around `v0 = 0` for the sign dispatch.
pub const TAU_V: f64 = 1e-10;
/// Normalized slack below which a comparison counts as an exact equality.
pub const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Breakdown,
    NoBreakdown,
    Marginal,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Breakdown => "breakdown",
            Status::NoBreakdown => "no-breakdown",
            Status::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub r: f64,
    pub status: Status,
    pub condition_id: &'static str,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(r: f64, status: Status, condition_id: &'static str, margin: f64) -> Self {
        Self {
            r,
            status,
            condition_id,
            margin,
            note: None,
        }
    }

    pub fn breakdown(r: f64, condition_id: &'static str, margin: f64) -> Self {
        Self::new(r, Status::Breakdown, condition_id, margin)
    }

    pub fn safe(r: f64, condition_id: &'static str, margin: f64) -> Self {
        Self::new(r, Status::NoBreakdown, condition_id, margin)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn failed(r: f64, condition_id: &'static str, err: &Error) -> Self {
        Self::new(r, Status::Marginal, condition_id, 0.0).with_note(format!("evaluation failed: {err}"))
    }
}

/// Every condition identifier that an evaluator can emit.
pub const CONDITION_IDS: &[&str] = &[
    "1D.velocity",
    "1D.slope",
    "1D.none",
    "attractive.n12.density",
    "attractive.n12.vneg",
    "attractive.n12.slope",
    "attractive.n12.none",
    "attractive.n3.vneg",
    "attractive.n3.Cneg",
    "attractive.n3.dCneg",
    "attractive.n3.none",
    "3D.repulsive.vpos.case1",
    "3D.repulsive.vpos.case2",
    "3D.repulsive.vpos.case3",
    "3D.repulsive.vpos.none",
    "3D.repulsive.v0.vacuum",
    "3D.repulsive.v0.case1",
    "3D.repulsive.v0.case2a",
    "3D.repulsive.v0.case2b",
    "3D.repulsive.v0.case2c",
    "3D.repulsive.v0.case3a",
    "3D.repulsive.v0.case3b",
    "3D.repulsive.v0.case3c",
    "3D.repulsive.v0.none",
    "3D.repulsive.vneg.vacuum",
    "3D.repulsive.vneg.case1",
    "3D.repulsive.vneg.case2",
    "3D.repulsive.vneg.case3",
    "3D.repulsive.vneg.case4",
    "3D.repulsive.vneg.case5",
    "3D.repulsive.vneg.none",
    "4D.closed.case1",
    "4D.closed.case2",
    "4D.closed.case3",
    "4D.closed.case4",
    "4D.closed.none",
    "2D.repulsive.vpos.gate",
    "2D.repulsive.vpos.case1",
    "2D.repulsive.vpos.case2",
    "2D.repulsive.vpos.none",
    "2D.repulsive.v0.vacuum",
    "2D.repulsive.v0.case1",
    "2D.repulsive.v0.case2",
    "2D.repulsive.v0.none",
    "2D.repulsive.vneg.vacuum",
    "2D.repulsive.vneg.case1",
    "2D.repulsive.vneg.case2a",
    "2D.repulsive.vneg.case2b",
    "2D.repulsive.vneg.case2c",
    "2D.repulsive.vneg.none",
];

/// Evaluate the condition appropriate for `cfg` at radius `r`.
pub fn pcfb(data: &InitialData, cfg: ProblemConfig, r: f64) -> Verdict {
    match threshold_quantities(data, cfg, r) {
        Ok(q) => pcfb_at(&q),
        Err(e) => Verdict::failed(r, "quantities", &e),
    }
}

/// Dispatch on dimension and coupling sign.
pub fn pcfb_at(q: &ThresholdQuantities) -> Verdict {
    if q.lambda > 0.0 {
        pcfb_attractive(q)
    } else {
        match q.n {
            1 => pcfb_1d(q),
            2 => pcfb_2d_repulsive(q),
            _ => pcfb_nd_repulsive(q),
        }
    }
}

/// Convenience wrapper taking raw data for the `n >= 3` repulsive evaluator.
pub fn pcfb_3d_repulsive(data: &InitialData, cfg: ProblemConfig, r: f64) -> Result<Verdict> {
    check(cfg, |c| c.n >= 3 && c.lambda < 0.0, "n >= 3 and lambda < 0")?;
    Ok(pcfb_nd_repulsive(&threshold_quantities(data, cfg, r)?))
}

fn check(cfg: ProblemConfig, ok: impl Fn(&ProblemConfig) -> bool, what: &str) -> Result<()> {
    if ok(&cfg) {
        Ok(())
    } else {
        Err(Error::Config(format!("evaluator requires {what}, got n = {}, lambda = {}", cfg.n, cfg.lambda)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rel {
    Lt,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Holds,
    Fails,
    Marginal,
}

/// Breakdown inequality `lhs (< | <=) rhs` with a magnitude for normalization.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cmp {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
    pub rel: Rel,
}

impl Cmp {
    pub fn new(lhs: f64, rhs: f64, scale: f64, rel: Rel) -> Self {
        Self { lhs, rhs, scale, rel }
    }

    /// Scale taken from the two sides.
    pub fn sides(lhs: f64, rhs: f64, rel: Rel) -> Self {
        Self::new(lhs, rhs, lhs.abs().max(rhs.abs()), rel)
    }

    pub fn margin(&self) -> f64 {
        let m = (self.lhs - self.rhs) / self.scale.max(f64::MIN_POSITIVE);
        if m.is_nan() {
            0.0
        } else {
            m
        }
    }

    pub fn outcome(&self) -> Outcome {
        outcome(self.margin(), self.rel)
    }

    pub fn verdict(&self, r: f64, hit: &'static str, miss: &'static str) -> Verdict {
        let m = self.margin();
        match outcome(m, self.rel) {
            Outcome::Holds => Verdict::breakdown(r, hit, m),
            Outcome::Fails => Verdict::safe(r, miss, m),
            Outcome::Marginal => Verdict::new(r, Status::Marginal, hit, m),
        }
    }
}

pub(crate) fn outcome(m: f64, rel: Rel) -> Outcome {
    if m.abs() <= SNAP {
        match rel {
            Rel::Le => Outcome::Holds,
            Rel::Lt => Outcome::Fails,
        }
    } else if m.abs() < TAU {
        Outcome::Marginal
    } else if m < 0.0 {
        Outcome::Holds
    } else {
        Outcome::Fails
    }
}

/// OR of several sufficient conditions evaluated at one radius.
pub(crate) fn any_of(r: f64, conds: &[(Cmp, &'static str)], none: &'static str) -> Verdict {
    let mut marginal: Option<Verdict> = None;
    let mut min_margin = f64::INFINITY;
    for (cmp, id) in conds {
        let m = cmp.margin();
        match cmp.outcome() {
            Outcome::Holds => return Verdict::breakdown(r, id, m),
            Outcome::Marginal => {
                if marginal.is_none() {
                    marginal = Some(Verdict::new(r, Status::Marginal, id, m));
                }
            }
            Outcome::Fails => {}
        }
        min_margin = min_margin.min(m);
    }
    marginal.unwrap_or_else(|| Verdict::safe(r, none, min_margin))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Neg,
    Zero,
    Pos,
}

/// Combine the verdicts of two branches that a selector cannot separate.
pub(crate) fn merge(a: Verdict, b: Verdict, selector_margin: f64) -> Verdict {
    if a.status == b.status {
        return if a.margin.abs() <= b.margin.abs() { a } else { b };
    }
    Verdict {
        r: a.r,
        status: Status::Marginal,
        condition_id: a.condition_id,
        margin: selector_margin,
        note: Some(format!("neighbouring branches disagree: {} ({}) vs {} ({})", a.condition_id, a.status, b.condition_id, b.status)),
    }
}

/// Three-way split on the sign of `x`, evaluating both neighbours inside the
/// marginal band.
pub(crate) fn split3(x: f64, scale: f64, f: impl Fn(Side) -> Verdict) -> Verdict {
    let m = x / scale.max(f64::MIN_POSITIVE);
    let side = if m < 0.0 { Side::Neg } else { Side::Pos };
    if m.abs() <= SNAP || m.is_nan() {
        f(Side::Zero)
    } else if m.abs() < TAU {
        merge(f(side), f(Side::Zero), m)
    } else {
        f(side)
    }
}

/// Two-way split on `lhs (rel) rhs`; `f(true)` is the branch where it holds.
pub(crate) fn split2(cmp: Cmp, f: impl Fn(bool) -> Verdict) -> Verdict {
    let m = cmp.margin();
    match outcome(m, cmp.rel) {
        Outcome::Holds => f(true),
        Outcome::Fails => f(false),
        Outcome::Marginal => merge(f(m < 0.0), f(m >= 0.0), m),
    }
}

/// Sign dispatch on `v0` with the `TAU_V` cross-branch check.
pub(crate) fn dispatch_v0(q: &ThresholdQuantities, f: impl Fn(&ThresholdQuantities, Side) -> Verdict) -> Verdict {
    let v = q.v0;
    if v == 0.0 {
        return f(q, Side::Zero);
    }
    let side = if v > 0.0 { Side::Pos } else { Side::Neg };
    if v.abs() >= TAU_V {
        return f(q, side);
    }
    let zero = f(&q.with_v0(0.0), Side::Zero);
    let near = f(&q.with_v0(TAU_V.copysign(v)), side);
    merge(zero, near, v / TAU_V)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_uses_strictness() {
        assert_eq!(outcome(0.0, Rel::Le), Outcome::Holds);
        assert_eq!(outcome(0.0, Rel::Lt), Outcome::Fails);
        assert_eq!(outcome(1e-10, Rel::Le), Outcome::Marginal);
        assert_eq!(outcome(-1e-6, Rel::Lt), Outcome::Holds);
        assert_eq!(outcome(1e-6, Rel::Le), Outcome::Fails);
    }

    #[test]
    fn zero_scale_is_equality() {
        let c = Cmp::sides(0.0, 0.0, Rel::Lt);
        assert_eq!(c.margin(), 0.0);
        assert_eq!(c.outcome(), Outcome::Fails);
    }

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<&str> = CONDITION_IDS.to_vec();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), CONDITION_IDS.len());
    }

    #[test]
    fn merge_flags_disagreement() {
        let a = Verdict::breakdown(1.0, "x", -1.0);
        let b = Verdict::safe(1.0, "y", 1.0);
        assert_eq!(merge(a.clone(), b, 1e-9).status, Status::Marginal);
        assert_eq!(merge(a.clone(), a, 1e-9).status, Status::Breakdown);
    }
}
