//! The three subcommands. Each returns an [`Outcome`] whose report carries
//! the process exit code; writing files is a separate step.
//!
//! Exit codes: 0 clean, 1 error, 2 breakdown found, 3 inconclusive,
//! 4 cross-validation contradiction.

use ep_threshold::characteristics::{closed_form_1d, closed_form_4d, detect_breakdown, reconstruct, simulate, CharTrajectory, Event, FieldSlice};
use ep_threshold::pcfb::{classify_with, pcfb, pcfb_4d_closed, Classification, Overall, Status, Verdict};
use ep_threshold::profiles::{InitialData, ProblemConfig};
use ep_threshold::quantities::threshold_quantities;
use rayon::prelude::*;

use crate::config::{Format, RunConfig};
use crate::error::CliResult;
use crate::report::{self, ClassificationReport, Contradiction, CrossValidation, Report, SimulationReport, SliceSummary, TrajectorySummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BREAKDOWN: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_CONTRADICTION: i32 = 4;

/// Margins smaller than this are too close to the threshold for a simulation
/// over a finite horizon to contradict.
pub const VALIDATE_BAND: f64 = 1e-6;

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub fan: Vec<CharTrajectory>,
    pub slices: Vec<FieldSlice>,
}

impl Outcome {
    pub fn code(&self) -> i32 {
        self.report.exit_code
    }

    /// One line for the terminal.
    pub fn summary(&self) -> String {
        let r = &self.report;
        if let Some(x) = &r.cross_validation {
            return format!(
                "validate: {} radii, {} agree, {} beyond horizon, {} marginal, {} contradictions",
                x.radii,
                x.agree,
                x.consistent_beyond_horizon,
                x.marginal,
                x.contradictions.len()
            );
        }
        if let Some(c) = &r.classification {
            return match &c.detail.witness {
                Some(w) => format!("breakdown: R = {} ({}, margin {:e})", w.r, w.condition_id, w.margin),
                None => format!("{}: {}", status_word(c.overall), c.summary),
            };
        }
        if let Some(s) = &r.simulation {
            return match &s.earliest_event {
                Some((r0, e)) => format!("event: {} at t = {} from R = {r0}", kind_word(e), e.t_c),
                None => format!("no event before t = {}; min Gamma = {}", s.horizon, s.min_gamma),
            };
        }
        String::new()
    }
}

fn status_word(o: Overall) -> &'static str {
    match o {
        Overall::Global => "global",
        Overall::Breakdown => "breakdown",
        Overall::Inconclusive => "inconclusive",
    }
}

fn kind_word(e: &Event) -> &'static str {
    match e.kind {
        ep_threshold::characteristics::EventKind::GammaZero => "Gamma-zero",
        ep_threshold::characteristics::EventKind::XZero => "X-zero",
    }
}

fn overall_code(o: Overall) -> i32 {
    match o {
        Overall::Global => EXIT_OK,
        Overall::Breakdown => EXIT_BREAKDOWN,
        Overall::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn classify(cfg: &RunConfig) -> CliResult<Outcome> {
    let data = cfg.initial_data()?;
    let pc = cfg.problem_config()?;
    let c = classify_with(|r| pcfb(&data, pc, r), &cfg.scan_config())?;
    let mut report = Report::new("classify", cfg);
    report.exit_code = overall_code(c.overall);
    report.classification = Some(c.into());
    Ok(Outcome {
        report,
        fan: Vec::new(),
        slices: Vec::new(),
    })
}

struct Fan {
    trajectories: Vec<CharTrajectory>,
    summaries: Vec<TrajectorySummary>,
    failures: usize,
}

fn run_fan(cfg: &RunConfig, data: &InitialData, pc: ProblemConfig) -> Fan {
    let sim = cfg.sim_config();
    let results: Vec<_> = cfg.fan_radii().par_iter().map(|&r| (r, simulate(data, pc.n, pc.lambda, r, &sim))).collect();
    let mut fan = Fan {
        trajectories: Vec::new(),
        summaries: Vec::new(),
        failures: 0,
    };
    for (r, res) in results {
        match res {
            Ok(tr) => {
                fan.summaries.push(TrajectorySummary::new(&tr));
                fan.trajectories.push(tr);
            }
            Err(e) => {
                fan.failures += 1;
                fan.summaries.push(TrajectorySummary::failed(r, e.to_string()));
            }
        }
    }
    fan
}

pub fn simulate_cmd(cfg: &RunConfig) -> CliResult<Outcome> {
    let data = cfg.initial_data()?;
    let pc = cfg.problem_config()?;
    let fan = run_fan(cfg, &data, pc);

    let earliest = fan
        .trajectories
        .iter()
        .filter_map(|t| detect_breakdown(t).map(|e| (t.r(), e)))
        .min_by(|a, b| a.1.t_c.total_cmp(&b.1.t_c));
    let mut slices = Vec::new();
    let mut slice_rows = Vec::new();
    for &t in &cfg.sim.slices {
        match reconstruct(&fan.trajectories, t) {
            Ok(s) => {
                slice_rows.push(SliceSummary {
                    t,
                    points: s.points.len(),
                    mass: s.mass,
                    expected_mass: s.expected_mass,
                    mass_relative_error: s.mass_relative_error(),
                    error: None,
                });
                slices.push(s);
            }
            Err(e) => slice_rows.push(SliceSummary {
                t,
                points: 0,
                mass: f64::NAN,
                expected_mass: f64::NAN,
                mass_relative_error: f64::NAN,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut report = Report::new("simulate", cfg);
    report.exit_code = if earliest.is_some() {
        EXIT_BREAKDOWN
    } else if fan.failures > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    report.simulation = Some(SimulationReport {
        horizon: cfg.sim.horizon,
        earliest_event: earliest,
        min_gamma: fan.trajectories.iter().map(|t| t.min_gamma()).fold(f64::INFINITY, f64::min),
        max_energy_residual: fan.trajectories.iter().map(|t| t.max_energy_residual()).fold(0.0, f64::max),
        fan: fan.summaries,
        slices: slice_rows,
    });
    Ok(Outcome {
        report,
        fan: fan.trajectories,
        slices,
    })
}

pub fn validate(cfg: &RunConfig) -> CliResult<Outcome> {
    let data = cfg.initial_data()?;
    let pc = cfg.problem_config()?;
    validate_with(cfg, &|r| pcfb(&data, pc, r))
}

/// Cross-check the pointwise evaluator `eval` against simulated characteristics.
pub fn validate_with(cfg: &RunConfig, eval: &(dyn Fn(f64) -> Verdict + Sync)) -> CliResult<Outcome> {
    let data = cfg.initial_data()?;
    let pc = cfg.problem_config()?;
    let classification = classify_with(eval, &cfg.scan_config())?;
    let fan = run_fan(cfg, &data, pc);

    let mut x = CrossValidation {
        radii: fan.summaries.len(),
        simulation_failures: fan.failures,
        ..Default::default()
    };
    for tr in &fan.trajectories {
        compare_radius(&mut x, &eval(tr.r()), detect_breakdown(tr));
    }
    if classification.overall == Overall::Global {
        if let Some(tr) = fan.trajectories.iter().find(|t| detect_breakdown(t).is_some()) {
            x.contradictions.push(Contradiction {
                r: tr.r(),
                kind: "classification-missed-event",
                detail: format!("scan found no breakdown but the characteristic from R = {} breaks down", tr.r()),
            });
        }
    }
    if pc.n == 4 && pc.repulsive() {
        check_closed_form_verdicts(&mut x, &classification, &data, pc);
    }
    if pc.repulsive() && (pc.n == 1 || pc.n == 4) {
        check_closed_form_trajectories(&mut x, &fan.trajectories);
    }

    let mut report = Report::new("validate", cfg);
    report.exit_code = if x.contradictions.is_empty() { EXIT_OK } else { EXIT_CONTRADICTION };
    report.classification = Some(ClassificationReport::from(classification));
    report.cross_validation = Some(x);
    Ok(Outcome {
        report,
        fan: fan.trajectories,
        slices: Vec::new(),
    })
}

fn compare_radius(x: &mut CrossValidation, v: &Verdict, event: Option<Event>) {
    let near = v.status == Status::Marginal || v.margin.abs() < VALIDATE_BAND;
    match (v.status, event) {
        _ if near => x.marginal += 1,
        (Status::Breakdown, Some(_)) | (Status::NoBreakdown, None) => x.agree += 1,
        (Status::Breakdown, None) => x.consistent_beyond_horizon += 1,
        (_, Some(e)) => x.contradictions.push(Contradiction {
            r: v.r,
            kind: "event-without-condition",
            detail: format!("{} reports no breakdown (margin {:e}) but {} at t = {}", v.condition_id, v.margin, kind_word(&e), e.t_c),
        }),
        (Status::Marginal, None) => x.marginal += 1,
    }
}

fn check_closed_form_verdicts(x: &mut CrossValidation, c: &Classification, data: &InitialData, pc: ProblemConfig) {
    for v in &c.verdicts {
        let Ok(q) = threshold_quantities(data, pc, v.r) else { continue };
        let closed = pcfb_4d_closed(&q);
        let decided = |v: &Verdict| v.status != Status::Marginal && v.margin.abs() >= VALIDATE_BAND;
        x.closed_form_compared += 1;
        if decided(v) && decided(&closed) && v.status != closed.status {
            x.contradictions.push(Contradiction {
                r: v.r,
                kind: "closed-form-verdict",
                detail: format!("{} says {} but {} says {}", v.condition_id, v.status, closed.condition_id, closed.status),
            });
        }
    }
}

fn check_closed_form_trajectories(x: &mut CrossValidation, fan: &[CharTrajectory]) {
    for tr in fan {
        let l = tr.launch;
        let end = tr.event.map_or(f64::INFINITY, |e| e.t_c);
        for s in tr.samples.iter().filter(|s| s.t < end) {
            let exact = if l.n == 1 { closed_form_1d(&l, s.t) } else { closed_form_4d(&l, s.t) };
            let Ok((xe, _)) = exact else { continue };
            let err = (s.x - xe).abs() / l.r;
            x.closed_form_max_x_error = x.closed_form_max_x_error.max(err);
            if err > 1e-6 {
                x.contradictions.push(Contradiction {
                    r: l.r,
                    kind: "closed-form-trajectory",
                    detail: format!("X = {} at t = {} but closed form gives {xe}", s.x, s.t),
                });
                break;
            }
        }
    }
}

/// Write `report.json` into the output directory and, for `--format csv`,
/// the tables as well. Returns the written paths.
pub fn write_outputs(o: &Outcome, cfg: &RunConfig) -> CliResult<Vec<std::path::PathBuf>> {
    let dir = &cfg.output.dir;
    let mut paths = vec![report::write(dir, "report.json", &o.report.to_json()?)?];
    if cfg.output.format != Format::Csv {
        return Ok(paths);
    }
    if let Some(c) = &o.report.classification {
        paths.push(report::write(dir, "verdicts.csv", &report::verdicts_csv(&c.detail.verdicts))?);
    }
    if cfg.output.trajectories {
        for tr in &o.fan {
            paths.push(report::write(dir, &format!("traj_R{}.csv", report::num(tr.r())), &report::trajectory_csv(tr))?);
        }
    }
    for s in &o.slices {
        paths.push(report::write(dir, &format!("slice_t{}.csv", report::num(s.t)), &report::slice_csv(s))?);
    }
    Ok(paths)
}
