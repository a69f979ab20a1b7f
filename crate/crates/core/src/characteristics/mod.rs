//! Characteristic curves `X(t, R)` and their `R`-derivative `Γ`.
//!
//! State is `(X, X', Γ, Γ')` with
//!
//! ```text
//! X'' = -λ m0 X^(1-n)
//! Γ'' = -λ (ρ0 R^(n-1) X^(1-n) - (n-1) m0 X^(-n) Γ)
//! ```

mod closed;
mod fields;
pub mod ode;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::InitialData;
use crate::quantities::ThresholdQuantities;

pub use closed::{closed_form_1d, closed_form_4d, closed_form_event};
pub use fields::{reconstruct, state_at, FieldPoint, FieldSlice};

/// Fraction of `R` at which `X` counts as having reached the origin.
pub const X_ZERO_FRACTION: f64 = 1e-12;

/// Scalars that determine one characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Launch {
    pub n: u32,
    pub lambda: f64,
    pub r: f64,
    pub m0: f64,
    pub rho0: f64,
    pub v0: f64,
    pub v0_prime: f64,
}

impl Launch {
    /// Evaluate the launch scalars from profiles. `lambda = 0` is allowed.
    pub fn new(data: &InitialData, n: u32, lambda: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("launch radius must be finite and positive, got {r}")));
        }
        if n < 1 || !lambda.is_finite() {
            return Err(Error::Config(format!("invalid dimension {n} or coupling {lambda}")));
        }
        Ok(Self {
            n,
            lambda,
            r,
            m0: data.mass(n, r)?,
            rho0: data.density(r),
            v0: data.velocity(r)?,
            v0_prime: data.velocity_derivative(r)?,
        })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `(X'', Γ'')` at `(X, Γ)`.
    pub fn accel(&self, x: f64, gamma: f64) -> (f64, f64) {
        if self.lambda == 0.0 {
            return (0.0, 0.0);
        }
        let n = self.nf();
        let x1n = x.powi(1 - self.n as i32);
        let xpp = -self.lambda * self.m0 * x1n;
        let dm = self.rho0 * self.r.powi(self.n as i32 - 1);
        let gpp = -self.lambda * (dm * x1n - (n - 1.0) * self.m0 * x1n / x * gamma);
        (xpp, gpp)
    }
}

impl From<&ThresholdQuantities> for Launch {
    fn from(q: &ThresholdQuantities) -> Self {
        Self {
            n: q.n,
            lambda: q.lambda,
            r: q.r,
            m0: q.m0,
            rho0: q.rho0,
            v0: q.v0,
            v0_prime: q.v0_prime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharState {
    pub t: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Xp")]
    pub xp: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(rename = "Gammap")]
    pub gammap: f64,
}

impl CharState {
    fn from_array(t: f64, y: &[f64; 4]) -> Self {
        Self {
            t,
            x: y[0],
            xp: y[1],
            gamma: y[2],
            gammap: y[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    GammaZero,
    XZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t_c: f64,
    pub bracket: (f64, f64),
    /// Set when the event was inferred from step-size collapse rather than a
    /// located sign change.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharTrajectory {
    pub launch: Launch,
    pub horizon: f64,
    pub samples: Vec<CharState>,
    pub event: Option<Event>,
}

impl CharTrajectory {
    pub fn r(&self) -> f64 {
        self.launch.r
    }

    pub fn last(&self) -> &CharState {
        self.samples.last().expect("trajectory has the initial sample")
    }

    /// The sample recorded at exactly `t`, if any.
    pub fn at(&self, t: f64) -> Option<&CharState> {
        let i = self.samples.partition_point(|s| s.t < t);
        self.samples.get(i).filter(|s| s.t == t)
    }

    pub fn min_gamma(&self) -> f64 {
        self.samples.iter().map(|s| s.gamma).fold(f64::INFINITY, f64::min)
    }

    /// Largest energy residual over the samples, relative to `1 + X'^2`.
    pub fn max_energy_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| energy_residual(s, &self.launch) / (1.0 + s.xp * s.xp))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Times at which a sample is forced.
    pub outputs: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            outputs: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn with_horizon(horizon: f64) -> Self {
        Self { horizon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Config("integration tolerances must be positive".into()));
        }
        Ok(())
    }
}

pub fn simulate(data: &InitialData, n: u32, lambda: f64, r: f64, sim: &SimConfig) -> Result<CharTrajectory> {
    simulate_launch(Launch::new(data, n, lambda, r)?, sim)
}

pub fn simulate_launch(launch: Launch, sim: &SimConfig) -> Result<CharTrajectory> {
    sim.validate()?;
    let l = launch;
    let eps_x = X_ZERO_FRACTION * l.r;
    let rhs = move |_t: f64, y: &[f64; 4]| -> [f64; 4] {
        if !(y[0] > 0.0) {
            return [f64::NAN; 4];
        }
        let (xpp, gpp) = l.accel(y[0], y[2]);
        [y[1], xpp, y[3], gpp]
    };
    let opts = ode::Options {
        rtol: sim.rtol,
        atol: sim.atol * l.r.clamp(1e-300, 1.0),
        max_steps: sim.max_steps,
    };
    let mut samples = Vec::new();
    let stop = ode::solve(
        rhs,
        0.0,
        [l.r, l.v0, 1.0, l.v0_prime],
        sim.horizon,
        &sim.outputs,
        &opts,
        |y| [y[2], y[0] - eps_x],
        |t, y| samples.push(CharState::from_array(t, y)),
    );
    let event = match stop {
        ode::Stop::End => None,
        ode::Stop::Event { index, t, bracket, .. } => Some(Event {
            kind: if index == 0 { EventKind::GammaZero } else { EventKind::XZero },
            t_c: t,
            bracket,
            low_confidence: false,
        }),
        ode::Stop::Underflow { t, h } => {
            let s = samples.last().copied().expect("initial sample");
            if s.x < 1e-3 * l.r || s.xp.abs() > 1e6 * (1.0 + l.v0.abs()) {
                Some(Event {
                    kind: EventKind::XZero,
                    t_c: t,
                    bracket: (t, t + h.max(f64::EPSILON * t)),
                    low_confidence: true,
                })
            } else {
                return Err(Error::Integrator(format!("step size underflow at t = {t} for R = {}", l.r)));
            }
        }
        ode::Stop::MaxSteps { t } => {
            return Err(Error::Integrator(format!("step budget exhausted at t = {t} for R = {}", l.r)));
        }
    };
    Ok(CharTrajectory {
        launch,
        horizon: sim.horizon,
        samples,
        event,
    })
}

/// Parallel fan of trajectories launched from `radii`.
pub fn simulate_fan(data: &InitialData, n: u32, lambda: f64, radii: &[f64], sim: &SimConfig) -> Result<Vec<CharTrajectory>> {
    radii.par_iter().map(|&r| simulate(data, n, lambda, r, sim)).collect()
}

/// Earliest event before the horizon.
pub fn detect_breakdown(traj: &CharTrajectory) -> Option<Event> {
    traj.event.filter(|e| e.t_c <= traj.horizon)
}

/// `|X'^2 - E(X)|` where `E` is the energy identity fixed by the launch data.
pub fn energy_residual(state: &CharState, l: &Launch) -> f64 {
    let rhs = if l.lambda == 0.0 {
        l.v0 * l.v0
    } else {
        let lm = l.lambda * l.m0;
        match l.n {
            1 => l.v0 * l.v0 - 2.0 * lm * (state.x - l.r),
            2 => l.v0 * l.v0 - 2.0 * lm * (state.x / l.r).ln(),
            n => {
                let k = n as f64 - 2.0;
                let ni = n as i32 - 2;
                l.v0 * l.v0 + 2.0 * lm / k * (state.x.powi(-ni) - l.r.powi(-ni))
            }
        }
    };
    (state.xp * state.xp - rhs).abs()
}
