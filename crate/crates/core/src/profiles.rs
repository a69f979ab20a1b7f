//! Radial initial data: density and velocity profiles, derivatives and the
//! cumulative mass `m0(R) = ∫_0^R ρ0(s) s^(n-1) ds`.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, IntegralSpec, Tolerance};

/// Tolerance for the `v0(0) = 0` requirement.
pub const ORIGIN_VELOCITY_TOL: f64 = 1e-12;

/// Spatial dimension and coupling constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub n: u32,
    pub lambda: f64,
}

impl ProblemConfig {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        let cfg = Self { n, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Config(format!("dimension must be >= 1, got {}", self.n)));
        }
        if !self.lambda.is_finite() || self.lambda == 0.0 {
            return Err(Error::Config(format!("lambda must be finite and nonzero, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn repulsive(&self) -> bool {
        self.lambda < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    #[default]
    Analytic,
    Numeric,
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Butland slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    r: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Table {
    pub fn new(r: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if r.len() != y.len() {
            return Err(Error::Profile("table columns have different lengths".into()));
        }
        if r.len() < 2 {
            return Err(Error::Profile("table needs at least two rows".into()));
        }
        if r.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Profile("table contains non-finite values".into()));
        }
        if r[0] != 0.0 {
            return Err(Error::Profile(format!("first abscissa must be 0, got {}", r[0])));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Profile("abscissae must be strictly increasing".into()));
        }
        let d = pchip_slopes(&r, &y);
        Ok(Self { r, y, d })
    }

    /// Parse two-column `r,value` CSV text. A single header line is allowed;
    /// blank lines and `#` comments are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut y = Vec::new();
        let mut seen_row = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Profile(format!("line {}: expected 2 columns, found {}", lineno + 1, cols.len())));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    r.push(a);
                    y.push(b);
                    seen_row = true;
                }
                _ if !seen_row && r.is_empty() => {
                    // header
                    seen_row = true;
                }
                _ => return Err(Error::Profile(format!("line {}: cannot parse numbers from {:?}", lineno + 1, line))),
            }
        }
        Self::new(r, y)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let last = self.r.len() - 1;
        if x >= self.r[last] {
            return None;
        }
        let i = self.r.partition_point(|&v| v <= x);
        Some(i.saturating_sub(1).min(last - 1))
    }

    /// Value with constant extension past the last abscissa.
    pub fn eval(&self, x: f64) -> f64 {
        let Some(i) = self.locate(x) else {
            return *self.y.last().unwrap();
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let Some(i) = self.locate(x) else {
            return 0.0;
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.y[i] + d10 * self.d[i] + d01 * self.y[i + 1] + d11 * self.d[i + 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Built-in radial families.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `c`
    Constant { value: f64 },
    /// `a e^(-k r)`
    ExponentialDecay { amplitude: f64, rate: f64 },
    /// `a (1 + (r/s)^2)^(-p)`
    RationalDecay { amplitude: f64, scale: f64, power: f64 },
    /// `a e^(-(r/w)^2)`
    Gaussian { amplitude: f64, width: f64 },
    /// `a exp(1 - 1/(1 - (r/w)^2))` on `r < w`, zero outside.
    CompactBump { amplitude: f64, radius: f64 },
    /// `a r^p sin(ω r)`
    PowerTimesSine { amplitude: f64, power: f64, frequency: f64 },
    /// `a r^p`
    Power { amplitude: f64, power: f64 },
    /// `sqrt(a / (e^r + e^(1/r))) sin r`
    DampedSine { amplitude: f64 },
    Tabulated(Table),
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::ExponentialDecay { .. } => "exponential-decay",
            Self::RationalDecay { .. } => "rational-decay",
            Self::Gaussian { .. } => "gaussian",
            Self::CompactBump { .. } => "compact-bump",
            Self::PowerTimesSine { .. } => "power-times-sine",
            Self::Power { .. } => "power",
            Self::DampedSine { .. } => "damped-sine",
            Self::Tabulated(_) => "tabulated",
        }
    }

    fn check(&self) -> Result<()> {
        let params: Vec<f64> = match *self {
            Self::Constant { value } => vec![value],
            Self::ExponentialDecay { amplitude, rate } => vec![amplitude, rate],
            Self::RationalDecay { amplitude, scale, power } => {
                if scale <= 0.0 {
                    return Err(Error::Profile("rational-decay scale must be positive".into()));
                }
                vec![amplitude, scale, power]
            }
            Self::Gaussian { amplitude, width } => {
                if width <= 0.0 {
                    return Err(Error::Profile("gaussian width must be positive".into()));
                }
                vec![amplitude, width]
            }
            Self::CompactBump { amplitude, radius } => {
                if radius <= 0.0 {
                    return Err(Error::Profile("compact-bump radius must be positive".into()));
                }
                vec![amplitude, radius]
            }
            Self::PowerTimesSine { amplitude, power, frequency } => {
                if power < 0.0 {
                    return Err(Error::Profile("power-times-sine power must be >= 0".into()));
                }
                vec![amplitude, power, frequency]
            }
            Self::Power { amplitude, power } => {
                if power < 0.0 {
                    return Err(Error::Profile("power exponent must be >= 0".into()));
                }
                vec![amplitude, power]
            }
            Self::DampedSine { amplitude } => {
                if amplitude < 0.0 {
                    return Err(Error::Profile("damped-sine amplitude must be >= 0".into()));
                }
                vec![amplitude]
            }
            Self::Tabulated(_) => vec![],
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Profile(format!("{} has non-finite parameters", self.name())));
        }
        Ok(())
    }

    /// `ln` of the value, kept finite where `eval` underflows.
    fn ln_eval(&self, r: f64) -> f64 {
        match *self {
            Self::ExponentialDecay { amplitude, rate } if amplitude > 0.0 => amplitude.ln() - rate * r,
            Self::RationalDecay { amplitude, scale, power } if amplitude > 0.0 => {
                let x = r / scale;
                amplitude.ln() - power * (x * x).ln_1p()
            }
            Self::Gaussian { amplitude, width } if amplitude > 0.0 => {
                let x = r / width;
                amplitude.ln() - x * x
            }
            Self::CompactBump { amplitude, radius } if amplitude > 0.0 && r < radius => {
                let x = r / radius;
                amplitude.ln() + 1.0 - 1.0 / (1.0 - x * x)
            }
            _ => self.eval(r).ln(),
        }
    }

    fn eval(&self, r: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::ExponentialDecay { amplitude, rate } => amplitude * (-rate * r).exp(),
            Self::RationalDecay { amplitude, scale, power } => {
                let x = r / scale;
                amplitude * (1.0 + x * x).powf(-power)
            }
            Self::Gaussian { amplitude, width } => {
                let x = r / width;
                amplitude * (-x * x).exp()
            }
            Self::CompactBump { amplitude, radius } => {
                let x = r / radius;
                if x >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
                }
            }
            Self::PowerTimesSine { amplitude, power, frequency } => amplitude * pow0(r, power) * (frequency * r).sin(),
            Self::Power { amplitude, power } => amplitude * pow0(r, power),
            Self::DampedSine { amplitude } => {
                if r <= 0.0 {
                    return 0.0;
                }
                amplitude.sqrt() * r.sin() * (-0.5 * log_sum_exp(r, 1.0 / r)).exp()
            }
            Self::Tabulated(ref t) => t.eval(r),
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        match *self {
            Self::Constant { .. } => 0.0,
            Self::ExponentialDecay { amplitude, rate } => -rate * amplitude * (-rate * r).exp(),
            Self::RationalDecay { amplitude, scale, power } => {
                let x = r / scale;
                -2.0 * power * amplitude * x / scale * (1.0 + x * x).powf(-power - 1.0)
            }
            Self::Gaussian { amplitude, width } => {
                let x = r / width;
                -2.0 * x / width * amplitude * (-x * x).exp()
            }
            Self::CompactBump { amplitude, radius } => {
                let x = r / radius;
                if x >= 1.0 {
                    0.0
                } else {
                    let s = 1.0 - x * x;
                    -2.0 * x / (radius * s * s) * amplitude * (1.0 - 1.0 / s).exp()
                }
            }
            Self::PowerTimesSine { amplitude, power, frequency } => {
                let s = (frequency * r).sin();
                let c = (frequency * r).cos();
                let lead = if power == 0.0 { 0.0 } else { power * pow0(r, power - 1.0) * s };
                amplitude * (lead + pow0(r, power) * frequency * c)
            }
            Self::Power { amplitude, power } => {
                if power == 0.0 {
                    0.0
                } else {
                    amplitude * power * r.powf(power - 1.0)
                }
            }
            Self::DampedSine { amplitude } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let inv = 1.0 / r;
                let damp = (-0.5 * log_sum_exp(r, inv)).exp();
                // σ = e^r / (e^r + e^(1/r))
                let sigma = 1.0 / (1.0 + (inv - r).exp());
                let dl = sigma - (1.0 - sigma) * inv * inv;
                amplitude.sqrt() * damp * (r.cos() - 0.5 * r.sin() * dl)
            }
            Self::Tabulated(ref t) => t.derivative(r),
        }
    }
}

fn pow0(r: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        r.powf(p)
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A radial profile with its derivative source.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub derivative: DerivativeSource,
}

impl RadialProfile {
    pub fn new(kind: ProfileKind) -> Result<Self> {
        kind.check()?;
        Ok(Self {
            kind,
            derivative: DerivativeSource::Analytic,
        })
    }

    pub fn with_derivative(mut self, source: DerivativeSource) -> Self {
        self.derivative = source;
        self
    }

    pub fn constant(value: f64) -> Self {
        Self::new(ProfileKind::Constant { value }).expect("finite constant")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.kind.eval(r)
    }

    pub fn eval_derivative(&self, r: f64) -> Result<f64> {
        let d = match self.derivative {
            DerivativeSource::Analytic => self.kind.derivative(r),
            DerivativeSource::Numeric => numeric_derivative(|x| self.kind.eval(x), r),
        };
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::DerivativeUndefined { r })
        }
    }
}

/// Five-point central difference with one Richardson step,
/// `h = max(1e-5 r, 1e-8)`. Falls back to a one-sided stencil near the origin.
pub fn numeric_derivative<F: Fn(f64) -> f64>(f: F, r: f64) -> f64 {
    let h = (1e-5 * r).max(1e-8);
    let central = |h: f64| (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h);
    let forward = |h: f64| (-25.0 * f(r) + 48.0 * f(r + h) - 36.0 * f(r + 2.0 * h) + 16.0 * f(r + 3.0 * h) - 3.0 * f(r + 4.0 * h)) / (12.0 * h);
    if r - 2.0 * h >= 0.0 {
        (16.0 * central(0.5 * h) - central(h)) / 15.0
    } else {
        (16.0 * forward(0.5 * h) - forward(h)) / 15.0
    }
}

/// Velocity profile: either an explicit radial family or the escape-velocity
/// profile `± sqrt(2 λ m0(r) / ((n-2) r^(n-2)))` built from the density.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    Profile(RadialProfile),
    Escape { sign: f64, n: u32, lambda: f64 },
}

/// Paired density and velocity with a shared mass cache.
pub struct InitialData {
    density: RadialProfile,
    velocity: Velocity,
    mass_cache: RwLock<HashMap<u32, Vec<f64>>>,
    warnings: AtomicUsize,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("density", &self.density)
            .field("velocity", &self.velocity)
            .finish()
    }
}

impl Clone for InitialData {
    fn clone(&self) -> Self {
        Self {
            density: self.density.clone(),
            velocity: self.velocity.clone(),
            mass_cache: RwLock::new(self.mass_cache.read().unwrap().clone()),
            warnings: AtomicUsize::new(self.warnings.load(Ordering::Relaxed)),
        }
    }
}

// Geometric mass grid: node i >= 1 sits at GRID_BASE * GRID_RATIO^(i-1).
const GRID_BASE: f64 = 1e-6;
const GRID_STEPS_PER_OCTAVE: f64 = 4.0;

fn grid_node(i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        GRID_BASE * ((i - 1) as f64 / GRID_STEPS_PER_OCTAVE).exp2()
    }
}

fn grid_index(r: f64) -> usize {
    if r < GRID_BASE {
        return 0;
    }
    let mut i = 1 + ((r / GRID_BASE).log2() * GRID_STEPS_PER_OCTAVE).floor() as usize;
    while i > 0 && grid_node(i) > r {
        i -= 1;
    }
    while grid_node(i + 1) <= r {
        i += 1;
    }
    i
}

impl InitialData {
    pub fn new(density: RadialProfile, velocity: RadialProfile) -> Result<Self> {
        Self::with_velocity(density, Velocity::Profile(velocity))
    }

    /// Density with the escape-velocity profile (positive root for `sign > 0`).
    pub fn escape(density: RadialProfile, cfg: ProblemConfig, sign: f64) -> Result<Self> {
        if cfg.n < 3 || cfg.lambda <= 0.0 {
            return Err(Error::Profile("escape-velocity needs n >= 3 and lambda > 0".into()));
        }
        Self::with_velocity(
            density,
            Velocity::Escape {
                sign: if sign < 0.0 { -1.0 } else { 1.0 },
                n: cfg.n,
                lambda: cfg.lambda,
            },
        )
    }

    pub fn with_velocity(density: RadialProfile, velocity: Velocity) -> Result<Self> {
        let data = Self {
            density,
            velocity,
            mass_cache: RwLock::new(HashMap::new()),
            warnings: AtomicUsize::new(0),
        };
        data.validate()?;
        Ok(data)
    }

    pub fn vacuum() -> Self {
        Self::new(RadialProfile::zero(), RadialProfile::zero()).expect("vacuum is valid")
    }

    pub fn density_profile(&self) -> &RadialProfile {
        &self.density
    }

    pub fn velocity_profile(&self) -> &Velocity {
        &self.velocity
    }

    fn validate(&self) -> Result<()> {
        if let Velocity::Profile(p) = &self.velocity {
            let v = p.eval(0.0);
            if !(v.abs() <= ORIGIN_VELOCITY_TOL) {
                return Err(Error::Profile(format!("v0(0) = {v:e}, must vanish")));
            }
        }
        for r in validation_grid() {
            let rho = self.density.eval(r);
            if !rho.is_finite() {
                return Err(Error::Profile(format!("density is not finite at r = {r}")));
            }
            if rho < 0.0 && !matches!(self.density.kind, ProfileKind::Tabulated(_)) {
                return Err(Error::Profile(format!("density is negative at r = {r}: {rho:e}")));
            }
            if let Velocity::Profile(p) = &self.velocity {
                if !p.eval(r).is_finite() {
                    return Err(Error::Profile(format!("velocity is not finite at r = {r}")));
                }
            }
        }
        if let ProfileKind::Tabulated(t) = &self.density.kind {
            if t.values().iter().any(|&v| v < 0.0) {
                return Err(Error::Profile("tabulated density has negative entries".into()));
            }
        }
        Ok(())
    }

    /// Number of negative interpolated densities that were clamped to zero.
    pub fn warnings(&self) -> usize {
        self.warnings.load(Ordering::Relaxed)
    }

    pub fn density(&self, r: f64) -> f64 {
        let v = self.density.eval(r);
        if v < 0.0 {
            self.warnings.fetch_add(1, Ordering::Relaxed);
            0.0
        } else {
            v
        }
    }

    /// `ln ρ0(r)`; `-inf` where the density vanishes.
    pub fn ln_density(&self, r: f64) -> f64 {
        if self.density.eval(r) < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.density.kind.ln_eval(r)
        }
    }

    pub fn velocity(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        match self.velocity {
            Velocity::Profile(ref p) => Ok(p.eval(r)),
            Velocity::Escape { sign, n, lambda } => {
                let k = (n - 2) as f64;
                let m = self.mass(n, r)?;
                Ok(sign * (2.0 * lambda * m / (k * r.powf(k))).sqrt())
            }
        }
    }

    pub fn velocity_derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("velocity derivative needs r > 0, got {r}")));
        }
        match self.velocity {
            Velocity::Profile(ref p) => p.eval_derivative(r),
            Velocity::Escape { n, lambda, .. } => {
                let k = (n - 2) as f64;
                let v = self.velocity(r)?;
                if v == 0.0 {
                    return Ok(0.0);
                }
                let m = self.mass(n, r)?;
                let d = lambda / (k * v) * (self.density(r) * r - k * m / r.powi(n as i32 - 1));
                if d.is_finite() {
                    Ok(d)
                } else {
                    Err(Error::DerivativeUndefined { r })
                }
            }
        }
    }

    /// `m0(R) = ∫_0^R ρ0(s) s^(n-1) ds`, cached on a geometric grid.
    pub fn mass(&self, n: u32, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("mass needs finite R >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let idx = grid_index(r);
        let base = self.cumulative(n, idx)?;
        let lo = grid_node(idx);
        let piece = self.segment(n, lo, r)?;
        Ok(base + piece)
    }

    fn cumulative(&self, n: u32, idx: usize) -> Result<f64> {
        if idx == 0 {
            return Ok(0.0);
        }
        if let Some(v) = self.mass_cache.read().unwrap().get(&n).and_then(|c| c.get(idx)) {
            return Ok(*v);
        }
        let mut cache = self.mass_cache.write().unwrap();
        let nodes = cache.entry(n).or_insert_with(|| vec![0.0]);
        while nodes.len() <= idx {
            let i = nodes.len();
            let seg = self.segment(n, grid_node(i - 1), grid_node(i))?;
            let prev = nodes[i - 1];
            nodes.push(prev + seg);
        }
        Ok(nodes[idx])
    }

    fn segment(&self, n: u32, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let p = n as i32 - 1;
        let spec = IntegralSpec::new(|s: f64| self.density(s) * s.powi(p), a, b);
        let tol = Tolerance::new(1e-12, f64::MIN_POSITIVE);
        Ok(integrate(&spec, tol)?.value)
    }
}

/// Radii used to validate profiles: 0 plus a log grid over `[1e-6, 1e6]`.
pub fn validation_grid() -> impl Iterator<Item = f64> {
    std::iter::once(0.0).chain((0..=240).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0)))
}
