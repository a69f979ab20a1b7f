//! Adaptive Gauss–Kronrod quadrature with endpoint substitutions.
//!
//! The engine bisects the interval with the largest error estimate until the
//! global estimate meets `max(abs_tol, rel_tol * |value|)`. Inverse square
//! root endpoints are removed with `y = a + u^2` (or `y = b - u^2`), and
//! semi-infinite ranges are folded onto `(0, 1]` with `y = a / u`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Integrable endpoint behaviour of the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Singularity {
    #[default]
    None,
    /// `f(y) ~ (y - lower)^(-1/2)`.
    InvSqrtLower,
    /// `f(y) ~ (upper - y)^(-1/2)`.
    InvSqrtUpper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: DEFAULT_REL_TOL,
            abs: DEFAULT_ABS_TOL,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel,
            abs,
            ..Self::default()
        }
    }
}

/// A one-dimensional integral `∫_lower^upper f(y) dy`.
///
/// `upper` may be `f64::INFINITY`. `decay` is the exponent `p` in
/// `f(y) ~ y^(-p)` as `y → ∞`; `p <= 1` is reported as divergence without
/// evaluating the integrand.
pub struct IntegralSpec<F> {
    pub integrand: F,
    pub lower: f64,
    pub upper: f64,
    pub singularity: Singularity,
    pub decay: Option<f64>,
}

impl<F: Fn(f64) -> f64> IntegralSpec<F> {
    pub fn new(integrand: F, lower: f64, upper: f64) -> Self {
        Self {
            integrand,
            lower,
            upper,
            singularity: Singularity::None,
            decay: None,
        }
    }

    pub fn singularity(mut self, singularity: Singularity) -> Self {
        self.singularity = singularity;
        self
    }

    pub fn decay(mut self, p: f64) -> Self {
        self.decay = Some(p);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    /// `f64::INFINITY` when `divergent` is set.
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
    pub divergent: bool,
}

impl IntegralResult {
    fn divergent() -> Self {
        Self {
            value: f64::INFINITY,
            error: 0.0,
            subdivisions: 0,
            evaluations: 0,
            divergent: true,
        }
    }

    fn zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
            evaluations: 0,
            divergent: false,
        }
    }

    fn add(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error: self.error + other.error,
            subdivisions: self.subdivisions + other.subdivisions,
            evaluations: self.evaluations + other.evaluations,
            divergent: self.divergent || other.divergent,
        }
    }
}

/// Evaluate an integral to the requested tolerance.
pub fn integrate<F: Fn(f64) -> f64>(spec: &IntegralSpec<F>, tol: Tolerance) -> Result<IntegralResult> {
    let (a, b) = (spec.lower, spec.upper);
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::Domain(format!("invalid integration bounds [{a}, {b}]")));
    }
    if !(tol.rel > 0.0 && tol.abs > 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    if a == b {
        return Ok(IntegralResult::zero());
    }
    if a > b {
        return Err(Error::Domain(format!("lower bound {a} exceeds upper bound {b}")));
    }
    let f = &spec.integrand;

    if b.is_infinite() {
        if let Some(p) = spec.decay {
            if p <= 1.0 {
                return Ok(IntegralResult::divergent());
            }
        }
        if spec.singularity == Singularity::InvSqrtUpper {
            return Err(Error::Domain("no finite upper endpoint for the singularity".into()));
        }
        // Fold [c, ∞) onto (0, 1]; anything below c is handled as a finite piece.
        let c = if a > 0.0 { a.max(1e-300) } else { 1.0 + a.abs() };
        let split = if spec.singularity == Singularity::InvSqrtLower || a <= 0.0 {
            if a > 0.0 {
                2.0 * a
            } else {
                c
            }
        } else {
            a
        };
        let mut head = IntegralResult::zero();
        if split > a {
            head = finite(f, a, split, spec.singularity, budget(tol, 2))?;
        }
        let tail = adaptive(
            |u: f64| {
                let y = split / u;
                f(y) * split / (u * u)
            },
            0.0,
            1.0,
            budget(tol, 2),
        )?;
        let total = head.add(tail);
        if total.value.abs() > 1.0 / tol.abs {
            return Ok(IntegralResult::divergent());
        }
        return Ok(total);
    }

    finite(f, a, b, spec.singularity, tol)
}

fn finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, singularity: Singularity, tol: Tolerance) -> Result<IntegralResult> {
    match singularity {
        Singularity::None => adaptive(f, a, b, tol),
        Singularity::InvSqrtLower => {
            let h = (b - a).sqrt();
            adaptive(|u: f64| 2.0 * u * f(a + u * u), 0.0, h, tol)
        }
        Singularity::InvSqrtUpper => {
            let h = (b - a).sqrt();
            adaptive(|u: f64| 2.0 * u * f(b - u * u), 0.0, h, tol)
        }
    }
}

/// `∫_1^z dz / sqrt(log z)` computed as `2 ∫_0^{sqrt(log z)} e^{x^2} dx`.
pub fn integrate_sqrt_log(upper_z: f64) -> Result<f64> {
    if !(upper_z > 1.0) || !upper_z.is_finite() {
        return Err(Error::Domain(format!("upper limit {upper_z} must be finite and > 1")));
    }
    let top = upper_z.ln().sqrt();
    let res = adaptive(|x: f64| (x * x).exp(), 0.0, top, Tolerance::default())?;
    Ok(2.0 * res.value)
}

fn budget(tol: Tolerance, parts: usize) -> Tolerance {
    Tolerance {
        rel: tol.rel,
        abs: tol.abs / parts as f64,
        max_evals: tol.max_evals / parts,
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    if !fc.is_finite() {
        return Err(Error::NonFinite { at: centre });
    }
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (centre - dx, centre + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(Error::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(Error::NonFinite { at: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    let mut resabs = WGK[10] * fc.abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    let half_abs = half.abs();
    resasc *= half_abs;
    resabs *= half_abs;

    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > err {
        err = floor;
    }
    Ok((kronrod * half, err))
}

fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<IntegralResult> {
    let (value, error) = gk21(&f, a, b)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;

    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if evaluations + 42 > tol.max_evals {
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
                evaluations,
            });
        }
        let Some(seg) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) || (seg.b - seg.a) <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            // Cannot split further; keep its contribution and stop refining it.
            frozen_err += seg.error;
            frozen_value += seg.value;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&f, seg.a, mid)?;
        let (v2, e2) = gk21(&f, mid, seg.b)?;
        evaluations += 42;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }

    // Re-sum to shed the drift of the running totals.
    let mut value = frozen_value;
    let mut error = frozen_err;
    let subdivisions = heap.len();
    for seg in heap.iter() {
        value += seg.value;
        error += seg.error;
    }
    let target = tol.abs.max(tol.rel * value.abs());
    if error > target {
        return Err(Error::Quadrature {
            value,
            error,
            evaluations,
        });
    }
    Ok(IntegralResult {
        value,
        error,
        subdivisions,
        evaluations,
        divergent: false,
    })
}
