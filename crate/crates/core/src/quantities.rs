//! Threshold quantities `A, ∂A, C, ∂C`, the constant `I_n` and turning data.
//!
//! With `k = n - 2` and `λ < 0` the characteristic energy reads
//! `X'^2 = C - A X^(-k)` for `n >= 3` and `X'^2 = C + A log X` for `n = 2`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{InitialData, ProblemConfig};
use crate::quadrature::{integrate, IntegralSpec, Tolerance};

/// Scalars attached to one radius.
///
/// For `n = 1` the fields `a`, `a_prime`, `c` and `c_prime` are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdQuantities {
    pub r: f64,
    pub n: u32,
    pub lambda: f64,
    pub m0: f64,
    pub rho0: f64,
    /// `ln ρ0`, finite where `rho0` has underflowed to zero.
    pub ln_rho0: f64,
    pub v0: f64,
    pub v0_prime: f64,
    pub a: f64,
    pub a_prime: f64,
    pub c: f64,
    pub c_prime: f64,
}

impl ThresholdQuantities {
    /// `k = n - 2`.
    pub fn k(&self) -> f64 {
        self.n as f64 - 2.0
    }

    /// `∂(v0^2) = 2 v0 v0'`.
    pub fn dv2(&self) -> f64 {
        2.0 * self.v0 * self.v0_prime
    }

    /// Sum of the magnitudes of the terms of `C`.
    pub fn c_scale(&self) -> f64 {
        match self.n {
            1 => f64::NAN,
            2 => self.v0 * self.v0 + (self.a * self.r.ln()).abs(),
            _ => self.v0 * self.v0 + self.a * self.r.powf(-self.k()),
        }
    }

    /// Sum of the magnitudes of the terms of `∂C`.
    pub fn c_prime_scale(&self) -> f64 {
        let dv2 = self.dv2().abs();
        match self.n {
            1 => f64::NAN,
            2 => dv2 + (self.a_prime * self.r.ln()).abs() + self.a / self.r,
            _ => {
                let k = self.k();
                dv2 + self.a_prime * self.r.powf(-k) + k * self.a * self.r.powf(-k - 1.0)
            }
        }
    }

    /// Same radius with a different velocity value, keeping `v0'` fixed.
    /// Used to probe the neighbouring sign branch.
    pub fn with_v0(&self, v0: f64) -> Self {
        let mut q = *self;
        let shift = v0 * v0 - self.v0 * self.v0;
        let dshift = 2.0 * (v0 - self.v0) * self.v0_prime;
        q.v0 = v0;
        q.c += shift;
        q.c_prime += dshift;
        q
    }

    /// Quantities built from scalars, bypassing profile evaluation.
    #[allow(clippy::too_many_arguments)]
    pub fn from_scalars(cfg: ProblemConfig, r: f64, m0: f64, rho0: f64, v0: f64, v0_prime: f64) -> Self {
        let n = cfg.n;
        let lambda = cfg.lambda;
        let (a, a_prime, c, c_prime) = match n {
            1 => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            2 => {
                let l = r.ln();
                (
                    2.0 * lambda.abs() * m0,
                    2.0 * lambda.abs() * r * rho0,
                    v0 * v0 + 2.0 * lambda * m0 * l,
                    2.0 * v0 * v0_prime + 2.0 * lambda * r * rho0 * l + 2.0 * lambda * m0 / r,
                )
            }
            _ => {
                let k = n as f64 - 2.0;
                let rn1 = r.powi(n as i32 - 1);
                (
                    2.0 * lambda.abs() * m0 / k,
                    2.0 * lambda.abs() * rn1 * rho0 / k,
                    v0 * v0 - 2.0 * lambda * m0 / (k * r.powi(n as i32 - 2)),
                    2.0 * v0 * v0_prime - 2.0 * lambda * r * rho0 / k + 2.0 * lambda * m0 / rn1,
                )
            }
        };
        Self {
            r,
            n,
            lambda,
            m0,
            rho0,
            ln_rho0: rho0.ln(),
            v0,
            v0_prime,
            a,
            a_prime,
            c,
            c_prime,
        }
    }
}

/// Evaluate the threshold quantities at `r > 0`.
pub fn threshold_quantities(data: &InitialData, cfg: ProblemConfig, r: f64) -> Result<ThresholdQuantities> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("threshold quantities need finite R > 0, got {r}")));
    }
    let m0 = data.mass(cfg.n, r)?;
    let rho0 = data.density(r);
    let v0 = data.velocity(r)?;
    let v0_prime = data.velocity_derivative(r)?;
    let mut q = ThresholdQuantities::from_scalars(cfg, r, m0, rho0, v0, v0_prime);
    q.ln_rho0 = data.ln_density(r);
    Ok(q)
}

fn in_cache() -> &'static Mutex<HashMap<u32, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `I_n = ∫_1^∞ ((1 - y^-2)^(-1/(n-2)) - 1) dy` for `n >= 4`.
pub fn constant_in(n: u32) -> Result<f64> {
    if n < 4 {
        return Err(Error::Domain(format!("I_n is defined for n >= 4, got {n}")));
    }
    if let Some(v) = in_cache().lock().unwrap().get(&n) {
        return Ok(*v);
    }
    let k = n as f64 - 2.0;
    let tol = Tolerance::new(1e-12, 1e-14);
    // [1, 2] with y = 1 + u^2, where 1 - y^-2 = u^2 (2 + u^2) / (1 + u^2)^2.
    let head = IntegralSpec::new(
        move |u: f64| {
            let u2 = u * u;
            let base = u2 * (2.0 + u2) / ((1.0 + u2) * (1.0 + u2));
            2.0 * u * (base.powf(-1.0 / k) - 1.0)
        },
        0.0,
        1.0,
    );
    let tail = IntegralSpec::new(move |y: f64| (-(-(y * y).recip()).ln_1p() / k).exp_m1(), 2.0, f64::INFINITY).decay(2.0);
    let value = integrate(&head, tol)?.value + integrate(&tail, tol)?.value;
    in_cache().lock().unwrap().insert(n, value);
    Ok(value)
}

/// Turning time `t*`, its radial derivative and the turning radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningData {
    pub t_star: f64,
    pub t_star_prime: f64,
    pub turning_radius: f64,
}

/// Time for an inward characteristic (`λ < 0`, `v0 < 0`, `A > 0`) to reach its
/// turning radius, with `∂_R t*` from the chain rule.
pub fn turning_time(q: &ThresholdQuantities) -> Result<TurningData> {
    if q.n < 2 {
        return Err(Error::Domain("turning time needs n >= 2".into()));
    }
    if q.lambda >= 0.0 {
        return Err(Error::Domain("turning time needs lambda < 0".into()));
    }
    if !(q.a > 0.0) {
        return Err(Error::NoTurning { r: q.r });
    }
    if q.v0 > 0.0 {
        return Err(Error::Domain(format!("turning time needs v0 <= 0, got {}", q.v0)));
    }
    if q.v0 == 0.0 {
        return Ok(TurningData {
            t_star: 0.0,
            t_star_prime: f64::NAN,
            turning_radius: q.r,
        });
    }
    if q.n == 2 {
        turning_2d(q)
    } else {
        turning_nd(q)
    }
}

fn turning_nd(q: &ThresholdQuantities) -> Result<TurningData> {
    let (r, a, c, v0) = (q.r, q.a, q.c, q.v0);
    let k = q.k();
    let n = q.n as f64;
    assert!(c > 0.0, "C must be positive for lambda < 0 and v0 != 0");
    // Z - 1 with Z = (1 + v0^2 R^k / A)^(1/k)
    let zm1 = ((v0 * v0 * r.powf(k) / a).ln_1p() / k).exp_m1();
    let z = 1.0 + zm1;
    let p = (a.ln() - 0.5 * n * c.ln()) / k;
    let p = p.exp();
    let j = unit_turning_integral(k, zm1)?;
    let t_star = p * j;
    let dp = p * (q.a_prime / a - 0.5 * n * q.c_prime / c) / k;
    // J'(Z) ∂Z without the 1/|v0| cancellation.
    let jdz = -z * (k * v0 / r + 2.0 * q.v0_prime - v0 * q.a_prime / a) / (k * c.sqrt());
    Ok(TurningData {
        t_star,
        t_star_prime: dp * j + p * jdz,
        turning_radius: (a / c).powf(1.0 / k),
    })
}

/// `∫_1^{1+zm1} dz / sqrt(1 - z^-k)` via `z = 1 + u^2`.
pub fn unit_turning_integral(k: f64, zm1: f64) -> Result<f64> {
    if zm1 <= 0.0 {
        return Ok(0.0);
    }
    let f = move |u: f64| {
        let u2 = u * u;
        let d = -(-k * u2.ln_1p()).exp_m1();
        if d <= 0.0 {
            2.0 / k.sqrt()
        } else {
            2.0 * u / d.sqrt()
        }
    };
    let spec = IntegralSpec::new(f, 0.0, zm1.sqrt());
    Ok(integrate(&spec, Tolerance::new(1e-13, 1e-300))?.value)
}

fn turning_2d(q: &ThresholdQuantities) -> Result<TurningData> {
    let (r, a, v0) = (q.r, q.a, q.v0);
    let w = v0 * v0 / a;
    let s = w.sqrt();
    let dawson = dawson_integral(s)?;
    let t_star = 2.0 * r / a.sqrt() * dawson;
    let dw = (2.0 * v0 * q.v0_prime * a - v0 * v0 * q.a_prime) / (a * a);
    let t_star_prime = t_star * (1.0 / r - 0.5 * q.a_prime / a - dw) - r * (2.0 * q.v0_prime * a - v0 * q.a_prime) / (a * a);
    Ok(TurningData {
        t_star,
        t_star_prime,
        turning_radius: r * (-w).exp(),
    })
}

/// `∫_0^s e^(x^2 - s^2) dx`.
pub fn dawson_integral(s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let spec = IntegralSpec::new(move |x: f64| ((x - s) * (x + s)).exp(), 0.0, s);
    Ok(integrate(&spec, Tolerance::new(1e-13, 1e-300))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{ProfileKind, RadialProfile};
    use crate::quadrature::integrate_sqrt_log;

    fn uniform(n: u32, lambda: f64) -> (InitialData, ProblemConfig) {
        (
            InitialData::new(RadialProfile::constant(1.0), RadialProfile::zero()).unwrap(),
            ProblemConfig::new(n, lambda).unwrap(),
        )
    }

    #[test]
    fn uniform_3d() {
        let (d, cfg) = uniform(3, -1.0);
        let q = threshold_quantities(&d, cfg, 1.0).unwrap();
        assert!((q.m0 - 1.0 / 3.0).abs() < 1e-14);
        assert!((q.a - 2.0 / 3.0).abs() < 1e-14);
        assert!((q.c - 2.0 / 3.0).abs() < 1e-14);
        assert!((q.c_prime - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_2d() {
        let (d, cfg) = uniform(2, -1.0);
        let q = threshold_quantities(&d, cfg, 2.0).unwrap();
        assert!((q.a - 4.0).abs() < 1e-13);
        assert!((q.a_prime - 4.0).abs() < 1e-13);
    }

    #[test]
    fn vacuum_quantities() {
        let d = InitialData::new(RadialProfile::zero(), RadialProfile::new(ProfileKind::Power { amplitude: 0.7, power: 2.0 }).unwrap()).unwrap();
        for n in [2u32, 3, 5] {
            let q = threshold_quantities(&d, ProblemConfig::new(n, -1.0).unwrap(), 1.5).unwrap();
            assert_eq!(q.a, 0.0);
            assert!((q.c - q.v0 * q.v0).abs() < 1e-15);
            assert!((q.c_prime - 2.0 * q.v0 * q.v0_prime).abs() < 1e-15);
        }
    }

    #[test]
    fn i4_is_one() {
        assert!((constant_in(4).unwrap() - 1.0).abs() < 1e-10);
        let i5 = constant_in(5).unwrap();
        let i6 = constant_in(6).unwrap();
        assert!(0.0 < i6 && i6 < i5 && i5 < 1.0);
        assert!(constant_in(3).is_err());
    }

    #[test]
    fn t_star_4d_closed_form() {
        let cfg = ProblemConfig::new(4, -1.0).unwrap();
        // A = 1 with v0 = -1, R = 1 gives C = 2.
        let q = ThresholdQuantities::from_scalars(cfg, 1.0, 1.0, 0.3, -1.0, 0.2);
        assert!((q.a - 1.0).abs() < 1e-15 && (q.c - 2.0).abs() < 1e-15);
        let t = turning_time(&q).unwrap();
        assert!((t.t_star - 0.5).abs() < 1e-12, "{}", t.t_star);
        assert!(t.turning_radius < q.r);
    }

    #[test]
    fn t_star_2d_matches_sqrt_log_route() {
        let cfg = ProblemConfig::new(2, -1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, 1.3, 0.4, 0.2, -0.9, 0.1);
        let t = turning_time(&q).unwrap();
        let w = q.v0 * q.v0 / q.a;
        let alt = q.r / q.a.sqrt() * (-w).exp() * integrate_sqrt_log(w.exp()).unwrap();
        assert!((t.t_star - alt).abs() < 1e-10 * alt);
        assert!((t.turning_radius - q.r * (-w).exp()).abs() < 1e-15);
    }

    #[test]
    fn t_star_vanishes_as_v0_goes_to_zero() {
        for n in [2u32, 3, 5] {
            let cfg = ProblemConfig::new(n, -1.0).unwrap();
            let q = ThresholdQuantities::from_scalars(cfg, 1.0, 0.5, 0.2, -1e-9, 0.1);
            assert!(turning_time(&q).unwrap().t_star < 1e-8);
        }
    }

    #[test]
    fn no_turning_without_mass() {
        let cfg = ProblemConfig::new(3, -1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, 1.0, 0.0, 0.0, -1.0, 0.0);
        assert!(matches!(turning_time(&q), Err(Error::NoTurning { .. })));
    }
}
