//! The integral left-hand sides of the repulsive criteria.
//!
//! With `w(y) = C - A y^-k` (power model, `n >= 3`) or `w(y) = C + A log y`
//! (log model, `n = 2`) and `F(y) = ∂C - ∂A y^-k` (resp. `∂C + ∂A log y`),
//! the criteria compare
//!
//! ```text
//! Φ = 1/|v0| + ½ ∫_R^Y F(y) w(y)^(-3/2) dy
//! ```
//!
//! against a threshold, where `Y` is the zero of `F`. Both terms blow up like
//! `1/|v0|` with opposite signs as `v0 → 0`. Writing `s = w(y) - v0^2`,
//! `h(s) = F / w'` and integrating by parts gives
//!
//! ```text
//! Φ = 2 sgn(v0) v0' / w'(R) + 2 ∫_0^{η_Y} h'(s(η)) dη,   s = η (η + 2|v0|),
//! ```
//!
//! which is what is evaluated here.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, IntegralSpec, Tolerance};
use crate::quantities::ThresholdQuantities;

/// Value of an integral criterion together with the magnitude of its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi {
    pub value: f64,
    pub scale: f64,
}

impl Phi {
    pub fn neg_infinity() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            scale: f64::INFINITY,
        }
    }
}

fn tol() -> Tolerance {
    Tolerance::new(1e-11, 1e-300)
}

fn signed_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    Ok(sign * integrate(&IntegralSpec::new(f, lo, hi), tol())?.value)
}

fn require(q: &ThresholdQuantities) -> Result<()> {
    if !(q.a > 0.0 && q.a_prime > 0.0) {
        return Err(Error::Domain(format!("integral criterion needs A > 0 and ∂A > 0 at R = {}", q.r)));
    }
    Ok(())
}

/// `1/|v0| + ½ ∫_R^Y F w^(-3/2) dy` with `Y` the zero of `F`
/// (`Y = (∂A/∂C)^(1/(n-2))` or `Y = exp(-∂C/∂A)`). `Y` may lie on either side
/// of `R` but must not be inside the turning radius.
pub fn phi_finite(q: &ThresholdQuantities) -> Result<Phi> {
    require(q)?;
    let (r, a, da, dc) = (q.r, q.a, q.a_prime, q.c_prime);
    let v = q.v0.abs();
    let sg = if q.v0 < 0.0 { -1.0 } else { 1.0 };
    let log_model = q.n == 2;
    let k = q.k();
    let w1 = if log_model { a / r } else { k * a * r.powf(-k - 1.0) };
    // F(R) = 2 v0 v0' - w'(R) in both models.
    let f_r = q.dv2() - w1;
    let s_y = -a * f_r / da;
    if v * v + s_y < 0.0 {
        return Err(Error::Domain(format!("upper limit lies inside the turning radius at R = {r}")));
    }
    let xi_y = (v * v + s_y).sqrt();
    let eta_y = if s_y == 0.0 { 0.0 } else { s_y / (xi_y + v) };
    let boundary = 2.0 * sg * q.v0_prime / w1;

    let g = |eta: f64| -> f64 {
        let rem = (eta_y - eta) * (eta_y + eta + 2.0 * v);
        let f = -da * rem / a;
        if log_model {
            let y = (-dc / da - rem / a).exp();
            y * (f + da) / (a * a)
        } else {
            let base = dc / da + rem / a;
            let y = base.powf(-1.0 / k);
            y.powf(2.0 * k + 1.0) * (k * dc + f) / (k * k * a * a)
        }
    };
    let body = 2.0 * signed_integral(g, 0.0, eta_y)?;
    let value = boundary + body;
    if !value.is_finite() {
        return Err(Error::Domain(format!("integral criterion is not finite at R = {r}")));
    }
    Ok(Phi {
        value,
        scale: boundary.abs() + body.abs(),
    })
}

/// `1/|v0| - (∂A/2) ∫_R^∞ y^-k (C - A y^-k)^(-3/2) dy` for `n >= 3`, the form
/// taken at `∂C = 0`. Returns `-∞` for `n = 3` with `∂A > 0`, where the
/// integral diverges logarithmically.
pub fn phi_semi_infinite(q: &ThresholdQuantities) -> Result<Phi> {
    if q.n < 3 {
        return Err(Error::Domain("semi-infinite criterion needs n >= 3".into()));
    }
    let (r, a, da, c) = (q.r, q.a, q.a_prime, q.c);
    let v = q.v0.abs();
    if v == 0.0 {
        return Err(Error::Domain("semi-infinite criterion needs v0 != 0".into()));
    }
    if da == 0.0 {
        return Ok(Phi { value: 1.0 / v, scale: 1.0 / v });
    }
    if q.n == 3 {
        return Ok(Phi::neg_infinity());
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("semi-infinite criterion needs A > 0 at R = {r}")));
    }
    let k = q.k();
    let w1 = k * a * r.powf(-k - 1.0);
    // 1/|v0| + h(0)/|v0| with h = F / w' and F = -∂A y^-k.
    let boundary = (w1 - da * r.powf(-k)) / (w1 * v);
    let m = 2.0 * r;
    let s_m = a * (r.powf(-k) - m.powf(-k));
    let xi_m = (v * v + s_m).sqrt();
    let eta_m = s_m / (xi_m + v);
    let edge = da * m / (k * a * xi_m);
    let g = |eta: f64| -> f64 {
        let s = eta * (eta + 2.0 * v);
        let y = (r.powf(-k) - s / a).powf(-1.0 / k);
        -da * y.powf(k + 1.0) / (k * k * a * a)
    };
    let body = 2.0 * signed_integral(g, 0.0, eta_m)?;
    let am = a * m.powf(-k);
    let tail_fn = move |u: f64| u.powf(k - 2.0) * (c - am * u.powf(k)).powf(-1.5);
    let tail = -0.5 * da * m.powf(1.0 - k) * signed_integral(tail_fn, 0.0, 1.0)?;
    let value = boundary + edge + body + tail;
    Ok(Phi {
        value,
        scale: boundary.abs() + edge.abs() + body.abs() + tail.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ProblemConfig;

    /// The integral exactly as written, for moderate `|v0|`.
    fn direct(q: &ThresholdQuantities, upper: f64) -> f64 {
        let k = q.k();
        let (a, da, c, dc) = (q.a, q.a_prime, q.c, q.c_prime);
        let f = move |y: f64| {
            if q.n == 2 {
                (dc + da * y.ln()) / (c + a * y.ln()).powf(1.5)
            } else {
                (dc - da * y.powf(-k)) / (c - a * y.powf(-k)).powf(1.5)
            }
        };
        let (lo, hi, s) = if upper > q.r { (q.r, upper, 1.0) } else { (upper, q.r, -1.0) };
        let mut spec = IntegralSpec::new(f, lo, hi);
        if upper.is_infinite() {
            spec = spec.decay(k);
        }
        1.0 / q.v0.abs() + 0.5 * s * integrate(&spec, Tolerance::new(1e-12, 1e-300)).unwrap().value
    }

    #[test]
    fn regularized_matches_direct_power() {
        let cfg = ProblemConfig::new(5, -1.0).unwrap();
        for &(v0, v0p) in &[(0.7, -0.4), (0.3, -1.2), (-0.5, -0.2), (-0.8, 0.3)] {
            let q = ThresholdQuantities::from_scalars(cfg, 1.2, 0.6, 0.9, v0, v0p);
            let y = (q.a_prime / q.c_prime).powf(1.0 / q.k());
            if !(q.c_prime > 0.0) {
                continue;
            }
            let turning = (q.a / q.c).powf(1.0 / q.k());
            if y <= turning {
                continue;
            }
            let reg = phi_finite(&q).unwrap().value;
            let dir = direct(&q, y);
            assert!((reg - dir).abs() < 1e-8 * dir.abs().max(1.0), "v0={v0} {reg} {dir}");
        }
    }

    #[test]
    fn regularized_matches_direct_log() {
        let cfg = ProblemConfig::new(2, -1.0).unwrap();
        for &(v0, v0p) in &[(0.7, -0.4), (0.3, -1.2), (-0.9, 0.1)] {
            let q = ThresholdQuantities::from_scalars(cfg, 1.2, 0.6, 0.9, v0, v0p);
            let y = (-q.c_prime / q.a_prime).exp();
            let turning = q.r * (-(v0 * v0) / q.a).exp();
            if y <= turning {
                continue;
            }
            let reg = phi_finite(&q).unwrap().value;
            let dir = direct(&q, y);
            assert!((reg - dir).abs() < 1e-8 * dir.abs().max(1.0), "v0={v0} {reg} {dir}");
        }
    }

    #[test]
    fn semi_infinite_matches_direct() {
        for n in [4u32, 5, 7] {
            let cfg = ProblemConfig::new(n, -1.0).unwrap();
            for &v0 in &[0.8, -0.6] {
                let q = ThresholdQuantities::from_scalars(cfg, 1.1, 0.5, 0.7, v0, 0.2);
                let reg = phi_semi_infinite(&q).unwrap().value;
                let mut flat = q;
                flat.c_prime = 0.0;
                let dir = direct(&flat, f64::INFINITY);
                assert!((reg - dir).abs() < 1e-8 * dir.abs().max(1.0), "n={n} v0={v0} {reg} {dir}");
            }
        }
    }

    #[test]
    fn no_cancellation_for_tiny_velocity() {
        let cfg = ProblemConfig::new(3, -1.0).unwrap();
        let a = ThresholdQuantities::from_scalars(cfg, 1.0, 0.5, 0.8, 1e-9, -0.3);
        let b = ThresholdQuantities::from_scalars(cfg, 1.0, 0.5, 0.8, 1e-7, -0.3);
        let (pa, pb) = (phi_finite(&a).unwrap(), phi_finite(&b).unwrap());
        assert!(pa.value.is_finite());
        assert!((pa.value - pb.value).abs() < 1e-5 * pa.scale);
    }
}
