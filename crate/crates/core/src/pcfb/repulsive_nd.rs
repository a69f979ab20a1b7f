use super::integrals::{phi_finite, phi_semi_infinite, Phi};
use super::{dispatch_v0, split2, split3, Cmp, Rel, Side, Verdict};
use crate::error::Result;
use crate::quantities::{constant_in, turning_time, ThresholdQuantities};
use crate::quadrature::{integrate, IntegralSpec, Tolerance};

/// Repulsive criterion for `n >= 3`, dispatched on the sign of `v0(R)`.
pub fn pcfb_nd_repulsive(q: &ThresholdQuantities) -> Verdict {
    dispatch_v0(q, |q, side| match side {
        Side::Pos => positive(q),
        Side::Zero => at_rest(q),
        Side::Neg => negative(q),
    })
}

pub(crate) fn phi_verdict(r: f64, phi: Result<Phi>, rhs: f64, rel: Rel, hit: &'static str, miss: &'static str) -> Verdict {
    match phi {
        Ok(p) if p.value == f64::NEG_INFINITY => Verdict::breakdown(r, hit, -1.0).with_note("integral diverges"),
        Ok(p) => Cmp::new(p.value, rhs, p.scale + rhs.abs(), rel).verdict(r, hit, miss),
        Err(e) => Verdict::failed(r, hit, &e),
    }
}

fn positive(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    let scale = q.c_prime_scale();
    split3(q.c_prime, scale, |side| match side {
        Side::Neg => Verdict::breakdown(r, "3D.repulsive.vpos.case1", q.c_prime / scale),
        Side::Zero => phi_verdict(r, phi_semi_infinite(q), 0.0, Rel::Lt, "3D.repulsive.vpos.case2", "3D.repulsive.vpos.none"),
        Side::Pos => {
            let gap = Cmp::new(q.c_prime, q.a_prime * q.r.powf(-q.k()), scale, Rel::Lt);
            split2(gap, |inside| {
                if inside {
                    phi_verdict(r, phi_finite(q), 0.0, Rel::Le, "3D.repulsive.vpos.case3", "3D.repulsive.vpos.none")
                } else {
                    Verdict::safe(r, "3D.repulsive.vpos.none", gap.margin())
                }
            })
        }
    })
}

fn at_rest(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    if q.a == 0.0 {
        // Nothing acts on this characteristic: Γ = 1 + v0' t.
        return Cmp::new(q.v0_prime, 0.0, q.v0_prime.abs(), Rel::Lt).verdict(r, "3D.repulsive.v0.vacuum", "3D.repulsive.v0.none");
    }
    let k = q.k();
    let c = q.c;
    let lhs = q.v0_prime * r;
    let scale = q.c_prime_scale();
    split3(q.c_prime, scale, |side| match side {
        Side::Neg => Verdict::breakdown(r, "3D.repulsive.v0.case1", q.c_prime / scale),
        Side::Zero => match q.n {
            3 => Verdict::breakdown(r, "3D.repulsive.v0.case2a", -1.0),
            4 => Cmp::new(lhs, 0.0, lhs.abs(), Rel::Lt).verdict(r, "3D.repulsive.v0.case2b", "3D.repulsive.v0.none"),
            n => match constant_in(n) {
                Ok(i_n) => {
                    let rhs = -0.5 * k * c.sqrt() * (1.0 - i_n);
                    Cmp::sides(lhs, rhs, Rel::Lt).verdict(r, "3D.repulsive.v0.case2c", "3D.repulsive.v0.none")
                }
                Err(e) => Verdict::failed(r, "3D.repulsive.v0.case2c", &e),
            },
        },
        Side::Pos => {
            let d = r * q.c_prime;
            match q.n {
                3 => {
                    let t1 = -0.75 * (c + d).sqrt();
                    let t2 = 0.5 * c.sqrt() * (1.0 - d / (2.0 * c)) * ((c.sqrt() + (c + d).sqrt()) / d.sqrt()).ln();
                    Cmp::new(lhs, t1 + t2, lhs.abs() + t1.abs() + t2.abs(), Rel::Le).verdict(r, "3D.repulsive.v0.case3a", "3D.repulsive.v0.none")
                }
                4 => Cmp::sides(lhs, -(2.0 * d).sqrt(), Rel::Le).verdict(r, "3D.repulsive.v0.case3b", "3D.repulsive.v0.none"),
                n => match rest_bound(n, c, d) {
                    Ok((rhs, scale)) => Cmp::new(lhs, rhs, lhs.abs() + scale, Rel::Le).verdict(r, "3D.repulsive.v0.case3c", "3D.repulsive.v0.none"),
                    Err(e) => Verdict::failed(r, "3D.repulsive.v0.case3c", &e),
                },
            }
        }
    })
}

/// Right-hand side of the `n >= 5`, `∂C > 0` rest condition with `D = R ∂C`.
pub(crate) fn rest_bound(n: u32, c: f64, d: f64) -> Result<(f64, f64)> {
    let k = n as f64 - 2.0;
    let q = 1.0 + k * c / d;
    let t1 = -(k.sqrt() * d.powf(1.5) / (4.0 * c)) * q.powf(n as f64 / (2.0 * k));
    let a = (1.0 + d / (k * c)).sqrt();
    let bracket = a - in_tail(n, a)?;
    let t2 = -0.5 * k * c.sqrt() * (1.0 - d / (2.0 * c)) * bracket;
    Ok((t1 + t2, t1.abs() + t2.abs()))
}

/// `∫_a^∞ ((1 - y^-2)^(-1/(n-2)) - 1) dy` for `a >= 1`.
pub(crate) fn in_tail(n: u32, a: f64) -> Result<f64> {
    let k = n as f64 - 2.0;
    let tol = Tolerance::new(1e-12, 1e-300);
    if a >= 2.0 {
        let spec = IntegralSpec::new(move |y: f64| (-(-(y * y).recip()).ln_1p() / k).exp_m1(), a, f64::INFINITY).decay(2.0);
        return Ok(integrate(&spec, tol)?.value);
    }
    let head = IntegralSpec::new(
        move |u: f64| {
            let u2 = u * u;
            let base = u2 * (2.0 + u2) / ((1.0 + u2) * (1.0 + u2));
            2.0 * u * (base.powf(-1.0 / k) - 1.0)
        },
        0.0,
        (a - 1.0).max(0.0).sqrt(),
    );
    Ok(constant_in(n)? - integrate(&head, tol)?.value)
}

fn negative(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    if q.a == 0.0 {
        return Verdict::breakdown(r, "3D.repulsive.vneg.vacuum", -1.0);
    }
    let dts = match turning_time(q) {
        Ok(t) => 2.0 * t.t_star_prime,
        Err(e) => return Verdict::failed(r, "3D.repulsive.vneg.case2", &e),
    };
    let scale = q.c_prime_scale();
    let b1 = q.a_prime * r.powf(-q.k());
    let b2 = q.a_prime * q.c / q.a;
    split3(q.c_prime, scale, |side| match side {
        Side::Neg => Verdict::breakdown(r, "3D.repulsive.vneg.case1", q.c_prime / scale),
        Side::Zero => phi_verdict(r, phi_semi_infinite(q), dts, Rel::Lt, "3D.repulsive.vneg.case2", "3D.repulsive.vneg.none"),
        Side::Pos => split2(Cmp::new(q.c_prime, b1, scale, Rel::Le), |below| {
            if below {
                phi_verdict(r, phi_finite(q), dts, Rel::Le, "3D.repulsive.vneg.case3", "3D.repulsive.vneg.none")
            } else {
                let upper = Cmp::new(q.c_prime, b2, scale + b2.abs(), Rel::Lt);
                split2(upper, |between| {
                    if between {
                        phi_verdict(r, phi_finite(q), dts.max(0.0), Rel::Le, "3D.repulsive.vneg.case4", "3D.repulsive.vneg.none")
                    } else {
                        Verdict::breakdown(r, "3D.repulsive.vneg.case5", -upper.margin())
                    }
                })
            }
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcfb::Status;
    use crate::profiles::ProblemConfig;

    #[test]
    fn uniform_static_3d_is_safe() {
        let cfg = ProblemConfig::new(3, -1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, 1.0, 1.0 / 3.0, 1.0, 0.0, 0.0);
        let v = pcfb_nd_repulsive(&q);
        assert_eq!(v.status, Status::NoBreakdown, "{v:?}");
        assert_eq!(v.condition_id, "3D.repulsive.v0.none");
    }

    #[test]
    fn negative_dc_always_breaks() {
        for n in [3u32, 4, 6] {
            let cfg = ProblemConfig::new(n, -1.0).unwrap();
            for v0 in [-0.5, 0.0, 0.5] {
                let q = ThresholdQuantities::from_scalars(cfg, 1.0, 0.2, 0.0, v0, -3.0 * v0.signum() - 3.0 * (v0 == 0.0) as i32 as f64);
                if q.c_prime < 0.0 {
                    assert_eq!(pcfb_nd_repulsive(&q).status, Status::Breakdown);
                }
            }
        }
    }

    #[test]
    fn inward_without_mass_breaks() {
        let cfg = ProblemConfig::new(3, -1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, 1.0, 0.0, 0.0, -0.3, 0.0);
        assert_eq!(pcfb_nd_repulsive(&q).condition_id, "3D.repulsive.vneg.vacuum");
    }

    #[test]
    fn rest_bound_reduces_to_4d() {
        for &(c, d) in &[(1.0, 0.5), (0.3, 2.0), (2.0, 2.0)] {
            let (rhs, _) = rest_bound(4, c, d).unwrap();
            assert!((rhs + (2.0 * d).sqrt()).abs() < 1e-10, "{rhs}");
        }
    }

    #[test]
    fn in_tail_routes_agree() {
        for n in [4u32, 5, 9] {
            let k = n as f64 - 2.0;
            let h = 1e-6;
            let near = in_tail(n, 2.0 - h).unwrap();
            let far = in_tail(n, 2.0).unwrap();
            let f2 = 0.75f64.powf(-1.0 / k) - 1.0;
            assert!((near - far - f2 * h).abs() < 1e-11, "n={n}");
        }
        // n = 4: the tail from a is a - sqrt(a^2 - 1).
        let a: f64 = 1.3;
        assert!((in_tail(4, a).unwrap() - (a - (a * a - 1.0).sqrt())).abs() < 1e-10);
    }
}
