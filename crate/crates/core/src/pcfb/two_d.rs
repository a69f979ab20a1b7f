use super::repulsive_nd::phi_verdict;
use super::{dispatch_v0, split2, Cmp, Rel, Side, Verdict};
use crate::error::Result;
use crate::pcfb::integrals::phi_finite;
use crate::quantities::{dawson_integral, turning_time, ThresholdQuantities};

/// Repulsive criterion in two dimensions.
pub fn pcfb_2d_repulsive(q: &ThresholdQuantities) -> Verdict {
    dispatch_v0(q, |q, side| match side {
        Side::Pos => positive(q),
        Side::Zero => at_rest(q),
        Side::Neg => negative(q),
    })
}

fn positive(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    let dv2 = q.dv2();
    let gate = Cmp::new(dv2, q.a / r, dv2.abs() + q.a / r, Rel::Lt);
    split2(gate, |inside| {
        if !inside {
            Verdict::safe(r, "2D.repulsive.vpos.gate", gate.margin())
        } else if q.a_prime == 0.0 {
            Verdict::breakdown(r, "2D.repulsive.vpos.case1", -1.0)
        } else {
            phi_verdict(r, phi_finite(q), 0.0, Rel::Le, "2D.repulsive.vpos.case2", "2D.repulsive.vpos.none")
        }
    })
}

fn at_rest(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    if q.a == 0.0 {
        return Cmp::new(q.v0_prime, 0.0, q.v0_prime.abs(), Rel::Lt).verdict(r, "2D.repulsive.v0.vacuum", "2D.repulsive.v0.none");
    }
    if q.a_prime == 0.0 {
        return Verdict::breakdown(r, "2D.repulsive.v0.case1", -1.0);
    }
    let lhs = r * q.v0_prime;
    match rest_bound(r, q.a, q.a_prime) {
        Ok(rhs) if rhs.is_infinite() => {
            if rhs > 0.0 {
                Verdict::breakdown(r, "2D.repulsive.v0.case2", -1.0)
            } else {
                Verdict::safe(r, "2D.repulsive.v0.none", 1.0)
            }
        }
        Ok(rhs) => Cmp::new(lhs, rhs, lhs.abs() + rhs.abs(), Rel::Le).verdict(r, "2D.repulsive.v0.case2", "2D.repulsive.v0.none"),
        Err(e) => Verdict::failed(r, "2D.repulsive.v0.case2", &e),
    }
}

/// `e^x [ -sqrt(R ∂A)/2 + (2A - R ∂A)/(2 sqrt A) D(sqrt x) ]` with `x = A/(R ∂A)`,
/// evaluated as `sgn(b) exp(x + ln|b|)` so that large `x` saturates to `±∞`.
pub(crate) fn rest_bound(r: f64, a: f64, da: f64) -> Result<f64> {
    let x = a / (r * da);
    let b = a.sqrt() * rest_bracket(x.sqrt())?;
    if b == 0.0 {
        return Ok(0.0);
    }
    Ok(b.signum() * (x + b.abs().ln()).exp())
}

/// `(1 - 1/(2s^2)) D(s) - 1/(2s)`. The first two orders of the asymptotic
/// series of `D` cancel, so large `s` sums the remainder directly:
/// `Σ_{j>=2} (2j-2)/(2j-1) c_j` with `c_j = (2j-1)!! / (2^(j+1) s^(2j+1))`.
pub(crate) fn rest_bracket(s: f64) -> Result<f64> {
    if s < 6.0 {
        return Ok((1.0 - 0.5 / (s * s)) * dawson_integral(s)? - 0.5 / s);
    }
    let q = 0.5 / (s * s);
    // c_1 = 1/(4 s^3)
    let mut c = 0.25 / (s * s * s);
    let mut sum = 0.0;
    for j in 2..200 {
        let next = c * (2 * j - 1) as f64 * q;
        if next >= c {
            break;
        }
        c = next;
        let term = c * (2 * j - 2) as f64 / (2 * j - 1) as f64;
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    Ok(sum)
}

fn negative(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    if q.a == 0.0 {
        return Verdict::breakdown(r, "2D.repulsive.vneg.vacuum", -1.0);
    }
    if q.a_prime == 0.0 {
        return Verdict::breakdown(r, "2D.repulsive.vneg.case1", -1.0);
    }
    let dts = match turning_time(q) {
        Ok(t) => 2.0 * t.t_star_prime,
        Err(e) => return Verdict::failed(r, "2D.repulsive.vneg.case2c", &e),
    };
    let dv2 = q.dv2();
    let low = q.a / r;
    let high = low + q.a_prime * q.v0 * q.v0 / q.a;
    let scale = dv2.abs() + high;
    split2(Cmp::new(high, dv2, scale, Rel::Le), |steep| {
        if steep {
            Verdict::breakdown(r, "2D.repulsive.vneg.case2a", (dv2 - high) / -scale)
        } else {
            split2(Cmp::new(low, dv2, scale, Rel::Le), |mid| {
                if mid {
                    phi_verdict(r, phi_finite(q), dts.max(0.0), Rel::Le, "2D.repulsive.vneg.case2b", "2D.repulsive.vneg.none")
                } else {
                    phi_verdict(r, phi_finite(q), dts, Rel::Le, "2D.repulsive.vneg.case2c", "2D.repulsive.vneg.none")
                }
            })
        }
    })
}
