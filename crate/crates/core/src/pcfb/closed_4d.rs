use super::{split3, Cmp, Rel, Side, Verdict};
use crate::quantities::ThresholdQuantities;

/// Closed-form four-dimensional repulsive criterion.
///
/// Breakdown iff `A = 0` and `v0 < 0`, or `∂C < 0`, or `∂C = 0` and
/// `v0 + v0' R < 0`, or `∂C > 0` and `v0 + v0' R <= -sqrt(2 R ∂C)`.
pub fn pcfb_4d_closed(q: &ThresholdQuantities) -> Verdict {
    let r = q.r;
    if q.a == 0.0 && q.v0 < 0.0 {
        return Verdict::breakdown(r, "4D.closed.case1", -1.0);
    }
    let s = q.v0 + q.v0_prime * r;
    let s_scale = q.v0.abs() + (q.v0_prime * r).abs();
    split3(q.c_prime, q.c_prime_scale(), |side| match side {
        Side::Neg => Verdict::breakdown(r, "4D.closed.case2", q.c_prime / q.c_prime_scale()),
        Side::Zero => Cmp::new(s, 0.0, s_scale, Rel::Lt).verdict(r, "4D.closed.case3", "4D.closed.none"),
        Side::Pos => {
            let bound = -(2.0 * r * q.c_prime).sqrt();
            Cmp::new(s, bound, s_scale + bound.abs(), Rel::Le).verdict(r, "4D.closed.case4", "4D.closed.none")
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcfb::Status;
    use crate::profiles::ProblemConfig;

    fn cfg() -> ProblemConfig {
        ProblemConfig::new(4, -1.0).unwrap()
    }

    #[test]
    fn uniform_static_is_safe() {
        let q = ThresholdQuantities::from_scalars(cfg(), 1.0, 0.25, 1.0, 0.0, 0.0);
        assert!((q.c_prime - 0.5).abs() < 1e-15);
        let v = pcfb_4d_closed(&q);
        assert_eq!(v.status, Status::NoBreakdown);
    }

    #[test]
    fn inward_vacuum_breaks() {
        let q = ThresholdQuantities::from_scalars(cfg(), 1.0, 0.0, 0.0, -0.5, 0.0);
        assert_eq!(pcfb_4d_closed(&q).condition_id, "4D.closed.case1");
    }

    #[test]
    fn steep_compression_breaks() {
        let q = ThresholdQuantities::from_scalars(cfg(), 1.0, 0.25, 1.0, 0.0, -2.0);
        let v = pcfb_4d_closed(&q);
        assert_eq!(v.status, Status::Breakdown);
    }
}
