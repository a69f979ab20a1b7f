use super::{any_of, Cmp, Rel, Verdict};
use crate::quantities::ThresholdQuantities;

/// One-dimensional repulsive criterion.
///
/// Breakdown iff `v0 <= -sqrt(2|λ| R m0)` or `v0' <= -sqrt(2|λ| ρ0)`; when a
/// right-hand side vanishes, equality with zero is admissible and only the
/// strict inequality signals breakdown.
pub fn pcfb_1d(q: &ThresholdQuantities) -> Verdict {
    let l = q.lambda.abs();
    let bound_v = -(2.0 * l * q.r * q.m0).sqrt();
    let bound_s = -(2.0 * l * q.rho0).sqrt();
    let rel = |b: f64| if b == 0.0 { Rel::Lt } else { Rel::Le };
    let slope = if q.rho0 < f64::MIN_POSITIVE && q.ln_rho0.is_finite() && q.v0_prime < 0.0 {
        // ρ0 has underflowed: compare v0'^2 >= 2|λ|ρ0 in logs.
        let (lhs, rhs) = ((2.0 * l).ln() + q.ln_rho0, 2.0 * (-q.v0_prime).ln());
        Cmp::new(lhs, rhs, lhs.abs() + rhs.abs(), Rel::Le)
    } else {
        Cmp::sides(q.v0_prime, bound_s, rel(bound_s))
    };
    any_of(
        q.r,
        &[(Cmp::sides(q.v0, bound_v, rel(bound_v)), "1D.velocity"), (slope, "1D.slope")],
        "1D.none",
    )
}
