use super::{any_of, Cmp, Rel, Verdict};
use crate::quantities::ThresholdQuantities;

/// Attractive coupling (`λ > 0`).
///
/// `n = 1, 2`: breakdown iff `ρ0 > 0`, `v0 < 0` or `v0' < 0`.
/// `n >= 3`: breakdown iff `v0 < 0`, `C < 0` or `∂C < 0` with the signed `C`.
pub fn pcfb_attractive(q: &ThresholdQuantities) -> Verdict {
    let sign = |x: f64| Cmp::new(x, 0.0, x.abs(), Rel::Lt);
    if q.n <= 2 {
        return any_of(
            q.r,
            &[
                (Cmp::new(0.0, q.rho0, q.rho0.abs(), Rel::Lt), "attractive.n12.density"),
                (sign(q.v0), "attractive.n12.vneg"),
                (sign(q.v0_prime), "attractive.n12.slope"),
            ],
            "attractive.n12.none",
        );
    }
    any_of(
        q.r,
        &[
            (sign(q.v0), "attractive.n3.vneg"),
            (Cmp::new(q.c, 0.0, q.c_scale(), Rel::Lt), "attractive.n3.Cneg"),
            (Cmp::new(q.c_prime, 0.0, q.c_prime_scale(), Rel::Lt), "attractive.n3.dCneg"),
        ],
        "attractive.n3.none",
    )
}
