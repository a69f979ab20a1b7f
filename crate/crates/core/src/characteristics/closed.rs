use super::{EventKind, Launch};
use crate::error::{Error, Result};

/// Smallest `t > 0` with `a t^2 + b t + c = 0`, given `c > 0`.
pub(crate) fn first_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if a == 0.0 {
        return (b < 0.0).then(|| -c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|&t| t > 0.0)
}

/// `(X, Γ)` for `n = 1`. Valid for either sign of `λ` until `X` or `Γ` vanish.
pub fn closed_form_1d(l: &Launch, t: f64) -> Result<(f64, f64)> {
    if l.n != 1 {
        return Err(Error::Config(format!("1-D closed form needs n = 1, got {}", l.n)));
    }
    let x = l.r + l.v0 * t - 0.5 * l.lambda * l.m0 * t * t;
    let g = 1.0 + l.v0_prime * t - 0.5 * l.lambda * l.rho0 * t * t;
    Ok((x, g))
}

fn signed_c_4d(l: &Launch) -> (f64, f64) {
    let r = l.r;
    let c = l.v0 * l.v0 - l.lambda * l.m0 / (r * r);
    let dc = 2.0 * l.v0 * l.v0_prime - l.lambda * r * l.rho0 + 2.0 * l.lambda * l.m0 / (r * r * r);
    (c, dc)
}

/// `(X, Γ)` for `n = 4` with the signed `C`. Errors once the radicand of `X`
/// has vanished.
pub fn closed_form_4d(l: &Launch, t: f64) -> Result<(f64, f64)> {
    if l.n != 4 {
        return Err(Error::Config(format!("4-D closed form needs n = 4, got {}", l.n)));
    }
    let r = l.r;
    let (c, dc) = signed_c_4d(l);
    if let Some(tc) = first_positive_root(c, 2.0 * l.v0 * r, r * r) {
        if tc <= t {
            return Err(Error::XZero { t_c: tc });
        }
    }
    let x = (r * r + 2.0 * l.v0 * r * t + c * t * t).sqrt();
    let g = (2.0 * r + 2.0 * (l.v0 + l.v0_prime * r) * t + dc * t * t) / (2.0 * x);
    Ok((x, g))
}

/// Earliest zero of `X` or `Γ` predicted by the closed forms (`n = 1, 4`).
pub fn closed_form_event(l: &Launch) -> Option<(EventKind, f64)> {
    let (x_root, g_root) = match l.n {
        1 => (
            first_positive_root(-0.5 * l.lambda * l.m0, l.v0, l.r),
            first_positive_root(-0.5 * l.lambda * l.rho0, l.v0_prime, 1.0),
        ),
        4 => {
            let (c, dc) = signed_c_4d(l);
            let r = l.r;
            (
                first_positive_root(c, 2.0 * l.v0 * r, r * r),
                first_positive_root(dc, 2.0 * (l.v0 + l.v0_prime * r), 2.0 * r),
            )
        }
        _ => return None,
    };
    match (x_root, g_root) {
        (Some(x), Some(g)) if g < x => Some((EventKind::GammaZero, g)),
        (Some(x), _) => Some((EventKind::XZero, x)),
        (None, Some(g)) => Some((EventKind::GammaZero, g)),
        (None, None) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn launch(n: u32, lambda: f64, m0: f64, rho0: f64, v0: f64, v0_prime: f64) -> Launch {
        Launch {
            n,
            lambda,
            r: 1.0,
            m0,
            rho0,
            v0,
            v0_prime,
        }
    }

    #[test]
    fn roots() {
        // t^2 - 3t + 1
        let t = first_positive_root(1.0, -3.0, 1.0).unwrap();
        assert!((t - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert_eq!(first_positive_root(1.0, 1.0, 1.0), None);
        assert_eq!(first_positive_root(0.0, -2.0, 1.0), Some(0.5));
        assert_eq!(first_positive_root(0.0, 2.0, 1.0), None);
    }

    #[test]
    fn initial_values() {
        let l = launch(1, -1.0, 0.4, 2.0, 0.3, -3.0);
        assert_eq!(closed_form_1d(&l, 0.0).unwrap(), (1.0, 1.0));
        let l = launch(4, -1.0, 0.25, 1.0, 0.3, -0.1);
        let (x, g) = closed_form_4d(&l, 0.0).unwrap();
        assert!((x - 1.0).abs() < 1e-15 && (g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_gamma_event() {
        // |λ| ρ0 = 2, v0' = -3.
        let l = launch(1, -1.0, 0.5, 2.0, 0.0, -3.0);
        let (kind, t) = closed_form_event(&l).unwrap();
        assert_eq!(kind, EventKind::GammaZero);
        assert!((t - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn attractive_collapse() {
        let l = launch(1, 2.0, 0.5, 0.0, 0.0, 0.0);
        let (kind, t) = closed_form_event(&l).unwrap();
        assert_eq!(kind, EventKind::XZero);
        assert!((t - (2.0f64 / (2.0 * 0.5)).sqrt()).abs() < 1e-15);
        // n = 4, v0 = 0, C < 0: radicand vanishes at R / sqrt(-C).
        let l = launch(4, 1.0, 0.25, 1.0, 0.0, 0.0);
        let c = -0.25;
        match closed_form_4d(&l, 10.0) {
            Err(Error::XZero { t_c }) => assert!((t_c - 1.0 / (-c as f64).sqrt()).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }
}
