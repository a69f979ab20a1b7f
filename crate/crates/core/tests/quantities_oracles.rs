use ep_threshold::profiles::{InitialData, ProblemConfig, ProfileKind, RadialProfile};
use ep_threshold::quadrature::{integrate, IntegralSpec, Tolerance};
use ep_threshold::quantities::{constant_in, threshold_quantities, turning_time, ThresholdQuantities};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(rng: &mut ChaCha8Rng) -> InitialData {
    let rho = RadialProfile::new(ProfileKind::Gaussian {
        amplitude: rng.gen_range(0.2..2.0),
        width: rng.gen_range(0.5..3.0),
    })
    .unwrap();
    let v = RadialProfile::new(ProfileKind::PowerTimesSine {
        amplitude: rng.gen_range(-1.0..1.0),
        power: 1.0,
        frequency: rng.gen_range(0.2..2.0),
    })
    .unwrap();
    InitialData::new(rho, v).unwrap()
}

fn central<F: Fn(f64) -> f64>(f: F, r: f64) -> f64 {
    let h = 1e-4 * r;
    (8.0 * (f(r + h) - f(r - h)) - (f(r + 2.0 * h) - f(r - 2.0 * h))) / (12.0 * h)
}

#[test]
fn radial_derivatives_match_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let data = random_data(&mut rng);
        let n = [2u32, 3, 4, 5, 7][rng.gen_range(0..5)];
        let cfg = ProblemConfig::new(n, if rng.gen_bool(0.5) { -1.0 } else { 0.7 }).unwrap();
        let r = rng.gen_range(0.2..4.0);
        let q = threshold_quantities(&data, cfg, r).unwrap();
        let at = |s: f64| threshold_quantities(&data, cfg, s).unwrap();
        let dc = central(|s| at(s).c, r);
        let da = central(|s| at(s).a, r);
        assert!((dc - q.c_prime).abs() <= 1e-6 * q.c_prime_scale(), "n={n} r={r} {dc} {}", q.c_prime);
        assert!((da - q.a_prime).abs() <= 1e-6 * (q.a_prime.abs() + q.a / r), "n={n} r={r} {da} {}", q.a_prime);
    }
}

/// `t*` as the fall time `∫_{X_t}^R dX / sqrt(X'^2(X))` with `x = X_t + u^2`.
fn fall_time(q: &ThresholdQuantities) -> f64 {
    let (r, v0) = (q.r, q.v0);
    let lm = -q.lambda * q.m0;
    let k = q.n as f64 - 2.0;
    // Turning radius from X'^2(X_t) = 0.
    let a = if q.n == 2 {
        r * (-v0 * v0 / (2.0 * lm)).exp()
    } else {
        (r.powf(-k) + k * v0 * v0 / (2.0 * lm)).powf(-1.0 / k)
    };
    let f = move |u: f64| {
        let e = u * u / a;
        let s = if q.n == 2 {
            2.0 * lm * e.ln_1p()
        } else {
            -2.0 * lm / k * a.powf(-k) * (-k * e.ln_1p()).exp_m1()
        };
        2.0 * u / s.sqrt()
    };
    integrate(&IntegralSpec::new(f, 0.0, (r - a).sqrt()), Tolerance::new(1e-12, 1e-300)).unwrap().value
}

#[test]
fn turning_time_matches_fall_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let n = [2u32, 3, 4, 6][rng.gen_range(0..4)];
        let cfg = ProblemConfig::new(n, -rng.gen_range(0.3..2.0)).unwrap();
        let q = ThresholdQuantities::from_scalars(
            cfg,
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.0..2.0),
            -rng.gen_range(0.05..2.0),
            rng.gen_range(-1.0..1.0),
        );
        let t = turning_time(&q).unwrap().t_star;
        let oracle = fall_time(&q);
        assert!((t - oracle).abs() <= 1e-8 * oracle, "n={n} {t} {oracle}");
    }
}

#[test]
fn turning_time_derivative_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for _ in 0..60 {
        let data = random_data(&mut rng);
        let n = [2u32, 3, 5][rng.gen_range(0..3)];
        let cfg = ProblemConfig::new(n, -1.0).unwrap();
        let r = rng.gen_range(0.3..3.0);
        let q = threshold_quantities(&data, cfg, r).unwrap();
        if q.v0 > -0.05 {
            continue;
        }
        let t = |s: f64| turning_time(&threshold_quantities(&data, cfg, s).unwrap()).unwrap().t_star;
        let fd = central(t, r);
        let exact = turning_time(&q).unwrap().t_star_prime;
        assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "n={n} r={r} {fd} {exact}");
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} instances had v0 < 0");
}

#[test]
fn four_d_turning_time_is_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = ProblemConfig::new(4, -1.0).unwrap();
    for _ in 0..100 {
        let q = ThresholdQuantities::from_scalars(
            cfg,
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.01..3.0),
            rng.gen_range(0.0..2.0),
            -rng.gen_range(0.01..3.0),
            rng.gen_range(-1.0..1.0),
        );
        let t = turning_time(&q).unwrap().t_star;
        let exact = q.v0.abs() * q.r / q.c;
        assert!((t - exact).abs() <= 1e-9 * exact);
    }
}

/// `I_n` through `y = 1/sin θ`.
fn in_by_angle(n: u32) -> f64 {
    let k = n as f64 - 2.0;
    let f = move |th: f64| {
        let s = th.sin();
        // cos^(-2/k) - 1 with log cos = ln(1 - 2 sin^2(θ/2))
        let h = (0.5 * th).sin();
        let lc = (-2.0 * h * h).ln_1p();
        (-2.0 / k * lc).exp_m1() * th.cos() / (s * s)
    };
    integrate(&IntegralSpec::new(f, 0.0, std::f64::consts::FRAC_PI_2), Tolerance::new(1e-12, 1e-14))
        .unwrap()
        .value
}

#[test]
fn constant_in_two_routes() {
    assert!((constant_in(4).unwrap() - 1.0).abs() < 1e-10);
    let mut prev = f64::INFINITY;
    for n in 4..=12 {
        let a = constant_in(n).unwrap();
        let b = in_by_angle(n);
        assert!((a - b).abs() < 1e-9, "n={n} {a} {b}");
        assert!(a < prev);
        prev = a;
    }
}
