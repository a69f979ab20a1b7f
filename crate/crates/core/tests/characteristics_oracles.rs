use ep_threshold::characteristics::{
    closed_form_1d, closed_form_4d, closed_form_event, detect_breakdown, reconstruct, simulate, simulate_fan, simulate_launch, CharTrajectory,
    EventKind, Launch, SimConfig,
};
use ep_threshold::pcfb::{pcfb_at, Status};
use ep_threshold::profiles::{InitialData, ProblemConfig, ProfileKind, RadialProfile};
use ep_threshold::quantities::ThresholdQuantities;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn launch(n: u32, lambda: f64, r: f64, m0: f64, rho0: f64, v0: f64, v0_prime: f64) -> Launch {
    Launch {
        n,
        lambda,
        r,
        m0,
        rho0,
        v0,
        v0_prime,
    }
}

fn random_launch(rng: &mut ChaCha8Rng, n: u32) -> Launch {
    launch(
        n,
        -rng.gen_range(0.2..2.0),
        rng.gen_range(0.3..3.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(-0.5..1.0),
        rng.gen_range(-0.3..1.0),
    )
}

#[test]
fn integrator_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let outputs: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
    let sim = SimConfig {
        outputs: outputs.clone(),
        ..SimConfig::with_horizon(5.0)
    };
    for n in [1u32, 4] {
        for _ in 0..20 {
            let l = random_launch(&mut rng, n);
            let tr = simulate_launch(l, &sim).unwrap();
            let end = tr.event.map_or(5.0, |e| e.t_c);
            for s in tr.samples.iter().filter(|s| s.t < end) {
                let (x, g) = if n == 1 { closed_form_1d(&l, s.t).unwrap() } else { closed_form_4d(&l, s.t).unwrap() };
                assert!((s.x - x).abs() <= 1e-8, "n={n} t={} {} {x}", s.t, s.x);
                assert!((s.gamma - g).abs() <= 1e-7, "n={n} t={} {} {g}", s.t, s.gamma);
            }
            match (tr.event, closed_form_event(&l)) {
                (Some(e), Some((kind, t))) if t <= 5.0 => {
                    assert_eq!(e.kind, kind);
                    assert!((e.t_c - t).abs() <= 1e-8 * (1.0 + t), "{} {t}", e.t_c);
                }
                (None, None) => {}
                (None, Some((_, t))) => assert!(t > 5.0),
                (e, c) => panic!("simulated {e:?}, closed form {c:?}"),
            }
        }
    }
}

#[test]
fn quadratic_fixture_event_time() {
    // |λ| ρ0 = 2, v0' = -3: Γ = 1 - 3t + t^2.
    let l = launch(1, -1.0, 1.0, 0.5, 2.0, 0.0, -3.0);
    let tr = simulate_launch(l, &SimConfig::with_horizon(5.0)).unwrap();
    let e = detect_breakdown(&tr).unwrap();
    assert_eq!(e.kind, EventKind::GammaZero);
    let exact = (3.0 - 5f64.sqrt()) / 2.0;
    assert!((e.t_c - exact).abs() <= 1e-9);
    assert!(e.bracket.0 <= e.t_c && e.t_c <= e.bracket.1);
    assert!(e.bracket.1 - e.bracket.0 <= 1e-9 * (1.0 + e.t_c));
}

fn smooth_data(rng: &mut ChaCha8Rng) -> InitialData {
    let rho = RadialProfile::new(ProfileKind::RationalDecay {
        amplitude: rng.gen_range(0.3..2.0),
        scale: rng.gen_range(0.5..2.0),
        power: rng.gen_range(1.0..3.0),
    })
    .unwrap();
    let v = RadialProfile::new(ProfileKind::PowerTimesSine {
        amplitude: rng.gen_range(0.0..0.5),
        power: 1.0,
        frequency: rng.gen_range(0.2..1.0),
    })
    .unwrap();
    InitialData::new(rho, v).unwrap()
}

#[test]
fn gamma_is_the_radial_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let outputs: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    let sim = SimConfig {
        outputs: outputs.clone(),
        ..SimConfig::with_horizon(5.0)
    };
    for _ in 0..20 {
        let data = smooth_data(&mut rng);
        let n = rng.gen_range(2..6);
        let r = rng.gen_range(0.5..2.0);
        let h = 1e-5 * r;
        let mid = simulate(&data, n, -1.0, r, &sim).unwrap();
        let hi = simulate(&data, n, -1.0, r + h, &sim).unwrap();
        let lo = simulate(&data, n, -1.0, r - h, &sim).unwrap();
        let end = [&mid, &hi, &lo].iter().filter_map(|t| t.event.map(|e| e.t_c)).fold(f64::INFINITY, f64::min);
        for &t in outputs.iter().filter(|&&t| t < end) {
            let g = mid.at(t).unwrap().gamma;
            let fd = (hi.at(t).unwrap().x - lo.at(t).unwrap().x) / (2.0 * h);
            assert!((g - fd).abs() <= 1e-5 * g.abs().max(1e-3), "n={n} R={r} t={t} {g} {fd}");
        }
    }
}

#[test]
fn energy_identity_holds_along_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let n = rng.gen_range(1..7);
        let mut l = random_launch(&mut rng, n);
        if rng.gen_bool(0.3) {
            l.lambda = -l.lambda;
        }
        let tr = simulate_launch(l, &SimConfig::with_horizon(20.0)).unwrap();
        assert!(tr.max_energy_residual() <= 1e-7, "{l:?} {}", tr.max_energy_residual());
    }
}

#[test]
fn outward_repulsive_characteristics_keep_moving_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..20 {
        let n = rng.gen_range(2..6);
        let mut l = random_launch(&mut rng, n);
        l.v0 = rng.gen_range(0.01..1.0);
        let tr = simulate_launch(l, &SimConfig::with_horizon(20.0)).unwrap();
        assert!(tr.samples.iter().all(|s| s.xp > 0.0));
    }
}

fn uniform(lambda: f64) -> (InitialData, f64) {
    (InitialData::new(RadialProfile::constant(1.0), RadialProfile::zero()).unwrap(), lambda)
}

fn fan_radii(count: usize, r_max: f64) -> Vec<f64> {
    (1..=count).map(|i| r_max * i as f64 / count as f64).collect()
}

#[test]
fn uniform_fan_conserves_mass() {
    let (data, lambda) = uniform(-1.0);
    let sim = SimConfig {
        outputs: vec![5.0],
        ..SimConfig::with_horizon(5.0)
    };
    let fan = simulate_fan(&data, 3, lambda, &fan_radii(50, 2.0), &sim).unwrap();
    let slice = reconstruct(&fan, 5.0).unwrap();
    assert!(slice.mass_relative_error() <= 1e-4, "{}", slice.mass_relative_error());
    assert!(slice.points.windows(2).all(|w| w[0].r < w[1].r));
    assert!(slice.points.iter().all(|p| p.rho >= 0.0));
    // Homogeneous expansion keeps the density uniform.
    let rho = slice.points[0].rho;
    assert!(slice.points.iter().all(|p| (p.rho - rho).abs() <= 1e-8 * rho));
}

#[test]
fn slice_at_launch_is_the_initial_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let data = smooth_data(&mut rng);
    let radii = fan_radii(10, 3.0);
    let fan = simulate_fan(&data, 3, -1.0, &radii, &SimConfig::with_horizon(1.0)).unwrap();
    let slice = reconstruct(&fan, 0.0).unwrap();
    for (p, &r) in slice.points.iter().zip(&radii) {
        assert_eq!(p.r, r);
        assert_eq!(p.rho, data.density(r));
        assert_eq!(p.v, data.velocity(r).unwrap());
    }
    let vac = simulate_fan(&InitialData::vacuum(), 2, -1.0, &radii, &SimConfig::with_horizon(2.0)).unwrap();
    assert!(reconstruct(&vac, 1.0).unwrap().points.iter().all(|p| p.rho == 0.0));
}

#[test]
fn broken_fan_is_rejected() {
    let l = launch(1, -1.0, 1.0, 0.5, 2.0, 0.0, -3.0);
    let tr: CharTrajectory = simulate_launch(l, &SimConfig::with_horizon(5.0)).unwrap();
    let err = reconstruct(&[tr], 1.0).unwrap_err();
    assert!(err.to_string().starts_with("fan-broken"), "{err}");
}

/// Breakdown verdicts at rest must be realized by the simulation, and data
/// just on the safe side must survive a long horizon.
#[test]
fn rest_threshold_sweep() {
    let sim = SimConfig::with_horizon(200.0);
    let mut checked = 0;
    for n in [3u32, 4, 5, 6] {
        let cfg = ProblemConfig::new(n, -1.0).unwrap();
        for &(m0, rho0) in &[(0.2, 1.5), (0.5, 0.9), (1.0, 0.4), (0.05, 2.0), (0.1, 3.0)] {
            let base = ThresholdQuantities::from_scalars(cfg, 1.0, m0, rho0, 0.0, 0.0);
            if !(base.c_prime > 0.0) {
                continue;
            }
            // Locate the threshold in v0' by bisection on the analytic verdict.
            let status = |vp: f64| pcfb_at(&ThresholdQuantities::from_scalars(cfg, 1.0, m0, rho0, 0.0, vp)).status;
            let (mut lo, mut hi) = (-50.0, 0.0);
            assert_eq!(status(lo), Status::Breakdown);
            assert_eq!(status(hi), Status::NoBreakdown);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if status(mid) == Status::Breakdown {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            for (factor, expect_event) in [(1.02, true), (0.98, false)] {
                let vp = lo * factor;
                let tr = simulate_launch(launch(n, -1.0, 1.0, m0, rho0, 0.0, vp), &sim).unwrap();
                assert_eq!(
                    detect_breakdown(&tr).is_some(),
                    expect_event,
                    "n={n} m0={m0} rho0={rho0} threshold={lo} v0'={vp} min Γ={}",
                    tr.min_gamma()
                );
            }
            checked += 1;
        }
    }
    assert!(checked >= 8, "{checked}");
}
