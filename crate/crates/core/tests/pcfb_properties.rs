use ep_threshold::characteristics::{closed_form_event, Launch};
use ep_threshold::pcfb::{pcfb_4d_closed, pcfb_at, pcfb_nd_repulsive, Status, Verdict, CONDITION_IDS, SNAP, TAU};
use ep_threshold::profiles::ProblemConfig;
use ep_threshold::quantities::ThresholdQuantities;
use proptest::prelude::*;

fn scalars() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.05f64..5.0, 0.0f64..3.0, 0.0f64..3.0, -2.0f64..2.0, -3.0f64..3.0)
}

fn check_shape(v: &Verdict) -> std::result::Result<(), TestCaseError> {
    prop_assert!(CONDITION_IDS.contains(&v.condition_id), "unknown id {}", v.condition_id);
    prop_assert!(!v.margin.is_nan());
    match v.status {
        Status::Breakdown => prop_assert!(v.margin <= SNAP, "{v:?}"),
        Status::NoBreakdown => prop_assert!(v.margin >= -SNAP, "{v:?}"),
        Status::Marginal => {
            if v.note.is_none() {
                prop_assert!(v.margin.abs() < TAU, "{v:?}")
            }
        }
    }
    if v.note.is_none() && v.margin.abs() > SNAP && v.margin.abs() < TAU {
        prop_assert_eq!(v.status, Status::Marginal);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn verdicts_are_well_formed(n in 1u32..8, attractive in any::<bool>(), (r, m0, rho0, v0, vp) in scalars()) {
        let cfg = ProblemConfig::new(n, if attractive { 0.8 } else { -0.8 }).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, r, m0, rho0, v0, vp);
        check_shape(&pcfb_at(&q))?;
    }

    #[test]
    fn four_d_general_agrees_with_closed_form((r, m0, rho0, v0, vp) in scalars()) {
        let cfg = ProblemConfig::new(4, -1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, r, m0, rho0, v0, vp);
        let (a, b) = (pcfb_nd_repulsive(&q), pcfb_4d_closed(&q));
        if a.margin.abs() > 1e-6 && b.margin.abs() > 1e-6 && a.status != Status::Marginal && b.status != Status::Marginal {
            prop_assert_eq!(a.status, b.status, "{:?} vs {:?}", a, b);
        }
    }

    /// In 1-D and 4-D the criteria are sharp: they hold exactly when the
    /// closed-form characteristic reaches Γ = 0 or X = 0.
    #[test]
    fn sharp_dimensions_match_closed_form_events(four in any::<bool>(), (r, m0, rho0, v0, vp) in scalars()) {
        let n = if four { 4 } else { 1 };
        let cfg = ProblemConfig::new(n, -1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, r, m0, rho0, v0, vp);
        let v = pcfb_at(&q);
        let event = closed_form_event(&Launch::from(&q)).is_some();
        if v.status != Status::Marginal && v.margin.abs() > 1e-6 {
            prop_assert_eq!(v.status == Status::Breakdown, event, "{:?}", v);
        }
    }

    /// At rest, a steeper compression cannot undo a breakdown verdict.
    #[test]
    fn rest_verdict_is_monotone_in_slope(n in 3u32..8, (r, m0, rho0, _v0, vp) in scalars(), drop in 0.0f64..3.0) {
        let cfg = ProblemConfig::new(n, -1.0).unwrap();
        let a = pcfb_at(&ThresholdQuantities::from_scalars(cfg, r, m0, rho0, 0.0, vp));
        let b = pcfb_at(&ThresholdQuantities::from_scalars(cfg, r, m0, rho0, 0.0, vp - drop));
        if a.status == Status::Breakdown {
            prop_assert_ne!(b.status, Status::NoBreakdown, "{:?} -> {:?}", a, b);
        }
    }

    /// Attractive data with negative energy always breaks down for n >= 3.
    #[test]
    fn bound_attractive_states_break(n in 3u32..8, (r, m0, rho0, v0, vp) in scalars()) {
        let cfg = ProblemConfig::new(n, 1.0).unwrap();
        let q = ThresholdQuantities::from_scalars(cfg, r, m0, rho0, v0, vp);
        if q.c < -1e-6 * q.c_scale() {
            prop_assert_eq!(pcfb_at(&q).status, Status::Breakdown);
        }
    }

    /// Tiny velocities land in the same branch as exact rest, or are marginal.
    #[test]
    fn velocity_sign_dispatch_is_continuous(n in 2u32..7, (r, m0, rho0, _v0, vp) in scalars(), eps in -1e-12f64..1e-12) {
        let cfg = ProblemConfig::new(n, -1.0).unwrap();
        let rest = pcfb_at(&ThresholdQuantities::from_scalars(cfg, r, m0, rho0, 0.0, vp));
        let near = pcfb_at(&ThresholdQuantities::from_scalars(cfg, r, m0, rho0, eps, vp));
        if near.status != Status::Marginal && rest.status != Status::Marginal {
            prop_assert_eq!(near.status, rest.status, "{:?} vs {:?}", rest, near);
        }
    }
}
