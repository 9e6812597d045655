//! Property tests for the invariants the engine is built around.

use proptest::prelude::*;
use tauspace_core::barycentric::{
    barycentric_velocity, boost_two_particle, invariant_mass, TwoParticleState,
};
use tauspace_core::hamiltonian::{free_relativistic, Hamiltonian};
use tauspace_core::phase::{
    compose_loop, interference_intensity, wrap_phase, BoostLoopElement, GroupElement,
    InterferometerScenario, VelocityProfile,
};
use tauspace_core::report::fmt_f64;
use tauspace_core::state::{ExtendedState, SpatialVec};

fn state_1d(p: f64, m: f64) -> ExtendedState {
    ExtendedState {
        t: 0.0,
        x: SpatialVec::scalar(0.0),
        p: SpatialVec::scalar(p),
        tau: 0.0,
        m,
    }
}

proptest! {
    #[test]
    fn free_clock_rate_is_sqrt_one_minus_v_squared(
        p in -50.0f64..50.0,
        m in 0.01f64..50.0,
    ) {
        let h = free_relativistic();
        let s = state_1d(p, m);
        let v = h.velocity(&s).unwrap().norm();
        prop_assert!(v < 1.0);
        let rate = h.proper_time_rate(&s).unwrap();
        // conditioning-proof form of the same identity: rate^2 + v^2 = 1
        prop_assert!((rate * rate + v * v - 1.0).abs() <= 1e-14);
        // the literal sqrt(1 - v^2) reference is itself computable to 1e-12
        // only away from the light cone (cancellation in 1 - v^2 otherwise)
        if v <= 0.999 {
            let expected = (1.0 - v * v).sqrt();
            prop_assert!((rate - expected).abs() <= 1e-12 * expected);
        }
    }

    // domains chosen so the explicit-formula evaluation stays conditioned to
    // ~5e-13; ultra-relativistic light pairs lose digits in E1 E2 - p1 p2
    // faster than any fixed tolerance can absorb
    #[test]
    fn invariant_mass_is_frame_independent(
        p1 in -3.0f64..3.0,
        m1 in 0.2f64..5.0,
        p2 in -3.0f64..3.0,
        m2 in 0.2f64..5.0,
        v in -0.95f64..0.95,
    ) {
        let s = TwoParticleState::new(p1, m1, p2, m2).unwrap();
        let mass = invariant_mass(&s);
        prop_assert!(mass >= m1 + m2 - 1e-12 * mass);

        let boosted = boost_two_particle(&s, v).unwrap();
        prop_assert!((invariant_mass(&boosted) - mass).abs() <= 1e-12 * mass);

        // the barycentric boost kills the total momentum
        let vstar = barycentric_velocity(&s).unwrap();
        let com = boost_two_particle(&s, vstar).unwrap();
        prop_assert!(com.total_momentum().abs() < 1e-12 * s.total_energy());

        // E = sqrt(P^2 + M^2) in the original frame
        let (e, p) = (s.total_energy(), s.total_momentum());
        prop_assert!((e - (p * p + mass * mass).sqrt()).abs() <= 1e-12 * e);
    }

    #[test]
    fn loop_phase_linear_in_mass_and_wrapped_in_band(
        v1 in -0.3f64..0.3,
        v2 in -0.3f64..0.3,
        wait in 0.01f64..3.0,
        shift in -2.0f64..2.0,
        m in 0.1f64..10.0,
    ) {
        // arbitrary open path, closed by undoing the residual boost and translation
        let mut elements = vec![
            BoostLoopElement::Boost(v1),
            BoostLoopElement::TimeTranslate(wait),
            BoostLoopElement::SpaceTranslate(shift),
            BoostLoopElement::Boost(v2),
        ];
        let mut g = GroupElement::IDENTITY;
        for e in &elements {
            g = g.compose(&GroupElement::from_element(e));
        }
        elements.push(BoostLoopElement::Boost(-g.v));
        let mut g2 = g.compose(&GroupElement::from_element(&BoostLoopElement::Boost(-g.v)));
        elements.push(BoostLoopElement::SpaceTranslate(-g2.a));
        g2 = g2.compose(&GroupElement::from_element(&BoostLoopElement::SpaceTranslate(-g2.a)));
        prop_assert!(g2.v.abs() < 1e-12 && g2.a.abs() < 1e-9);

        let one = compose_loop(&elements, &[m], 1.0).unwrap();
        let two = compose_loop(&elements, &[2.0 * m], 1.0).unwrap();
        prop_assert_eq!(
            two.report.entries[0].unwrapped.to_bits(),
            (2.0 * one.report.entries[0].unwrapped).to_bits()
        );
        let wrapped = one.report.entries[0].wrapped;
        prop_assert!((0.0..std::f64::consts::TAU).contains(&wrapped));
        let unwrapped = one.report.entries[0].unwrapped;
        let k = (unwrapped - wrapped) / std::f64::consts::TAU;
        prop_assert!((k - k.round()).abs() < 1e-6);
    }

    #[test]
    fn full_precision_format_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(parsed.to_bits(), x.to_bits());
    }

    #[test]
    fn wrapped_phase_is_consistent(phi in -1e6f64..1e6) {
        let w = wrap_phase(phi);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
        let k = (phi - w) / std::f64::consts::TAU;
        prop_assert!((k - k.round()).abs() < 1e-3);
    }

    #[test]
    fn interference_intensity_bounded_and_periodic(
        delta in 0.0f64..3.0,
        gamma in 0.0f64..2.0,
    ) {
        let t_span = 20.0;
        let run = |d: f64, g: f64| {
            let tau2 = t_span - d;
            let u = (1.0 - (tau2 / t_span).powi(2)).sqrt();
            let s = InterferometerScenario::new(
                t_span,
                VelocityProfile::Constant(0.0),
                VelocityProfile::Constant(u),
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
                vec![1.0],
                g,
            )
            .unwrap();
            interference_intensity(&s, 1.0).unwrap().intensity
        };
        let i0 = run(delta, gamma);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&i0));
        // with no decay the pattern repeats after 2 pi hbar / m
        let i1 = run(delta, 0.0);
        let i2 = run(delta + std::f64::consts::TAU, 0.0);
        prop_assert!((i1 - i2).abs() < 1e-9);
    }
}
