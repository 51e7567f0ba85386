use proptest::prelude::*;
use qtd_core::emission::{rate_diff, survival_probability, LineGeometry};
use qtd_core::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn spec() -> impl Strategy<Value = PacketPairSpec> {
    (0.0..=FRAC_PI_2 - 0.01, 0.0..PI - 0.05, -0.1..=0.1f64, -0.1..=0.1f64, 1e-3..=0.05f64).prop_map(
        |(theta, phi, u1, u2, delta)| PacketPairSpec { theta, phi, u1, u2, delta },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn densities_are_normalized(s in spec()) {
        let q = wavepackets::moment_quadrature_spec();
        for state in [MotionalState::Superposition(s), MotionalState::Mixture(s)] {
            let norm = state.expectation(|_| 1.0, &state.landmarks(), &q).unwrap();
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn superposition_density_is_nonnegative(s in spec(), t in -1.0..1.0f64) {
        let u = s.u1.min(s.u2) + t * 4.0 * s.delta;
        prop_assert!(density_superposition(u, &s).unwrap() >= 0.0);
    }

    #[test]
    fn swapping_packets_keeps_factors(s in spec()) {
        let swapped = PacketPairSpec { theta: FRAC_PI_2 - s.theta, u1: s.u2, u2: s.u1, ..s };
        let (a, b) = (gamma_q_inv(&s).unwrap(), gamma_q_inv(&swapped).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * s.delta * s.delta);
        let (a, b) = (delta_q(&s).unwrap(), delta_q(&swapped).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * s.delta);
    }

    #[test]
    fn coincident_packets_have_no_quantum_terms(s in spec()) {
        let same = PacketPairSpec { u2: s.u1, ..s };
        prop_assert!(gamma_q_inv(&same).unwrap().abs() <= 1e-15);
        prop_assert!(delta_q(&same).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn rate_difference_is_gamma_q(s in spec(), eps in 0.0..1e-3f64) {
        let atom = AtomSpec::new(eps, 1.5e9).unwrap();
        let r = rate_diff(&s, &atom).unwrap();
        prop_assert!((r.rate_sup - r.rate_cl - gamma_q_inv(&s).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn survival_is_monotone_and_log_convex(s in spec(), t in 0.05..3.0f64) {
        let atom = AtomSpec::default();
        let state = MotionalState::Superposition(s);
        let h = 0.05;
        let (a, b, c) = (
            survival_probability(t - h, &state, &atom).unwrap(),
            survival_probability(t, &state, &atom).unwrap(),
            survival_probability(t + h, &state, &atom).unwrap(),
        );
        prop_assert!(a >= b && b >= c && c > 0.0);
        prop_assert!(b.ln() <= 0.5 * (a.ln() + c.ln()) + 1e-12);
    }

    #[test]
    fn eigenstate_line_peaks_at_centre(u in -1e-7..1e-7f64) {
        let atom = AtomSpec::default();
        let state = MotionalState::Eigenstate(u);
        for g in [LineGeometry::Parallel, LineGeometry::Perpendicular] {
            let c = g.centre(u, atom.line_ratio);
            let at = |s: f64| emission::line_detuning(g, s, &state, &atom).unwrap();
            prop_assert!(at(c) > at(c + 0.1) && at(c) > at(c - 0.1));
        }
    }
}
