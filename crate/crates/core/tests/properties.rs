use std::f64::consts::PI;

use proptest::prelude::*;

use dilute1d::config::{parse_potential, to_config_text};
use dilute1d::free_fermi::FermiEnsemble;
use dilute1d::lieb_liniger::{check_lower_bound, e_of_gamma, TONKS_ENERGY};
use dilute1d::scattering::{check_dyson_inequality, scattering_energy, solve_scattering, Channel};
use dilute1d::trial_states::build_trial;
use dilute1d::validator::{
    envelope, map_symmetry, scattering_length, EnvelopeConstants, Symmetry, SymmetryMap,
};
use dilute1d::{Potential, PotentialComponent};

fn component() -> impl Strategy<Value = PotentialComponent> {
    prop_oneof![
        (0.0..0.5f64, 0.0..0.5f64).prop_map(|(inner, w)| PotentialComponent::HardCoreBand {
            inner,
            outer: inner + w
        }),
        (0.0..1.0f64, 0.01..20.0f64)
            .prop_map(|(position, strength)| PotentialComponent::DeltaSpike { position, strength }),
        prop::collection::vec((0.01..0.4f64, 0.0..30.0f64), 1..4).prop_map(|pieces| {
            let mut breakpoints = vec![0.0];
            let mut values = Vec::new();
            for (w, v) in pieces {
                breakpoints.push(breakpoints.last().unwrap() + w);
                values.push(v);
            }
            PotentialComponent::PiecewiseConstant {
                breakpoints,
                values,
            }
        }),
    ]
}

fn potential() -> impl Strategy<Value = Potential> {
    prop::collection::vec(component(), 1..4).prop_map(|c| Potential::new(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_identity_holds_in_both_channels(p in potential(), extra in 0.05..2.0f64, odd in any::<bool>()) {
        let channel = if odd { Channel::Odd } else { Channel::Even };
        let r = solve_scattering(&p, channel, p.range() + extra).unwrap();
        prop_assume!(r.a.finite().is_some());
        let e = scattering_energy(&r);
        prop_assert!((e / r.energy_bound() - 1.0).abs() < 1e-9);
        prop_assert!(r.a.finite().unwrap() <= p.range() + 1e-12);
    }

    #[test]
    fn scattering_length_is_independent_of_radius(p in potential(), r1 in 0.05..1.0f64, r2 in 1.0..3.0f64) {
        let a1 = solve_scattering(&p, Channel::Even, p.range() + r1).unwrap().a.finite();
        let a2 = solve_scattering(&p, Channel::Even, p.range() + r2).unwrap().a.finite();
        match (a1, a2) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0)),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn stronger_contact_raises_scattering_length(c in 0.01..50.0f64, factor in 1.01..10.0f64) {
        let weak = scattering_length(&Potential::lieb_liniger(c).unwrap()).unwrap().unwrap();
        let strong = scattering_length(&Potential::lieb_liniger(c * factor).unwrap()).unwrap().unwrap();
        prop_assert!(strong > weak);
        prop_assert!(strong < 0.0);
    }

    #[test]
    fn scattering_solution_beats_perturbed_profiles(p in potential(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let r = solve_scattering(&p, Channel::Even, p.range() + 0.5).unwrap();
        prop_assume!(r.a.finite().is_some());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let trial = dilute1d::acceptance::random_dyson_trial(&r, &mut rng).unwrap();
        prop_assert!(check_dyson_inequality(&r, &trial).unwrap().holds);
    }

    #[test]
    fn config_text_round_trips(p in potential()) {
        let back = parse_potential(&to_config_text(&p)).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn envelope_brackets_expansion(n in 1usize..1000, rho in 0.001..1.0f64, a in -0.2..0.2f64,
                                   range in 0.0..0.2f64, c_u in 0.0..3.0f64, c_l in 0.0..3.0f64) {
        let env = envelope(n, n as f64 / rho, a, range, EnvelopeConstants { c_u, c_l });
        prop_assert!(env.lower <= env.expansion && env.expansion <= env.upper);
        prop_assert_eq!(env.expansion > env.leading, a > 0.0);
    }

    #[test]
    fn anyon_scattering_length_formula(c in 0.05..20.0f64, kappa in 0.0..3.1f64) {
        let mapped = map_symmetry(&SymmetryMap::new(Symmetry::Anyon(kappa), c), &Potential::free()).unwrap();
        let a = scattering_length(&mapped).unwrap().unwrap();
        let expected = -2.0 * (0.5 * kappa).cos() / c;
        prop_assert!((a - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn fermi_state_is_antisymmetric(n in 2usize..7, len in 0.5..10.0f64, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let e = FermiEnsemble::new(n, len).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..len)).collect();
        let mut y = x.clone();
        y.swap(0, n - 1);
        let (px, py) = (e.psi(&x), e.psi(&y));
        prop_assert!((px + py).abs() <= 1e-12 * px.abs().max(1e-300));
    }

    #[test]
    fn one_body_density_is_normalized(n in 1usize..30, len in 0.5..50.0f64) {
        let e = FermiEnsemble::new(n, len).unwrap();
        let rule = dilute1d::quadrature::GaussLegendre::new(4 * n + 8);
        let total = rule.integrate(0.0, len, |x| e.rho1(x));
        prop_assert!((total - n as f64).abs() < 1e-10 * n as f64);
    }

    #[test]
    fn trial_state_is_exchange_symmetric(c in 0.1..20.0f64, b in 0.05..0.4f64, x1 in 0.0..1.0f64, x2 in 0.0..1.0f64) {
        let t = build_trial(2, 1.0, &Potential::lieb_liniger(c).unwrap(), b).unwrap();
        prop_assert_eq!(t.value(&[x1, x2]), t.value(&[x2, x1]));
        prop_assert!(t.value(&[x1, x2]) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lieb_liniger_energy_is_bracketed(gamma in 0.1..1000.0f64) {
        let s = e_of_gamma(gamma, 96, 1e-12).unwrap();
        prop_assert!(check_lower_bound(&s));
        prop_assert!(s.e <= TONKS_ENERGY + 1e-9);
        prop_assert!((s.gamma / gamma - 1.0).abs() < 1e-10);
    }
}

/// With two particles the healing region can cover the whole box, so the
/// energy falls as `b` grows and is flat, up to a shallow minimum, once `b`
/// approaches `L`.
#[test]
fn trial_energy_over_healing_scales() {
    let scales = [0.03, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.95];
    let cases = [
        (
            Potential::hard_core(0.02).unwrap(),
            dilute1d::free_fermi::hardcore_exact_energy(2, 1.0, 0.02).unwrap(),
        ),
        (
            Potential::lieb_liniger(1.0).unwrap(),
            dilute1d::oracles::two_body_box_energy(1.0, 1.0).unwrap(),
        ),
        (
            Potential::lieb_liniger(20.0).unwrap(),
            dilute1d::oracles::two_body_box_energy(20.0, 1.0).unwrap(),
        ),
    ];
    for (p, exact) in cases {
        let energies: Vec<f64> = scales
            .iter()
            .map(|&b| {
                build_trial(2, 1.0, &p, b)
                    .unwrap()
                    .energy(64)
                    .unwrap()
                    .energy
            })
            .collect();
        assert!(
            energies.iter().all(|&e| e >= exact),
            "{energies:?} vs {exact}"
        );
        assert!(
            energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-5)),
            "{energies:?}"
        );
        let last = energies[scales.len() - 1];
        assert!((energies[scales.len() - 2] - last).abs() < 1e-3 * last);
        assert!(last < 1.04 * exact, "{last} vs {exact}");
    }
    assert!(5.0 * PI * PI < dilute1d::free_fermi::hardcore_exact_energy(2, 1.0, 0.02).unwrap());
}
