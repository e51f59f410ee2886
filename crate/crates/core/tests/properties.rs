use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dipeps::circuit::{simulate_circuit, DuCircuit};
use dipeps::conditions::{check_di, check_dual_unitary, check_generalized, gauge_transform, GaugeTriple};
use dipeps::contraction::{channel_from_tensor, dense_expectation, local_expectation, random_di_lattice, Options};
use dipeps::families::{plumbing, random_di, random_dual_unitary, w_parametrized, w_z2, Gate, Singles};
use dipeps::linalg::{eye, gaussian_matrix, random_invertible};
use dipeps::tensors::vectorize;
use dipeps::transfer::{analytic_transfer, build_transfer, Flux, WTilde};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_di_satisfies_both_conditions(d in 1usize..5, chi in 1usize..3, seed in any::<u64>()) {
        let t = random_di(d, chi, seed).unwrap();
        prop_assert!(check_di(&t, 1e-12).pass);
    }

    #[test]
    fn single_site_unitaries_preserve_di(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Singles::haar(2, 2, &mut rng);
        let t = random_di(2, 2, seed).unwrap();
        let moved = t.apply_legs([Some(&s.p), Some(&s.l), Some(&s.b), Some(&s.r), Some(&s.t)]).unwrap();
        prop_assert!(check_di(&moved, 1e-12).pass);
    }

    #[test]
    fn gauge_transform_keeps_generalized_di(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_di(2, 2, seed).unwrap();
        let q = random_invertible(2, &mut rng);
        let j = random_invertible(2, &mut rng);
        let g = GaugeTriple::identity(2).transformed(&q, &j).unwrap();
        let tg = gauge_transform(&t, &q, &j).unwrap();
        prop_assert!(check_generalized(&tg, &g, 1e-8).unwrap().pass);
    }

    #[test]
    fn di_channel_is_trace_preserving_and_unital(seed in any::<u64>(), d in 1usize..4) {
        let ch = channel_from_tensor(&random_di(d, 2, seed).unwrap());
        prop_assert!(ch.trace_preservation_residual() < 1e-12);
        prop_assert!(ch.dual_trace_residual() < 1e-12);
    }

    #[test]
    fn random_dual_unitaries_are_dual_unitary(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Gate::two_leg(2, random_dual_unitary(&mut rng)).unwrap();
        prop_assert!(check_dual_unitary(&g, 1e-12).pass);
    }

    #[test]
    fn z2_plumbing_is_di(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0) {
        prop_assert!(check_di(&plumbing(&w_z2(alpha, beta).unwrap()), 1e-12).pass);
    }

    #[test]
    fn parametrized_plumbing_is_di(
        alpha in 0.0f64..6.3,
        beta in 0.0f64..6.3,
        theta in prop::array::uniform8(0.0f64..6.3),
        phi in prop::array::uniform16(0.0f64..6.3),
    ) {
        prop_assert!(check_di(&plumbing(&w_parametrized(alpha, beta, theta, phi)), 1e-12).pass);
    }

    #[test]
    fn transfer_matches_closed_form(alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0, half in 1usize..4, pi in any::<bool>()) {
        let m = 2 * half;
        let flux = if pi { Flux::Pi } else { Flux::Zero };
        let got = build_transfer(&WTilde::new(alpha, beta).unwrap(), m, flux).unwrap();
        let want = analytic_transfer(alpha, beta, m, flux).unwrap();
        prop_assert!((got - want).amax() < 1e-12);
    }

    #[test]
    fn di_lattices_are_normalized(n in 1usize..3, m in 1usize..3, seed in any::<u64>()) {
        let lat = random_di_lattice(n, m, 2, 2, seed).unwrap();
        let o = vectorize(&eye(2), &[(n, m)], &[2]).unwrap();
        let fast = local_expectation(&lat, &o, &Options::default()).unwrap().value;
        let dense = dense_expectation(&lat, &[o]).unwrap();
        prop_assert!((fast.re - 1.0).abs() < 1e-12 && fast.im.abs() < 1e-12);
        prop_assert!((dense - fast).norm() < 1e-10);
    }

    #[test]
    fn local_expectation_is_linear(seed in any::<u64>(), x in 1usize..3, y in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = random_di_lattice(2, 2, 2, 2, seed).unwrap();
        let a = gaussian_matrix(2, 2, &mut rng);
        let b = gaussian_matrix(2, 2, &mut rng);
        let ev = |m: &dipeps::Mat| {
            local_expectation(&lat, &vectorize(m, &[(x, y)], &[2]).unwrap(), &Options::default()).unwrap().value
        };
        prop_assert!((ev(&(&a + &b)) - ev(&a) - ev(&b)).norm() < 1e-12);
    }

    #[test]
    fn circuits_preserve_norm(width in 1usize..5, depth in 0usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circ = DuCircuit::random(width, depth, &mut rng).unwrap();
        let psi = simulate_circuit(&circ);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }
}
