use entpower::entanglement::is_product;
use entpower::qubit_algebra::{random_unitary2, tensor_product};
use entpower::{
    apply_gate, concurrence, sample_state_with_concurrence, to_magic_coefficients, PureState,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_state(rng: &mut ChaCha8Rng) -> PureState {
    let mut a = [Complex64::new(0.0, 0.0); 4];
    for z in &mut a {
        *z = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
    }
    PureState::normalized(a).unwrap()
}

#[test]
fn concurrence_stays_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100_000 {
        let c = concurrence(&random_state(&mut rng));
        assert!((0.0..=1.0).contains(&c), "{c}");
    }
}

#[test]
fn magic_coefficients_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let s = random_state(&mut rng);
        let back = to_magic_coefficients(&s).to_state();
        for (x, y) in s.amplitudes().iter().zip(back.amplitudes()) {
            assert!((x - y).norm() <= 1e-14);
        }
    }
}

#[test]
fn magic_basis_is_maximally_entangled_and_products_are_not() {
    for k in 0..4 {
        let mut b = [Complex64::new(0.0, 0.0); 4];
        b[k] = Complex64::new(1.0, 0.0);
        let s = entpower::MagicCoefficients::new(b).unwrap().to_state();
        assert!((concurrence(&s) - 1.0).abs() <= 1e-14);
    }
    for i in 0..4 {
        assert!(is_product(&PureState::basis(i)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn local_gates_preserve_concurrence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng);
        let local = tensor_product(&random_unitary2(seed), &random_unitary2(seed.wrapping_add(1)));
        let t = apply_gate(&local, &s).unwrap();
        prop_assert!((concurrence(&s) - concurrence(&t)).abs() <= 1e-12);
    }

    #[test]
    fn sampler_hits_requested_concurrence(c0 in 0.0..=1.0f64, seed in any::<u64>()) {
        let s = sample_state_with_concurrence(c0, seed).unwrap();
        prop_assert!((concurrence(&s) - c0).abs() <= 1e-12);
        let norm: f64 = s.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
    }
}
