use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tomolab_core::operators::{
    hs_distance, partial_trace, random_haar_pure, random_hermitian, random_mixed, trace_distance, BlochVector,
    DensityOperator, HermitianBasis,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vectorize_round_trip_and_inner_product(d in 2usize..7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = HermitianBasis::new(d).unwrap();
        let a = random_hermitian(d, &mut rng).unwrap();
        let b = random_hermitian(d, &mut rng).unwrap();
        let va = basis.vectorize(&a).unwrap();
        let vb = basis.vectorize(&b).unwrap();
        let back = basis.devectorize(&va).unwrap();
        prop_assert!(back.max_abs_diff(&a) < 1e-12);
        prop_assert!((va.dot(&vb) - a.hs_inner(&b)).abs() < 1e-10);
        // first coordinate carries the trace
        prop_assert!((va.coeffs[0] - a.trace() / (d as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal(d in 2usize..6) {
        let basis = HermitianBasis::new(d).unwrap();
        prop_assert_eq!(basis.len(), d * d);
        for j in 0..basis.len() {
            for k in 0..basis.len() {
                let ip = basis.element(j).hs_inner(&basis.element(k));
                let expect = if j == k { 1.0 } else { 0.0 };
                prop_assert!((ip - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn random_states_are_valid(d in 2usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_haar_pure(d, &mut rng).unwrap();
        let pure = DensityOperator::pure(&psi);
        prop_assert!((pure.purity() - 1.0).abs() < 1e-12);
        let mixed = random_mixed(d, &mut rng).unwrap();
        prop_assert!((mixed.trace() - 1.0).abs() < 1e-12);
        prop_assert!(mixed.min_eigenvalue() > -1e-12);
        prop_assert!(mixed.purity() <= 1.0 + 1e-12 && mixed.purity() >= 1.0 / d as f64 - 1e-12);
        prop_assert!(mixed.cubic_moment() >= mixed.purity().powi(2) - 1e-12);
    }

    #[test]
    fn distances_are_metrics(d in 2usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_mixed(d, &mut rng).unwrap();
        let b = random_mixed(d, &mut rng).unwrap();
        let c = random_mixed(d, &mut rng).unwrap();
        let tab = trace_distance(&a, &b).unwrap();
        prop_assert!((tab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(tab <= 1.0 + 1e-12);
        prop_assert!(tab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
        // ||X||_HS <= ||X||_tr <= sqrt(d) ||X||_HS
        let hs = hs_distance(&a, &b).unwrap();
        prop_assert!(hs <= 2.0 * tab + 1e-12);
        prop_assert!(2.0 * tab <= (d as f64).sqrt() * hs + 1e-12);
    }

    #[test]
    fn partial_trace_of_products(d1 in 2usize..4, d2 in 2usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_mixed(d1, &mut rng).unwrap();
        let b = random_mixed(d2, &mut rng).unwrap();
        let ab = a.kron(&b);
        let ra = partial_trace(&ab, &[d1, d2], &[0]).unwrap();
        let rb = partial_trace(&ab, &[d1, d2], &[1]).unwrap();
        prop_assert!(ra.max_abs_diff(&a) < 1e-12);
        prop_assert!(rb.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn bloch_round_trip(x in -0.57f64..0.57, y in -0.57f64..0.57, z in -0.57f64..0.57) {
        let s = BlochVector::new(x, y, z);
        let rho = DensityOperator::from_bloch(&s).unwrap();
        let back = BlochVector::from_operator(&rho).unwrap();
        for i in 0..3 {
            prop_assert!((back.0[i] - s.0[i]).abs() < 1e-14);
        }
        prop_assert!((rho.purity() - (1.0 + s.norm().powi(2)) / 2.0).abs() < 1e-14);
    }
}

#[test]
fn pure_state_reduced_purities_agree() {
    // Schmidt symmetry: both marginals of a pure bipartite state share a spectrum.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let psi = random_haar_pure(6, &mut rng).unwrap();
        let rho = DensityOperator::pure(&psi);
        let a = partial_trace(&rho, &[2, 3], &[0]).unwrap();
        let b = partial_trace(&rho, &[2, 3], &[1]).unwrap();
        assert!((a.purity() - b.purity()).abs() < 1e-12);
    }
}
