mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tomolab_core::designs::{frame_potential, frame_potential_lower_bound, is_weighted_t_design, DESIGN_TOL};
use tomolab_core::operators::{random_haar_pure, HermitianOperator};
use tomolab_core::povm::{
    hw_displacement, noisy_sic, product_pom, qubit_mub_octahedron, qubit_tetrahedron, validate_pom, WeightedStateSet,
};

use common::{sic, MAX_SIC_DIM};

#[test]
fn searched_sics_are_valid_poms() {
    for d in 2..=MAX_SIC_DIM {
        let pom = sic(d);
        assert_eq!(pom.len(), d * d);
        let report = validate_pom(&pom, 1e-10);
        assert!(report.passed, "d = {d}: {:?}", report.failures);
        for tr in &report.effect_traces {
            assert!((tr - 1.0 / d as f64).abs() < 1e-12);
        }
        let ov = pom.source().unwrap().overlap_matrix();
        for j in 0..d * d {
            for k in 0..d * d {
                let expect = if j == k { 1.0 } else { 1.0 / (d + 1) as f64 };
                assert!((ov[(j, k)] - expect).abs() < 1e-8, "d = {d} ({j},{k})");
            }
        }
    }
}

#[test]
fn sic_frame_potentials() {
    for d in 2..=MAX_SIC_DIM {
        let set = sic(d).source().unwrap().clone();
        let df = d as f64;
        assert!((frame_potential(&set, 2) - 2.0 * df / (df + 1.0)).abs() < 1e-8);
        assert!((frame_potential(&set, 3) - (df * df + 3.0 * df) / (df + 1.0).powi(2)).abs() < 1e-8);
        assert!(is_weighted_t_design(&set, 1, DESIGN_TOL).is_design);
        assert!(is_weighted_t_design(&set, 2, DESIGN_TOL).is_design);
        assert!(!is_weighted_t_design(&set, 3, DESIGN_TOL).is_design);
    }
}

#[test]
fn two_design_with_d_squared_elements_is_sic() {
    for d in 2..=5 {
        let set = sic(d).source().unwrap().clone();
        let report = is_weighted_t_design(&set, 2, DESIGN_TOL);
        assert!(report.is_design && set.len() == d * d);
        let ov = set.overlap_matrix();
        for j in 0..set.len() {
            for k in 0..j {
                assert!((ov[(j, k)] - 1.0 / (d + 1) as f64).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn qubit_polytopes() {
    let oct = qubit_mub_octahedron();
    assert!(validate_pom(&oct, 1e-12).passed);
    assert!(is_weighted_t_design(oct.source().unwrap(), 3, DESIGN_TOL).is_design);
    let tet = qubit_tetrahedron();
    assert!(validate_pom(&tet, 1e-12).passed);
    let set = tet.source().unwrap();
    assert!(is_weighted_t_design(set, 2, DESIGN_TOL).is_design);
    assert!(!is_weighted_t_design(set, 3, DESIGN_TOL).is_design);
}

#[test]
fn tetrahedron_is_a_qubit_sic() {
    // any qubit SIC is a rotated tetrahedron: same Gram matrix
    let a = qubit_tetrahedron().source().unwrap().overlap_matrix();
    let b = sic(2).source().unwrap().overlap_matrix();
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                assert!((a[(j, k)] - b[(j, k)]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn product_and_noisy_poms_are_valid() {
    let prod = product_pom(&[sic(2), sic(3)]).unwrap();
    assert_eq!(prod.dim(), 6);
    assert_eq!(prod.len(), 36);
    assert!(validate_pom(&prod, 1e-10).passed);
    // last factor varies fastest
    let expect = sic(2).effects()[1].kron(&sic(3).effects()[4]);
    assert!(prod.effects()[9 + 4].max_abs_diff(&expect) < 1e-14);
    for alpha in [0.0, 0.5, 2.0] {
        let noisy = noisy_sic(&sic(3), alpha).unwrap();
        assert!(validate_pom(&noisy, 1e-10).passed);
    }
}

#[test]
fn displacements_are_a_projective_group() {
    for d in 2..=5 {
        let id = HermitianOperator::identity(d);
        for k1 in 0..d {
            for k2 in 0..d {
                let m = hw_displacement(d, k1, k2).unwrap();
                let prod = &m * m.adjoint();
                assert!((prod - id.matrix()).camax() < 1e-12);
                let tr = m.trace().norm();
                let expect = if k1 == 0 && k2 == 0 { d as f64 } else { 0.0 };
                assert!((tr - expect).abs() < 1e-10);
            }
        }
    }
}

fn random_weighted_set(d: usize, n: usize, seed: u64) -> WeightedStateSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..n).map(|_| random_haar_pure(d, &mut rng).unwrap()).collect();
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = u.iter().sum();
    let weights = u.iter().map(|x| d as f64 * x / total).collect();
    WeightedStateSet::new(states, weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frame_potential_never_below_bound(d in 2usize..5, extra in 0usize..20, t in 1u32..5, seed in any::<u64>()) {
        let set = random_weighted_set(d, 3 * d + extra, seed);
        let r = is_weighted_t_design(&set, t, DESIGN_TOL);
        prop_assert!(r.slack >= -1e-10, "slack {}", r.slack);
        prop_assert!((r.lower_bound - frame_potential_lower_bound(d, t)).abs() < 1e-15);
    }

    #[test]
    fn design_property_is_monotone(d in 2usize..6, t in 2u32..5) {
        // SIC sets are exact 2-designs; any level at which the check passes
        // must also pass below it.
        let set = sic(d).source().unwrap().clone();
        if is_weighted_t_design(&set, t, DESIGN_TOL).is_design {
            for lower in 1..t {
                prop_assert!(is_weighted_t_design(&set, lower, DESIGN_TOL).is_design);
            }
        }
        let oct = qubit_mub_octahedron();
        for lower in 1..=3 {
            prop_assert!(is_weighted_t_design(oct.source().unwrap(), lower, DESIGN_TOL).is_design);
        }
    }
}
