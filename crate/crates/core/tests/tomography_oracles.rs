mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tomolab_core::designs::frame_potential;
use tomolab_core::operators::{random_haar_pure, random_mixed, DensityOperator, HermitianOperator, C64};
use tomolab_core::povm::{noisy_sic, product_pom, qubit_mub_octahedron, Pom};
use tomolab_core::theory::{anisotropy_functionals, sic_tr_c2};
use tomolab_core::tomography::{
    born_probabilities, error_stats, frame_superoperator, linear_estimate, mse_matrix, reconstruction_for,
};

use common::{random_pom, sic, MAX_SIC_DIM};

fn traceless_identity_gap(pom: &Pom, scale: f64) -> f64 {
    let fso = frame_superoperator(pom).unwrap();
    let n = fso.traceless().nrows();
    (fso.traceless() - DMatrix::<f64>::identity(n, n) * scale).amax()
}

#[test]
fn tight_frames() {
    for d in 2..=MAX_SIC_DIM {
        let pom = sic(d);
        let df = d as f64;
        assert!(traceless_identity_gap(&pom, 1.0 / (df + 1.0)) < 1e-8, "d = {d}");
        let fso = frame_superoperator(&pom).unwrap();
        let bound = (df + 1.0) * (df * df - 1.0);
        assert!((fso.traceless_inverse_trace() / bound - 1.0).abs() < 1e-6);
        assert!((fso.traceless().trace() - (df - 1.0)).abs() < 1e-10);
    }
    assert!(traceless_identity_gap(&qubit_mub_octahedron(), 1.0 / 3.0) < 1e-12);
}

#[test]
fn sic_reconstruction_operators() {
    for d in 2..=MAX_SIC_DIM {
        let pom = sic(d);
        let recon = reconstruction_for(&pom).unwrap();
        let id = HermitianOperator::identity(d);
        for (theta, psi) in recon.operators().iter().zip(pom.source().unwrap().states()) {
            let expect = &psi.projector().scale((d + 1) as f64) - &id;
            assert!(theta.max_abs_diff(&expect) < 1e-8, "d = {d}");
        }
        assert!(recon.reconstruction_residual(&pom).unwrap() < 1e-8);
    }
}

#[test]
fn product_reconstruction_factorizes() {
    let (a, b) = (sic(2), sic(3));
    let ra = reconstruction_for(&a).unwrap();
    let rb = reconstruction_for(&b).unwrap();
    let prod = product_pom(&[a, b]).unwrap();
    let rp = reconstruction_for(&prod).unwrap();
    for j1 in 0..4 {
        for j2 in 0..9 {
            let expect = ra.operators()[j1].kron(&rb.operators()[j2]);
            assert!(rp.operators()[j1 * 9 + j2].max_abs_diff(&expect) < 1e-8);
        }
    }
}

#[test]
fn random_ic_poms_obey_trace_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in 2..=4 {
        for m in [d * d, d * d + 3, 2 * d * d] {
            let pom = random_pom(d, m, &mut rng);
            let fso = frame_superoperator(&pom).unwrap();
            let df = d as f64;
            // F restricted to the traceless sector equals F_0 built separately
            let n = d * d - 1;
            assert!((fso.full().view((1, 1), (n, n)) - fso.traceless()).amax() < 1e-10);
            assert!((fso.full()[(0, 0)] - 1.0).abs() < 1e-10);
            // full-rank effects: strict inequality
            assert!(fso.traceless().trace() < df - 1.0 - 1e-6);
            assert!(fso.traceless_inverse_trace() >= (df + 1.0) * (df * df - 1.0));
            let recon = reconstruction_for(&pom).unwrap();
            assert!(recon.reconstruction_residual(&pom).unwrap() < 1e-8);
        }
    }
}

#[test]
fn mse_matches_tight_ic_formula_for_random_states() {
    // 50 random (d, rho) pairs, alternating pure and mixed states.
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let recons: Vec<_> = (2..=MAX_SIC_DIM).map(|d| (sic(d), reconstruction_for(&sic(d)).unwrap())).collect();
    for i in 0..50 {
        let (pom, recon) = &recons[rng.random_range(0..recons.len())];
        let d = pom.dim();
        let rho = if i % 2 == 0 {
            random_mixed(d, &mut rng).unwrap()
        } else {
            DensityOperator::pure(&random_haar_pure(d, &mut rng).unwrap())
        };
        let n = 1000;
        let stats = error_stats(pom, recon, &rho, n).unwrap();
        let df = d as f64;
        let expect = df * df + df - 1.0 - rho.purity();
        assert!((stats.mse * n as f64 - expect).abs() < 1e-8, "d = {d}");
        let p = born_probabilities(pom, &rho).unwrap();
        let tr_c2 = sic_tr_c2(d, rho.purity(), &p).unwrap();
        let nf = n as f64;
        assert!((stats.variance * nf * nf / 2.0 - tr_c2).abs() < 1e-7 * tr_c2);
    }
}

#[test]
fn mse_matrix_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in 2..=5 {
        let pom = sic(d);
        let recon = reconstruction_for(&pom).unwrap();
        let rho = random_mixed(d, &mut rng).unwrap();
        let c = mse_matrix(&pom, &recon, &rho, 10).unwrap();
        assert!(c.matrix.column(0).amax() < 1e-10);
        assert!(c.eigenvalues()[0] > -1e-10);
        // maximally mixed: (d+1) I_0 / (d N)
        let mixed = DensityOperator::maximally_mixed(d).unwrap();
        let c0 = mse_matrix(&pom, &recon, &mixed, 10).unwrap();
        let n = d * d;
        let mut expect = DMatrix::<f64>::identity(n, n) * ((d + 1) as f64 / (d as f64 * 10.0));
        expect[(0, 0)] = 0.0;
        assert!((&c0.matrix - expect).amax() < 1e-10);
    }
}

#[test]
fn octahedron_pure_state_spectrum() {
    let pom = qubit_mub_octahedron();
    let recon = reconstruction_for(&pom).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let rho = DensityOperator::pure(&random_haar_pure(2, &mut rng).unwrap());
        let ev = mse_matrix(&pom, &recon, &rho, 1).unwrap().eigenvalues();
        let expect = [0.0, 1.0, 1.5, 1.5];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10, "{ev:?}");
        }
    }
}

#[test]
fn isotropic_measurement_attains_variance_lower_bound() {
    // The octahedron is a 3-design, so Tr C^2 is already unitarily averaged.
    let pom = qubit_mub_octahedron();
    let recon = reconstruction_for(&pom).unwrap();
    let phi3 = frame_potential(pom.source().unwrap(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let rho = random_mixed(2, &mut rng).unwrap();
        let c = mse_matrix(&pom, &recon, &rho, 1).unwrap();
        let a = anisotropy_functionals(2, rho.purity(), rho.cubic_moment(), phi3).unwrap();
        assert!((c.trace_of_square() - a.mean_tr_c2).abs() < 1e-10);
        assert!((a.mean_tr_c2 - a.lower_bound).abs() < 1e-10);
    }
}

fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    g.qr().q()
}

#[test]
fn sic_unitary_average_matches_anisotropy_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for d in 2..=4 {
        let pom = sic(d);
        let recon = reconstruction_for(&pom).unwrap();
        let base = random_mixed(d, &mut rng).unwrap();
        let samples: Vec<f64> = (0..3000)
            .map(|_| {
                let u = haar_unitary(d, &mut rng);
                let rho = DensityOperator::try_from_operator(base.conjugate_by(&u)).unwrap();
                mse_matrix(&pom, &recon, &rho, 1).unwrap().trace_of_square()
            })
            .collect();
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        let se = (var / samples.len() as f64).sqrt();
        let phi3 = frame_potential(pom.source().unwrap(), 3);
        let a = anisotropy_functionals(d, base.purity(), base.cubic_moment(), phi3).unwrap();
        assert!((m - a.mean_tr_c2).abs() < 5.0 * se + 1e-9, "d = {d}: {m} vs {}", a.mean_tr_c2);
        assert!(a.lower_bound <= a.mean_tr_c2 + 1e-10 && a.mean_tr_c2 <= a.upper_bound + 1e-10);
    }
}

#[test]
fn noisy_sic_mse_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for d in 2..=5 {
        for alpha in [0.0, 0.5, 1.0, 3.0] {
            let pom = noisy_sic(&sic(d), alpha).unwrap();
            let fso = frame_superoperator(&pom).unwrap();
            let n0 = fso.traceless().nrows();
            // still tight: F_0 proportional to the identity
            let scale = fso.traceless()[(0, 0)];
            assert!((fso.traceless() - DMatrix::<f64>::identity(n0, n0) * scale).amax() < 1e-10);
            let recon = reconstruction_for(&pom).unwrap();
            let rho = random_mixed(d, &mut rng).unwrap();
            let mse = error_stats(&pom, &recon, &rho, 1).unwrap().mse;
            let df = d as f64;
            let a1 = alpha + 1.0;
            let expect = (1.0 + (df + 1.0).powi(2) * (df - 1.0) * a1 * a1) / df - rho.purity();
            assert!((mse - expect).abs() < 1e-8 * expect, "d = {d}, alpha = {alpha}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_frequencies_reconstruct_the_state(d in 2usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pom = sic(d);
        let recon = reconstruction_for(&pom).unwrap();
        let rho = random_mixed(d, &mut rng).unwrap();
        let p = born_probabilities(&pom, &rho).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        let est = linear_estimate(&p, &recon).unwrap();
        prop_assert!(est.max_abs_diff(&rho) < 1e-8);
        // arbitrary frequencies still give unit trace
        let raw: Vec<f64> = (0..d * d).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let f: Vec<f64> = raw.iter().map(|x| x / total).collect();
        prop_assert!((linear_estimate(&f, &recon).unwrap().trace() - 1.0).abs() < 1e-10);
    }
}
