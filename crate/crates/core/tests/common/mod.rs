#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use tomolab_core::operators::{HermitianOperator, Ket, C64};
use tomolab_core::povm::{fiducial_search, sic_from_fiducial, FiducialSearchOptions, Pom};

pub const MAX_SIC_DIM: usize = 8;

/// Searched fiducial for `d`, cached per test binary.
pub fn fiducial(d: usize) -> Ket {
    static CACHE: OnceLock<Vec<OnceLock<Ket>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=MAX_SIC_DIM).map(|_| OnceLock::new()).collect());
    cache[d].get_or_init(|| fiducial_search(d, &FiducialSearchOptions::default()).expect("fiducial search")).clone()
}

pub fn sic(d: usize) -> Pom {
    sic_from_fiducial(&fiducial(d), 1e-8).expect("SIC from fiducial")
}

/// Random rank-full POM with `m` outcomes: `S^{-1/2} G_j G_j^dag S^{-1/2}`.
pub fn random_pom<R: Rng>(d: usize, m: usize, rng: &mut R) -> Pom {
    let raw: Vec<DMatrix<C64>> = (0..m)
        .map(|_| {
            let g =
                DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(DMatrix::<C64>::zeros(d, d), |a, b| a + b);
    let eig = total.symmetric_eigen();
    let inv_sqrt = eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0));
    let s = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.adjoint();
    let effects = raw.iter().map(|a| HermitianOperator::from_matrix_unchecked(&s * a * &s)).collect();
    Pom::new(d, effects).unwrap()
}
