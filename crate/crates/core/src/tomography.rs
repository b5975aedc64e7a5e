//! Linear tomography: frame superoperators, canonical reconstruction
//! operators, linear estimates and MSE matrices.
//!
//! Superoperators are real matrices in the coordinates of a
//! [`HermitianBasis`], whose first element is proportional to the identity,
//! so the traceless sector is the trailing `(d^2 - 1) x (d^2 - 1)` block.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{DensityOperator, HermitianBasis, HermitianOperator, OperatorVector, C64};
use crate::povm::Pom;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;
/// Frame superoperators with a larger condition number are not IC.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;
/// Tolerated deviation of `sum_j |Theta_j>><<Pi_j|` from the identity.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Born probabilities below `-PROBABILITY_TOL` are rejected.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FrameSuperoperator {
    dim: usize,
    basis: HermitianBasis,
    full: DMatrix<f64>,
    traceless: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    condition_number: f64,
}

impl FrameSuperoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    /// `F` in basis coordinates, `d^2 x d^2`.
    pub fn full(&self) -> &DMatrix<f64> {
        &self.full
    }

    /// `F_0`, built from the traceless parts of the effects.
    pub fn traceless(&self) -> &DMatrix<f64> {
        &self.traceless
    }

    /// Ascending eigenvalues of `F`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `lambda_max / lambda_min`; infinite when `F` is singular.
    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    pub fn is_informationally_complete(&self) -> bool {
        self.condition_number <= MAX_CONDITION_NUMBER
    }

    /// Eigen-decomposition pseudo-inverse of `F`.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        symmetric_pinv(&self.full)
    }

    /// `Tr(F_0^{-1})`, the scaled MSE at the maximally mixed state up to a
    /// factor `d`.
    pub fn traceless_inverse_trace(&self) -> f64 {
        symmetric_pinv(&self.traceless).trace()
    }
}

fn symmetric_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let inv = eig.eigenvalues.map(|l| if l.abs() > PINV_RELATIVE_CUTOFF * max { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

fn outer_sum(vectors: &[DVector<f64>], weights: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (v, &w) in vectors.iter().zip(weights) {
        m.ger(w, v, v, 1.0);
    }
    m
}

/// `F = sum_j |Pi_j>><<Pi_j| / tr(Pi_j)` together with its traceless block.
pub fn frame_superoperator(pom: &Pom) -> Result<FrameSuperoperator> {
    if pom.is_empty() {
        return Err(Error::EmptyMeasurement);
    }
    let d = pom.dim();
    let basis = HermitianBasis::new(d)?;
    let mut full_vecs = Vec::with_capacity(pom.len());
    let mut traceless_vecs = Vec::with_capacity(pom.len());
    let mut inv_traces = Vec::with_capacity(pom.len());
    let identity = HermitianOperator::identity(d);
    for (j, effect) in pom.effects().iter().enumerate() {
        let tr = effect.trace();
        if tr <= f64::EPSILON {
            return Err(Error::ZeroTraceEffect(j));
        }
        full_vecs.push(basis.vectorize(effect)?.coeffs);
        let mut shifted = effect.clone();
        shifted.add_scaled(-tr / d as f64, &identity);
        let c = basis.vectorize(&shifted)?.coeffs;
        traceless_vecs.push(c.rows(1, d * d - 1).into_owned());
        inv_traces.push(1.0 / tr);
    }
    let full = outer_sum(&full_vecs, &inv_traces, d * d);
    let traceless = outer_sum(&traceless_vecs, &inv_traces, d * d - 1);
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(full.clone()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let lo = eigenvalues[0];
    let hi = eigenvalues[eigenvalues.len() - 1];
    let condition_number = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(FrameSuperoperator { dim: d, basis, full, traceless, eigenvalues, condition_number })
}

/// Canonical reconstruction operators, aligned with the POM effects.
#[derive(Clone, Debug)]
pub struct ReconstructionSet {
    dim: usize,
    basis: HermitianBasis,
    operators: Vec<HermitianOperator>,
    /// Column `j` holds the coordinates of `Theta_j`.
    coords: DMatrix<f64>,
}

impl ReconstructionSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    /// Largest entry of `|sum_j |Theta_j>><<Pi_j| - I|`.
    pub fn reconstruction_residual(&self, pom: &Pom) -> Result<f64> {
        if pom.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: pom.len() });
        }
        let n = self.dim * self.dim;
        let mut total = DMatrix::<f64>::zeros(n, n);
        for (j, effect) in pom.effects().iter().enumerate() {
            let pi = self.basis.vectorize(effect)?.coeffs;
            total.ger(1.0, &self.coords.column(j), &pi, 1.0);
        }
        total -= DMatrix::identity(n, n);
        Ok(total.amax())
    }
}

/// `Theta_j = F^{-1} |Pi_j>> / tr(Pi_j)`.
pub fn canonical_reconstruction(pom: &Pom, fso: &FrameSuperoperator) -> Result<ReconstructionSet> {
    if pom.dim() != fso.dim() {
        return Err(Error::DimensionMismatch { expected: fso.dim(), found: pom.dim() });
    }
    if !fso.is_informationally_complete() {
        return Err(Error::NotInformationallyComplete(fso.condition_number()));
    }
    let d = pom.dim();
    let basis = fso.basis().clone();
    let pinv = fso.pseudo_inverse();
    let mut coords = DMatrix::zeros(d * d, pom.len());
    let mut operators = Vec::with_capacity(pom.len());
    for (j, effect) in pom.effects().iter().enumerate() {
        let v = basis.vectorize(effect)?;
        let theta = &pinv * &v.coeffs / effect.trace();
        coords.set_column(j, &theta);
        operators.push(basis.devectorize(&OperatorVector { dim: d, coeffs: theta })?);
    }
    let set = ReconstructionSet { dim: d, basis, operators, coords };
    let residual = set.reconstruction_residual(pom)?;
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::NotInformationallyComplete(fso.condition_number()));
    }
    Ok(set)
}

/// Frame superoperator and canonical reconstruction in one step.
pub fn reconstruction_for(pom: &Pom) -> Result<ReconstructionSet> {
    let fso = frame_superoperator(pom)?;
    canonical_reconstruction(pom, &fso)
}

/// `p_j = tr(Pi_j rho)`; round-off negatives are clipped and the vector
/// renormalized.
pub fn born_probabilities(pom: &Pom, rho: &DensityOperator) -> Result<Vec<f64>> {
    if pom.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: pom.dim(), found: rho.dim() });
    }
    if pom.is_empty() {
        return Err(Error::EmptyMeasurement);
    }
    let mut p: Vec<f64> = pom.effects().iter().map(|e| e.hs_inner(rho)).collect();
    let mut clipped = false;
    for (j, pj) in p.iter_mut().enumerate() {
        if *pj < -PROBABILITY_TOL {
            return Err(Error::InvalidProbabilities(format!("outcome {j} has probability {pj:e}")));
        }
        if *pj < 0.0 {
            *pj = 0.0;
            clipped = true;
        }
    }
    let total: f64 = p.iter().sum();
    if clipped || (total - 1.0).abs() > f64::EPSILON * p.len() as f64 {
        log::debug!("renormalizing Born probabilities (sum {total}, clipped {clipped})");
        for pj in &mut p {
            *pj /= total;
        }
    }
    Ok(p)
}

/// `rho_hat = sum_j f_j Theta_j`. Unit trace and Hermitian, not necessarily
/// positive.
pub fn linear_estimate(frequencies: &[f64], recon: &ReconstructionSet) -> Result<HermitianOperator> {
    if frequencies.len() != recon.len() {
        return Err(Error::DimensionMismatch { expected: recon.len(), found: frequencies.len() });
    }
    if let Some(f) = frequencies.iter().find(|f| !(**f >= 0.0)) {
        return Err(Error::InvalidProbabilities(format!("negative frequency {f}")));
    }
    let total: f64 = frequencies.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbabilities(format!("frequencies sum to {total}")));
    }
    let d = recon.dim();
    let mut m = DMatrix::zeros(d, d);
    for (f, theta) in frequencies.iter().zip(recon.operators()) {
        if *f != 0.0 {
            m += theta.matrix() * C64::new(*f, 0.0);
        }
    }
    Ok(HermitianOperator::from_matrix_unchecked(m))
}

/// `C(rho)` in basis coordinates; `matrix` already includes the `1/N`.
#[derive(Clone, Debug)]
pub struct MseMatrix {
    pub dim: usize,
    pub n: u64,
    pub matrix: DMatrix<f64>,
}

impl MseMatrix {
    /// `N C(rho)`, independent of `N`.
    pub fn scaled(&self) -> DMatrix<f64> {
        &self.matrix * self.n as f64
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn trace_of_square(&self) -> f64 {
        self.matrix.component_mul(&self.matrix).sum()
    }

    /// Ascending eigenvalues of `C(rho)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `C(rho) = (sum_j p_j |Theta_j>><<Theta_j| - |rho>><<rho|) / N`.
pub fn mse_matrix(pom: &Pom, recon: &ReconstructionSet, rho: &DensityOperator, n: u64) -> Result<MseMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if recon.len() != pom.len() {
        return Err(Error::DimensionMismatch { expected: pom.len(), found: recon.len() });
    }
    let p = born_probabilities(pom, rho)?;
    let r = recon.basis().vectorize(rho)?.coeffs;
    let weighted = recon.coords() * DMatrix::from_diagonal(&DVector::from_vec(p));
    let mut c = weighted * recon.coords().transpose();
    c.ger(-1.0, &r, &r, 1.0);
    c /= n as f64;
    // Symmetrize round-off.
    let c = (&c + c.transpose()) * 0.5;
    Ok(MseMatrix { dim: rho.dim(), n, matrix: c })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorStats {
    /// `Tr C`, the mean squared Hilbert-Schmidt error.
    pub mse: f64,
    /// `2 Tr C^2`, the variance of the squared error in the Gaussian limit.
    pub variance: f64,
}

pub fn error_stats(pom: &Pom, recon: &ReconstructionSet, rho: &DensityOperator, n: u64) -> Result<ErrorStats> {
    let c = mse_matrix(pom, recon, rho, n)?;
    Ok(ErrorStats { mse: c.trace(), variance: 2.0 * c.trace_of_square() })
}
