//! Dense Hermitian-operator algebra.
//!
//! Operators are stored as `d x d` complex matrices. The real vector space of
//! Hermitian operators is given concrete coordinates through
//! [`HermitianBasis`], a Hilbert-Schmidt orthonormal generalized Gell-Mann
//! basis whose first element is `1/sqrt(d)`. Every superoperator in the crate
//! is expressed in these coordinates.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-12;
const KET_NORM_TOL: f64 = 1e-12;
const DENSITY_TRACE_TOL: f64 = 1e-12;
const DENSITY_EIGEN_TOL: f64 = 1e-10;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
}

impl Ket {
    /// Normalizes `amplitudes` into a ket.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Ket { amplitudes: v / C64::from(norm) })
    }

    /// Accepts amplitudes that are already normalized to within `1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidParameter(format!("ket norm {norm} differs from 1")));
        }
        Ok(Ket { amplitudes: v })
    }

    pub fn basis(d: usize, r: usize) -> Result<Self> {
        check_dim(d)?;
        if r >= d {
            return Err(Error::InvalidParameter(format!("basis index {r} >= {d}")));
        }
        let mut v = DVector::zeros(d);
        v[r] = C64::new(1.0, 0.0);
        Ok(Ket { amplitudes: v })
    }

    /// Qubit ket whose Bloch vector points along the unit vector `n`.
    pub fn from_bloch_direction(n: [f64; 3]) -> Result<Self> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !(len > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let (x, y, z) = (n[0] / len, n[1] / len, n[2] / len);
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        Ket::normalized(vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::from_matrix_unchecked(&self.amplitudes * self.amplitudes.adjoint())
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        Ket { amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    pub fn apply(&self, unitary: &DMatrix<C64>) -> Ket {
        Ket { amplitudes: unitary * &self.amplitudes }
    }
}

/// A `d x d` Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    /// Validates Hermiticity (within `1e-12` relative to the largest entry)
    /// and stores the symmetrized matrix.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        check_dim(matrix.nrows())?;
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dev = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    /// Stores `(A + A^dag)/2` without checking.
    pub fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        let adj = matrix.adjoint();
        HermitianOperator { matrix: (matrix + adj) * C64::from(0.5) }
    }

    pub fn zeros(d: usize) -> Self {
        HermitianOperator { matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        HermitianOperator { matrix: DMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Hilbert-Schmidt inner product `tr(A B)`, real for Hermitian arguments.
    pub fn hs_inner(&self, other: &HermitianOperator) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }

    /// `tr(A^2)`
    pub fn purity(&self) -> f64 {
        self.hs_inner(self)
    }

    pub fn hs_norm(&self) -> f64 {
        self.purity().sqrt()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Sum of absolute eigenvalues, `tr|A|`.
    pub fn trace_norm(&self) -> f64 {
        self.matrix.clone().symmetric_eigenvalues().iter().map(|x| x.abs()).sum()
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix * C64::from(s) }
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: self.matrix.kronecker(&other.matrix) }
    }

    /// `U A U^dag`
    pub fn conjugate_by(&self, unitary: &DMatrix<C64>) -> HermitianOperator {
        HermitianOperator::from_matrix_unchecked(unitary * &self.matrix * unitary.adjoint())
    }

    /// `<psi|A|psi>`
    pub fn expectation(&self, ket: &Ket) -> f64 {
        ket.amplitudes().dotc(&(&self.matrix * ket.amplitudes())).re
    }

    /// In-place `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &HermitianOperator) {
        let s = C64::from(s);
        for (a, b) in self.matrix.iter_mut().zip(other.matrix.iter()) {
            *a += s * b;
        }
    }

    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(HermitianOperator);

impl DensityOperator {
    pub fn try_from_operator(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr} != 1")));
        }
        let min = op.min_eigenvalue();
        if min < -DENSITY_EIGEN_TOL {
            return Err(Error::NotDensity(format!("eigenvalue {min:e} < 0")));
        }
        Ok(DensityOperator(op))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(DensityOperator(HermitianOperator::identity(d).scale(1.0 / d as f64)))
    }

    pub fn pure(ket: &Ket) -> Self {
        DensityOperator(ket.projector())
    }

    /// Qubit state `(1 + s.tau)/2`; requires `|s| <= 1 + 1e-10`.
    pub fn from_bloch(s: &BlochVector) -> Result<Self> {
        if !s.is_physical() {
            return Err(Error::NotDensity(format!("Bloch vector length {} > 1", s.norm())));
        }
        Ok(DensityOperator(s.to_operator()))
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }

    /// `tr(rho^3)`
    pub fn cubic_moment(&self) -> f64 {
        self.0.eigenvalues().iter().map(|x| x.max(0.0).powi(3)).sum()
    }

    pub fn kron(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator(self.0.kron(&other.0))
    }
}

impl Deref for DensityOperator {
    type Target = HermitianOperator;
    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

/// One element of a [`HermitianBasis`], stored as its nonzero entries.
#[derive(Clone, Debug)]
struct SparseElement {
    entries: Vec<(usize, usize, C64)>,
}

/// Hilbert-Schmidt orthonormal basis of Hermitian `d x d` matrices.
///
/// Ordering: `B_0 = 1/sqrt(d)`; then for each pair `j < k` the symmetric and
/// antisymmetric off-diagonal elements; then the `d - 1` traceless diagonal
/// elements. For `d = 2` this is `{1, tau_x, tau_y, tau_z}/sqrt(2)`.
#[derive(Clone, Debug)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<SparseElement>,
}

impl HermitianBasis {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let mut elements = Vec::with_capacity(d * d);
        let inv_sqrt_d = 1.0 / (d as f64).sqrt();
        elements.push(SparseElement { entries: (0..d).map(|i| (i, i, C64::new(inv_sqrt_d, 0.0))).collect() });
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..d {
            for k in (j + 1)..d {
                elements.push(SparseElement { entries: vec![(j, k, C64::new(h, 0.0)), (k, j, C64::new(h, 0.0))] });
                elements.push(SparseElement { entries: vec![(j, k, C64::new(0.0, -h)), (k, j, C64::new(0.0, h))] });
            }
        }
        for l in 1..d {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut entries: Vec<_> = (0..l).map(|m| (m, m, C64::new(norm, 0.0))).collect();
            entries.push((l, l, C64::new(-(l as f64) * norm, 0.0)));
            elements.push(SparseElement { entries });
        }
        Ok(HermitianBasis { dim: d, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, `d^2`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> HermitianOperator {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.elements[k].entries {
            m[(i, j)] = v;
        }
        HermitianOperator { matrix: m }
    }

    /// Coordinates `c_k = tr(B_k A)`.
    pub fn vectorize(&self, op: &HermitianOperator) -> Result<OperatorVector> {
        check_same_dim(self.dim, op.dim())?;
        let m = op.matrix();
        let coeffs = self
            .elements
            .iter()
            .map(|el| el.entries.iter().map(|&(i, j, v)| (v * m[(j, i)]).re).sum::<f64>())
            .collect();
        Ok(OperatorVector { dim: self.dim, coeffs: DVector::from_vec(coeffs) })
    }

    /// `sum_k c_k B_k`
    pub fn devectorize(&self, vec: &OperatorVector) -> Result<HermitianOperator> {
        check_same_dim(self.dim, vec.dim)?;
        check_same_dim(self.len(), vec.coeffs.len())?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (el, &c) in self.elements.iter().zip(vec.coeffs.iter()) {
            for &(i, j, v) in &el.entries {
                m[(i, j)] += v * c;
            }
        }
        Ok(HermitianOperator::from_matrix_unchecked(m))
    }
}

/// Real coordinates of a Hermitian operator in a [`HermitianBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorVector {
    pub dim: usize,
    pub coeffs: DVector<f64>,
}

impl OperatorVector {
    pub fn dot(&self, other: &OperatorVector) -> f64 {
        self.coeffs.dot(&other.coeffs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector([x, y, z])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> BlochVector {
        BlochVector(self.0.map(|c| c * s))
    }

    /// Estimated Bloch vectors may leave the ball; callers decide what to do.
    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + 1e-10
    }

    /// `(1 + s.tau)/2`, physical or not.
    pub fn to_operator(&self) -> HermitianOperator {
        let [x, y, z] = self.0;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new((1.0 + z) / 2.0, 0.0),
                C64::new(x / 2.0, -y / 2.0),
                C64::new(x / 2.0, y / 2.0),
                C64::new((1.0 - z) / 2.0, 0.0),
            ],
        );
        HermitianOperator { matrix: m }
    }

    /// `s_i = tr(rho tau_i)` of a qubit operator.
    pub fn from_operator(op: &HermitianOperator) -> Result<Self> {
        check_same_dim(2, op.dim())?;
        let m = op.matrix();
        Ok(BlochVector([2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re]))
    }
}

/// Pauli matrices `tau_x, tau_y, tau_z`.
pub fn pauli_matrices() -> [HermitianOperator; 3] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        HermitianOperator { matrix: DMatrix::from_row_slice(2, 2, &[z, one, one, z]) },
        HermitianOperator { matrix: DMatrix::from_row_slice(2, 2, &[z, -i, i, z]) },
        HermitianOperator { matrix: DMatrix::from_row_slice(2, 2, &[one, z, z, -one]) },
    ]
}

/// `1/2 tr|A - B|`
pub fn trace_distance(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(0.5 * (a - b).trace_norm())
}

/// `sqrt(tr((A - B)^2))`
pub fn hs_distance(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    Ok((a - b).hs_norm())
}

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` lists the factor dimensions in tensor order; `keep` is a set of
/// factor indices (order and duplicates are ignored). The result lives on the
/// kept factors in their original order.
pub fn partial_trace(rho: &DensityOperator, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != rho.dim() || dims.contains(&0) {
        return Err(Error::InconsistentSubsystems { dims: dims.to_vec(), dim: rho.dim() });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::InvalidSubsystemSelection("nothing kept".into()));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystemSelection(format!("factor {bad} out of range for {} factors", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let compose = |factors: &[usize], dims_sub: &[usize], mut idx: usize| -> usize {
        let mut full = 0;
        for (pos, &f) in factors.iter().enumerate().rev() {
            let d = dims_sub[pos];
            full += (idx % d) * strides[f];
            idx /= d;
        }
        full
    };

    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(out_dim, out_dim);
    for t in 0..traced_total {
        let t_off = compose(&traced, &traced_dims, t);
        for a in 0..out_dim {
            let ia = compose(&kept, &kept_dims, a) + t_off;
            for b in 0..out_dim {
                let ib = compose(&kept, &kept_dims, b) + t_off;
                out[(a, b)] += m[(ia, ib)];
            }
        }
    }
    if out_dim < 2 {
        return Err(Error::InvalidSubsystemSelection("kept subsystem has dimension < 2".into()));
    }
    Ok(DensityOperator(HermitianOperator::from_matrix_unchecked(out)))
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn random_haar_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Ket> {
    check_dim(d)?;
    loop {
        let amps: Vec<C64> = (0..d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        match Ket::normalized(amps) {
            Ok(k) => return Ok(k),
            Err(Error::ZeroNorm) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Hilbert-Schmidt random mixed state `G G^dag / tr(G G^dag)`.
pub fn random_mixed<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    check_dim(d)?;
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let w = &g * g.adjoint();
    let tr: f64 = w.diagonal().iter().map(|z| z.re).sum();
    Ok(DensityOperator(HermitianOperator::from_matrix_unchecked(w / C64::from(tr))))
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<HermitianOperator> {
    check_dim(d)?;
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    Ok(HermitianOperator::from_matrix_unchecked(g))
}
