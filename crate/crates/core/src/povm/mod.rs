//! Measurement constructors and validators.
//!
//! Covers Heisenberg-Weyl covariant SIC POMs built from a fiducial ket, the
//! qubit tetrahedron and octahedron measurements, tensor products of
//! measurements, and the white-noise deformation of a SIC POM.

mod fiducial;

pub use fiducial::{
    fiducial_deviation, fiducial_residual, fiducial_search, load_fiducial, save_fiducial, FiducialFile,
    FiducialSearchOptions,
};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{BlochVector, HermitianOperator, Ket, C64};

/// Default entrywise tolerance for measurement validity checks.
pub const POM_TOL: f64 = 1e-10;

/// Weighted pure states `{|psi_j>, w_j}` with `0 < w_j <= 1` and `sum w_j = d`.
#[derive(Clone, Debug)]
pub struct WeightedStateSet {
    dim: usize,
    states: Vec<Ket>,
    weights: Vec<f64>,
}

impl WeightedStateSet {
    pub fn new(states: Vec<Ket>, weights: Vec<f64>) -> Result<Self> {
        let dim = states.first().map(Ket::dim).ok_or(Error::EmptyMeasurement)?;
        if states.len() != weights.len() {
            return Err(Error::InvalidParameter(format!("{} states but {} weights", states.len(), weights.len())));
        }
        if let Some(k) = states.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: k.dim() });
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0 && w <= 1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!("weight {w} outside (0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - dim as f64).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected {dim}")));
        }
        Ok(WeightedStateSet { dim, states, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Ket] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Matrix of squared overlaps `|<psi_j|psi_k>|^2`.
    pub fn overlap_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |j, k| self.states[j].inner(&self.states[k]).norm_sqr())
    }

    /// Rank-one effects `Pi_j = w_j |psi_j><psi_j|`.
    fn effects(&self) -> Vec<HermitianOperator> {
        self.states.iter().zip(&self.weights).map(|(k, &w)| k.projector().scale(w)).collect()
    }
}

/// A probability operator measurement.
///
/// When `source` is present every effect is rank one, `Pi_j = w_j |psi_j><psi_j|`.
#[derive(Clone, Debug)]
pub struct Pom {
    dim: usize,
    effects: Vec<HermitianOperator>,
    source: Option<WeightedStateSet>,
}

impl Pom {
    /// Wraps effects without checking positivity or completeness; see
    /// [`validate_pom`].
    pub fn new(dim: usize, effects: Vec<HermitianOperator>) -> Result<Self> {
        if let Some(e) = effects.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
        }
        Ok(Pom { dim, effects, source: None })
    }

    pub fn from_states(source: WeightedStateSet) -> Self {
        Pom { dim: source.dim(), effects: source.effects(), source: Some(source) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn source(&self) -> Option<&WeightedStateSet> {
        self.source.as_ref()
    }

    pub fn scaled(&self, s: f64) -> Pom {
        Pom { dim: self.dim, effects: self.effects.iter().map(|e| e.scale(s)).collect(), source: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PomValidation {
    pub outcomes: usize,
    /// Largest entry of `|sum_j Pi_j - 1|`.
    pub max_completeness_violation: f64,
    pub min_effect_eigenvalue: f64,
    pub effect_traces: Vec<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

pub fn validate_pom(pom: &Pom, tol: f64) -> PomValidation {
    let mut failures = Vec::new();
    if pom.is_empty() {
        return PomValidation {
            outcomes: 0,
            max_completeness_violation: f64::NAN,
            min_effect_eigenvalue: f64::NAN,
            effect_traces: Vec::new(),
            passed: false,
            failures: vec!["no effects".to_string()],
        };
    }
    let mut total = HermitianOperator::zeros(pom.dim());
    let mut min_eig = f64::INFINITY;
    let mut traces = Vec::with_capacity(pom.len());
    for e in pom.effects() {
        total.add_scaled(1.0, e);
        min_eig = min_eig.min(e.min_eigenvalue());
        traces.push(e.trace());
    }
    let violation = total.max_abs_diff(&HermitianOperator::identity(pom.dim()));
    if violation > tol {
        failures.push(format!("effects sum to identity only within {violation:e}"));
    }
    if min_eig < -tol {
        failures.push(format!("effect has negative eigenvalue {min_eig:e}"));
    }
    PomValidation {
        outcomes: pom.len(),
        max_completeness_violation: violation,
        min_effect_eigenvalue: min_eig,
        effect_traces: traces,
        passed: failures.is_empty(),
        failures,
    }
}

/// Heisenberg-Weyl displacement label `X^k1 Z^k2`, indices reduced mod d.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HwIndex {
    pub dim: usize,
    pub k1: usize,
    pub k2: usize,
}

impl HwIndex {
    pub fn new(dim: usize, k1: usize, k2: usize) -> Self {
        HwIndex { dim, k1: k1 % dim, k2: k2 % dim }
    }

    pub fn omega(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI / self.dim as f64)
    }

    /// Outcome index `k1 * d + k2` used by [`sic_from_fiducial`].
    pub fn outcome(&self) -> usize {
        self.k1 * self.dim + self.k2
    }
}

pub(crate) fn root_of_unity(d: usize, power: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (power % d) as f64 / d as f64)
}

/// `X^k1 Z^k2` with `Z|e_r> = w^r |e_r>` and `X|e_r> = |e_{r+1 mod d}>`.
pub fn hw_displacement(d: usize, k1: usize, k2: usize) -> Result<DMatrix<C64>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let idx = HwIndex::new(d, k1, k2);
    let mut m = DMatrix::zeros(d, d);
    for r in 0..d {
        m[((r + idx.k1) % d, r)] = root_of_unity(d, idx.k2 * r);
    }
    Ok(m)
}

/// SIC POM generated by the Heisenberg-Weyl orbit of `fiducial`.
///
/// Outcome `k1 * d + k2` is `X^k1 Z^k2 |psi><psi| Z^-k2 X^-k1 / d`. The ket is
/// rejected if some `| |<psi|X^k1 Z^k2|psi>| - 1/sqrt(d+1) |` exceeds `tol`.
pub fn sic_from_fiducial(fiducial: &Ket, tol: f64) -> Result<Pom> {
    let d = fiducial.dim();
    let (deviation, k1, k2) = fiducial_deviation(fiducial);
    if deviation > tol {
        return Err(Error::NotFiducial { k1, k2, deviation, tolerance: tol });
    }
    let mut states = Vec::with_capacity(d * d);
    for k1 in 0..d {
        for k2 in 0..d {
            states.push(fiducial.apply(&hw_displacement(d, k1, k2)?));
        }
    }
    let weights = vec![1.0 / d as f64; d * d];
    Ok(Pom::from_states(WeightedStateSet::new(states, weights)?))
}

/// Unit vectors of the regular tetrahedron with `a_1 = z` and `a_2` in the
/// x-z plane.
pub fn tetrahedron_vertices() -> [BlochVector; 4] {
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    [
        BlochVector::new(0.0, 0.0, 1.0),
        BlochVector::new(2.0 * s2 / 3.0, 0.0, -1.0 / 3.0),
        BlochVector::new(-s2 / 3.0, s6 / 3.0, -1.0 / 3.0),
        BlochVector::new(-s2 / 3.0, -s6 / 3.0, -1.0 / 3.0),
    ]
}

/// Qubit SIC POM `Pi_k = (1 + a_k.tau)/4`.
pub fn qubit_tetrahedron() -> Pom {
    let states = tetrahedron_vertices().iter().map(|a| Ket::from_bloch_direction(a.0).expect("unit vector")).collect();
    Pom::from_states(WeightedStateSet::new(states, vec![0.5; 4]).expect("valid weights"))
}

/// The six eigenstates of the three Pauli matrices with weight 1/3 each,
/// `Pi = (1 +- tau_i)/6`.
pub fn qubit_mub_octahedron() -> Pom {
    let dirs =
        [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    let states = dirs.iter().map(|&n| Ket::from_bloch_direction(n).expect("unit vector")).collect();
    Pom::from_states(WeightedStateSet::new(states, vec![1.0 / 3.0; 6]).expect("valid weights"))
}

/// All tensor products `Pi_{j1} (x) Pi_{j2} (x) ...`, with the last factor
/// varying fastest.
pub fn product_pom(poms: &[Pom]) -> Result<Pom> {
    let (first, rest) = poms.split_first().ok_or(Error::EmptyMeasurement)?;
    let mut acc = first.clone();
    for p in rest {
        acc = tensor_pair(&acc, p);
    }
    Ok(acc)
}

fn tensor_pair(a: &Pom, b: &Pom) -> Pom {
    let dim = a.dim * b.dim;
    match (&a.source, &b.source) {
        (Some(sa), Some(sb)) => {
            let mut states = Vec::with_capacity(sa.len() * sb.len());
            let mut weights = Vec::with_capacity(sa.len() * sb.len());
            for (ka, wa) in sa.states().iter().zip(sa.weights()) {
                for (kb, wb) in sb.states().iter().zip(sb.weights()) {
                    states.push(ka.kron(kb));
                    weights.push(wa * wb);
                }
            }
            let set = WeightedStateSet { dim, states, weights };
            // Kronecker products of the stored effects keep the two
            // constructions bit-compatible with the no-source branch.
            let effects = a.effects.iter().flat_map(|ea| b.effects.iter().map(move |eb| ea.kron(eb))).collect();
            Pom { dim, effects, source: Some(set) }
        }
        _ => Pom {
            dim,
            effects: a.effects.iter().flat_map(|ea| b.effects.iter().map(move |eb| ea.kron(eb))).collect(),
            source: None,
        },
    }
}

/// White-noise SIC POM `Pi_j(alpha) = (alpha/d + |psi_j><psi_j|) / (d alpha + d)`.
pub fn noisy_sic(sic: &Pom, alpha: f64) -> Result<Pom> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("noise strength {alpha} < 0")));
    }
    let source = sic
        .source()
        .ok_or_else(|| Error::InvalidParameter("noisy_sic needs a rank-one SIC POM with known states".into()))?;
    let d = sic.dim() as f64;
    if source.len() != sic.dim() * sic.dim() {
        return Err(Error::InvalidParameter(format!(
            "SIC POM in d={} must have {} outcomes, found {}",
            sic.dim(),
            sic.dim() * sic.dim(),
            source.len()
        )));
    }
    if alpha == 0.0 {
        return Ok(sic.clone());
    }
    let noise = HermitianOperator::identity(sic.dim()).scale(alpha / d);
    let norm = 1.0 / (d * alpha + d);
    let effects = source.states().iter().map(|k| (&noise + &k.projector()).scale(norm)).collect();
    Pom::new(sic.dim(), effects)
}
