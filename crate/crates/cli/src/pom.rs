use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tomolab_core::povm::{noisy_sic, product_pom, qubit_mub_octahedron, qubit_tetrahedron, Pom};

use crate::error::{CliError, CliResult};
use crate::fiducials::FiducialSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PomKind {
    /// Heisenberg-Weyl SIC POM from a fiducial (`--d`).
    Sic,
    /// Qubit tetrahedron SIC POM.
    Tetra,
    /// Qubit octahedron (six Pauli eigenstates).
    Octa,
    /// Tensor product of SIC POMs (`--dims`).
    ProductSic,
    /// SIC POM mixed with white noise (`--d`, `--alpha`).
    NoisySic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PomSpec {
    pub kind: PomKind,
    /// Total dimension.
    pub dim: usize,
    /// Subsystem dimensions, product POMs only.
    pub dims: Option<Vec<usize>>,
    /// Noise strength, noisy SIC only.
    pub alpha: Option<f64>,
}

impl PomSpec {
    /// Checks flag consistency and fills in the total dimension.
    pub fn resolve(kind: PomKind, d: Option<usize>, dims: Option<Vec<usize>>, alpha: Option<f64>) -> CliResult<Self> {
        if kind != PomKind::ProductSic && dims.is_some() {
            return Err(CliError::usage("--dims only applies to product-sic"));
        }
        if kind != PomKind::NoisySic && alpha.is_some() {
            return Err(CliError::usage("--alpha only applies to noisy-sic"));
        }
        let need_d = || d.ok_or_else(|| CliError::usage("--d is required for this POM"));
        let spec = match kind {
            PomKind::Sic => PomSpec { kind, dim: need_d()?, dims: None, alpha: None },
            PomKind::Tetra | PomKind::Octa => {
                if d.is_some_and(|d| d != 2) {
                    return Err(CliError::usage("tetra and octa are qubit POMs; --d must be 2"));
                }
                PomSpec { kind, dim: 2, dims: None, alpha: None }
            }
            PomKind::ProductSic => {
                let dims = dims.ok_or_else(|| CliError::usage("--dims is required for product-sic"))?;
                if dims.is_empty() || dims.iter().any(|&x| x < 2) {
                    return Err(CliError::usage("--dims entries must be at least 2"));
                }
                let dim = dims.iter().product();
                if d.is_some_and(|d| d != dim) {
                    return Err(CliError::usage(format!("--d {} disagrees with --dims product {dim}", d.unwrap_or(0))));
                }
                PomSpec { kind, dim, dims: Some(dims), alpha: None }
            }
            PomKind::NoisySic => {
                let a = alpha.ok_or_else(|| CliError::usage("--alpha is required for noisy-sic"))?;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(CliError::usage("--alpha must be finite and non-negative"));
                }
                PomSpec { kind, dim: need_d()?, dims: None, alpha: Some(a) }
            }
        };
        if spec.dim < 2 {
            return Err(CliError::usage("dimension must be at least 2"));
        }
        Ok(spec)
    }

    pub fn build(&self, fiducials: &FiducialSource) -> CliResult<Pom> {
        match self.kind {
            PomKind::Sic => fiducials.sic(self.dim),
            PomKind::Tetra => Ok(qubit_tetrahedron()),
            PomKind::Octa => Ok(qubit_mub_octahedron()),
            PomKind::ProductSic => {
                let factors = self
                    .dims
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .map(|&d| fiducials.sic(d))
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(product_pom(&factors)?)
            }
            PomKind::NoisySic => Ok(noisy_sic(&fiducials.sic(self.dim)?, self.alpha.unwrap_or(0.0))?),
        }
    }
}
