//! Fiducial lookup: explicit file, then a directory of `d{d}.json` files,
//! then the searched fiducials bundled with the binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tomolab_core::operators::Ket;
use tomolab_core::povm::{load_fiducial, sic_from_fiducial, FiducialFile, Pom};

use crate::error::{CliError, CliResult};

/// Deviation from `1/sqrt(d+1)` tolerated when loading a fiducial.
pub const LOAD_TOL: f64 = 1e-8;

const BUNDLED: [(usize, &str); 7] = [
    (2, include_str!("../fiducials/d2.json")),
    (3, include_str!("../fiducials/d3.json")),
    (4, include_str!("../fiducials/d4.json")),
    (5, include_str!("../fiducials/d5.json")),
    (6, include_str!("../fiducials/d6.json")),
    (7, include_str!("../fiducials/d7.json")),
    (8, include_str!("../fiducials/d8.json")),
];

pub fn bundled_dims() -> Vec<usize> {
    BUNDLED.iter().map(|(d, _)| *d).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FiducialSource {
    /// Single fiducial file, used when its dimension matches.
    pub file: Option<PathBuf>,
    /// Directory holding `d{d}.json` files.
    pub dir: Option<PathBuf>,
}

fn bundled(d: usize) -> Option<CliResult<Ket>> {
    BUNDLED.iter().find(|(dim, _)| *dim == d).map(|(_, text)| {
        let file: FiducialFile = serde_json::from_str(text)?;
        Ok(file.to_ket(LOAD_TOL)?)
    })
}

fn load(path: &Path) -> CliResult<Ket> {
    load_fiducial(path, LOAD_TOL)
        .map_err(CliError::from)
        .map_err(|e| e.context(format!("loading fiducial {}", path.display())))
}

impl FiducialSource {
    pub fn ket(&self, d: usize) -> CliResult<Ket> {
        if let Some(path) = &self.file {
            let ket = load(path)?;
            if ket.dim() == d {
                return Ok(ket);
            }
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("d{d}.json"));
            if path.exists() {
                return load(&path);
            }
        }
        bundled(d).unwrap_or_else(|| {
            Err(CliError::construction(format!(
                "no fiducial available for d = {d}; create one with \
                 `tomolab fiducial find --d {d} --out <dir>/d{d}.json` and pass --fiducials <dir>"
            )))
        })
    }

    pub fn sic(&self, d: usize) -> CliResult<Pom> {
        Ok(sic_from_fiducial(&self.ket(d)?, LOAD_TOL)?)
    }
}
