//! Product SIC POMs on multipartite systems, compared with joint SIC POMs.

use std::f64::consts::PI;

use serde::Serialize;

use super::{check_copies, check_dim, check_purity, mean_hs_distance, tight_ic_mse};
use crate::error::{Error, Result};

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("no subsystem dimensions".into()));
    }
    for &d in dims {
        check_dim(d)?;
    }
    Ok(dims.iter().product())
}

fn mse_factor(dims: &[usize]) -> f64 {
    dims.iter().map(|&d| (d * d + d - 1) as f64).product()
}

/// `[prod_j (d_j^2 + d_j - 1) - tr(rho^2)] / N`.
pub fn product_mse(dims: &[usize], purity: f64, n: f64) -> Result<f64> {
    let d = total_dim(dims)?;
    check_purity(d, purity)?;
    check_copies(n)?;
    Ok((mse_factor(dims) - purity) / n)
}

/// Approximate variance of the squared HS error for a bipartite product SIC
/// POM, given global and reduced purities.
pub fn product_variance_bipartite(d1: usize, d2: usize, purity: f64, reduced: [f64; 2], n: f64) -> Result<f64> {
    check_purity(d1 * d2, purity)?;
    check_purity(d1, reduced[0])?;
    check_purity(d2, reduced[1])?;
    check_copies(n)?;
    let a = (d1 * d1 + d1 - 2) as f64;
    let b = (d2 * d2 + d2 - 2) as f64;
    let [p1, p2] = reduced;
    let inner = a * b * (1.0 + purity + p1 + p2) + a * (1.0 + p1) + b * (1.0 + p2);
    Ok(2.0 * inner / (n * n))
}

/// Exact variance of the squared HS error at the completely mixed state.
pub fn product_variance_mixed(dims: &[usize], n: f64) -> Result<f64> {
    total_dim(dims)?;
    check_copies(n)?;
    let mut first = 1.0;
    let mut second = 1.0;
    for &d in dims {
        let df = d as f64;
        first *= (df.powi(3) + 2.0 * df * df - 2.0) / df;
        second /= df * df;
    }
    Ok(2.0 * (first - second) / (n * n))
}

/// `mse_prod / mse_joint` at the same purity.
pub fn product_vs_joint_mse_ratio(dims: &[usize], purity: f64) -> Result<f64> {
    let d = total_dim(dims)?;
    Ok(product_mse(dims, purity, 1.0)? / tight_ic_mse(d, purity, 1.0)?)
}

/// `(1 + 1/d - 1/d^2)^-1 (1 + 1/d1 - 1/d1^2)^k` with `d = d1^k`.
pub fn multipartite_ratio_approx(d1: usize, k: u32) -> f64 {
    let f = |x: f64| 1.0 + 1.0 / x - 1.0 / (x * x);
    let d = (d1 as f64).powi(k as i32);
    f(d1 as f64).powi(k as i32) / f(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductPredictions {
    pub mse: f64,
    /// Bipartite approximation when reduced purities are given, exact
    /// value at the completely mixed state, otherwise absent.
    pub variance: Option<f64>,
    pub mean_trace_distance: f64,
    pub mean_hs_distance: f64,
    /// Product MSE over joint SIC MSE.
    pub ratio_vs_joint: f64,
}

pub fn product_predictions(
    dims: &[usize],
    purity: f64,
    reduced_purities: Option<&[f64]>,
    n: f64,
) -> Result<ProductPredictions> {
    let d = total_dim(dims)?;
    let mse = product_mse(dims, purity, n)?;
    let variance = match reduced_purities {
        Some(r) if dims.len() == 2 && r.len() == 2 => {
            Some(product_variance_bipartite(dims[0], dims[1], purity, [r[0], r[1]], n)?)
        }
        Some(r) => {
            return Err(Error::InvalidParameter(format!(
                "{} reduced purities for {} subsystems; only bipartite is supported",
                r.len(),
                dims.len()
            )))
        }
        None if (purity - 1.0 / d as f64).abs() < 1e-12 => Some(product_variance_mixed(dims, n)?),
        None => None,
    };
    let df = d as f64;
    Ok(ProductPredictions {
        mse,
        variance,
        mean_trace_distance: 4.0 * df.sqrt() / (3.0 * PI) * mse.sqrt(),
        mean_hs_distance: mean_hs_distance(d, mse),
        ratio_vs_joint: mse / tight_ic_mse(d, purity, n)?,
    })
}
