//! Closed-form error predictions for linear tomography.
//!
//! Functions take the number of copies `n` explicitly; pass `n = 1.0` for
//! scaled quantities (MSE times `N`, distances times `sqrt(N)`).

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub mod product;
pub mod qubit;

pub use product::{
    multipartite_ratio_approx, product_mse, product_predictions, product_variance_bipartite, product_variance_mixed,
    product_vs_joint_mse_ratio, ProductPredictions,
};
pub use qubit::{
    extreme_state_ellipsoid, isotropic_mean_trace_distance, mean_error_closed_form, mean_error_quadrature,
    qubit_mean_error, qubit_mean_trace_distance, qubit_mse_matrix, QubitEllipsoid,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Mse,
    MeanTraceDistance,
    MeanHsDistance,
    Variance,
    Ratio,
}

/// Power of `N` multiplied into a reported value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Raw value at the stated `N`.
    None,
    /// Value times `sqrt(N)`.
    SqrtN,
    /// Value times `N`.
    N,
    /// Value times `N^2`.
    NSquared,
}

/// A scalar prediction together with the formula that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryPrediction {
    pub quantity: Quantity,
    pub value: f64,
    pub equation: &'static str,
    pub scaling: Scaling,
}

pub const EQ_TIGHT_IC_MSE: &str = "N*mse = d^2 + d - 1 - tr(rho^2)";
pub const EQ_RMT_TRACE: &str = "E_tr = (4/(3 pi)) sqrt(d * mse)";
pub const EQ_CHI_HS: &str = "E_hs = sqrt(mse/(d^2-1)) sqrt(2) Gamma(d^2/2) / Gamma((d^2-1)/2)";
pub const EQ_NOISY_MSE: &str = "N*mse = [1 + (d+1)^2 (d-1) (alpha+1)^2]/d - tr(rho^2)";
pub const EQ_NOISY_TRACE: &str = "E_tr ~ (4/(3 pi)) (alpha+1) d^(3/2) / sqrt(N)";
pub const EQ_NOISY_HS: &str = "E_hs ~ (alpha+1) d / sqrt(N)";
pub const EQ_PRODUCT_MSE: &str = "N*mse = prod_j (d_j^2 + d_j - 1) - tr(rho^2)";
pub const EQ_PRODUCT_TRACE: &str = "E_tr = (4 sqrt(d)/(3 pi)) sqrt(prod_j (d_j^2 + d_j - 1) - tr(rho^2)) / sqrt(N)";
pub const EQ_PRODUCT_VAR_BIPARTITE: &str =
    "N^2 v / 2 = (d1^2+d1-2)(d2^2+d2-2)[1+P+P1+P2] + (d1^2+d1-2)[1+P1] + (d2^2+d2-2)[1+P2]";
pub const EQ_PRODUCT_VAR_MIXED: &str = "N^2 v / 2 = prod_j (d_j^3 + 2 d_j^2 - 2)/d_j - prod_j 1/d_j^2";
pub const EQ_PRODUCT_RATIO: &str = "mse_prod / mse_joint";
pub const EQ_QUBIT_MEAN_ERROR: &str = "E_tr = E|ds|/2 over the Gaussian uncertainty ellipsoid";

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

pub(crate) fn check_copies(n: f64) -> Result<()> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!("N must be positive, got {n}")));
    }
    Ok(())
}

/// Purity must lie in `[1/d, 1]` up to round-off.
pub fn check_purity(d: usize, purity: f64) -> Result<()> {
    check_dim(d)?;
    let lo = 1.0 / d as f64;
    if !(purity >= lo - 1e-12 && purity <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("purity {purity} outside [1/{d}, 1]")));
    }
    Ok(())
}

/// MSE of any rank-one tight IC measurement.
pub fn tight_ic_mse(d: usize, purity: f64, n: f64) -> Result<f64> {
    check_purity(d, purity)?;
    check_copies(n)?;
    let d = d as f64;
    Ok((d * d + d - 1.0 - purity) / n)
}

/// Mean trace distance from the Wigner semicircle approximation.
pub fn rmt_mean_trace_distance(d: usize, mse: f64) -> f64 {
    4.0 / (3.0 * PI) * (d as f64 * mse.max(0.0)).sqrt()
}

/// Mean HS distance assuming an isotropic Gaussian error in `d^2 - 1`
/// dimensions (chi distribution mean).
pub fn mean_hs_distance(d: usize, mse: f64) -> f64 {
    let k = (d * d) as f64;
    let log_ratio = ln_gamma(k / 2.0) - ln_gamma((k - 1.0) / 2.0);
    (mse.max(0.0) / (k - 1.0)).sqrt() * 2f64.sqrt() * log_ratio.exp()
}

/// `N^2` times the unitary average of `Tr C(rho)^2`, with its bounds over
/// rank-one tight IC measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnisotropyFunctionals {
    pub mean_tr_c2: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Evaluates the averaged `N^2 Tr C^2` at order-3 frame potential `phi3`.
///
/// `cubic` is `tr(rho^3)`.
pub fn anisotropy_functionals(d: usize, purity: f64, cubic: f64, phi3: f64) -> Result<AnisotropyFunctionals> {
    check_purity(d, purity)?;
    if !(cubic <= purity.powf(1.5) + 1e-12 && cubic >= purity * purity - 1e-12) {
        return Err(Error::InvalidParameter(format!("tr(rho^3) = {cubic} inconsistent with tr(rho^2) = {purity}")));
    }
    let p = purity;
    let df = d as f64;
    let excess = p - 1.0 / df;
    let cubic_term = 2.0 * (2.0 * (df + 1.0) * cubic / (df + 2.0) + (df - 1.0) * p / (df + 2.0) - 1.0 / (df + 2.0));
    let base = df * df + 2.0 * df - 2.0 / df + p * p - cubic_term;
    let phi_coef = ((df + 1.0).powi(3) * phi3 - 2.0 * (2.0 * df * df + 3.0 * df - 1.0)) / (df - 1.0);
    Ok(AnisotropyFunctionals {
        mean_tr_c2: base + phi_coef * excess,
        lower_bound: base + 2.0 * (df * df - 2.0) / (df + 2.0) * excess,
        upper_bound: df * df + 2.0 * df + 2.0 * df * (df + 1.0) * excess,
    })
}

/// Exact `N^2 Tr C(rho)^2` for a SIC POM, from the Born probabilities.
pub fn sic_tr_c2(d: usize, purity: f64, probabilities: &[f64]) -> Result<f64> {
    check_purity(d, purity)?;
    if probabilities.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: probabilities.len() });
    }
    let df = d as f64;
    let p3: f64 = probabilities.iter().map(|p| p * p * p).sum();
    Ok((df * df + df + 2.0) * (1.0 + purity) - 1.0 + purity * purity - 2.0 * (df * df + df).powi(2) * p3)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoisyPredictions {
    pub mse: f64,
    pub mean_trace_distance: f64,
    pub mean_hs_distance: f64,
}

/// SIC POM with white noise of strength `alpha`.
pub fn noisy_predictions(d: usize, alpha: f64, purity: f64, n: f64) -> Result<NoisyPredictions> {
    check_purity(d, purity)?;
    check_copies(n)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let df = d as f64;
    let a1 = alpha + 1.0;
    let mse = ((1.0 + (df + 1.0).powi(2) * (df - 1.0) * a1 * a1) / df - purity) / n;
    Ok(NoisyPredictions {
        mse,
        mean_trace_distance: 4.0 / (3.0 * PI) * a1 * df.powf(1.5) / n.sqrt(),
        mean_hs_distance: a1 * df / n.sqrt(),
    })
}

/// Tight-IC predictions at one `(d, purity, N)` point.
pub fn tight_ic_predictions(d: usize, purity: f64, n: f64) -> Result<Vec<TheoryPrediction>> {
    let mse = tight_ic_mse(d, purity, n)?;
    Ok(vec![
        TheoryPrediction { quantity: Quantity::Mse, value: mse, equation: EQ_TIGHT_IC_MSE, scaling: Scaling::None },
        TheoryPrediction {
            quantity: Quantity::MeanTraceDistance,
            value: rmt_mean_trace_distance(d, mse),
            equation: EQ_RMT_TRACE,
            scaling: Scaling::None,
        },
        TheoryPrediction {
            quantity: Quantity::MeanHsDistance,
            value: mean_hs_distance(d, mse),
            equation: EQ_CHI_HS,
            scaling: Scaling::None,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tight_ic_values() {
        assert_abs_diff_eq!(tight_ic_mse(4, 0.25, 1.0).unwrap(), 18.75, epsilon = 1e-14);
        assert_abs_diff_eq!(tight_ic_mse(2, 1.0, 10.0).unwrap(), 0.4, epsilon = 1e-14);
        assert!(tight_ic_mse(2, 0.3, 1.0).is_err());
        assert!(tight_ic_mse(2, 0.5, 0.0).is_err());
    }

    #[test]
    fn distance_formulas() {
        let joint_mixed = rmt_mean_trace_distance(4, 18.75);
        assert_abs_diff_eq!(joint_mixed, 3.676, epsilon = 5e-4);
        assert_eq!(rmt_mean_trace_distance(3, 0.0), 0.0);
        // sqrt(2) Gamma(2) / Gamma(3/2)
        assert_abs_diff_eq!(mean_hs_distance(2, 3.0), 2f64.sqrt() / (PI.sqrt() / 2.0), epsilon = 1e-12);
        assert_eq!(mean_hs_distance(5, 0.0), 0.0);
        let large = mean_hs_distance(64, 1.0);
        assert!((large - 1.0).abs() < 1e-3);
        // no overflow at d^2 = 4096
        assert!(mean_hs_distance(64, 2.0).is_finite());
    }

    #[test]
    fn anisotropy_lower_bound_saturated_by_three_designs() {
        for d in 2..8 {
            let df = d as f64;
            let (p, t) = (0.6f64, 0.6f64.powf(1.6));
            let phi3 = 6.0 * df / ((df + 1.0) * (df + 2.0));
            let a = anisotropy_functionals(d, p, t, phi3).unwrap();
            assert_abs_diff_eq!(a.mean_tr_c2, a.lower_bound, epsilon = 1e-10);
            let top = anisotropy_functionals(d, p, t, 2.0 * df / (df + 1.0)).unwrap();
            assert!(top.mean_tr_c2 <= top.upper_bound + 1e-10);
        }
    }

    #[test]
    fn noisy_reduces_to_ideal() {
        for d in 2..6 {
            let p = 1.0 / d as f64 + 0.1;
            let a = noisy_predictions(d, 0.0, p, 3.0).unwrap();
            assert_abs_diff_eq!(a.mse, tight_ic_mse(d, p, 3.0).unwrap(), epsilon = 1e-14);
        }
        assert!(noisy_predictions(2, -0.5, 0.5, 1.0).is_err());
    }
}
