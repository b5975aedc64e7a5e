//! Frame potentials and weighted t-design checks.
//!
//! Frame potentials are computed from the Gram matrix of the state set, so
//! the cost is quadratic in the number of states and independent of `t`.

use serde::Serialize;

use crate::povm::WeightedStateSet;
use crate::stats::pairwise_sum;

/// Default slack below which a set counts as a weighted t-design.
pub const DESIGN_TOL: f64 = 1e-9;

/// `Phi_t = sum_{j,k} w_j w_k |<psi_j|psi_k>|^{2t}`.
pub fn frame_potential(set: &WeightedStateSet, t: u32) -> f64 {
    let states = set.states();
    let w = set.weights();
    let rows: Vec<f64> = (0..states.len())
        .map(|j| {
            let terms: Vec<f64> = (0..states.len())
                .map(|k| w[j] * w[k] * states[j].inner(&states[k]).norm_sqr().powi(t as i32))
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// `n choose k` in floating point.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Minimum of the order-`t` frame potential, `d^2 / C(d+t-1, t)`.
pub fn frame_potential_lower_bound(d: usize, t: u32) -> f64 {
    let d = d as u64;
    (d * d) as f64 / binomial(d + t as u64 - 1, t as u64)
}

#[derive(Clone, Debug, Serialize)]
pub struct FramePotentialReport {
    pub t: u32,
    pub phi_t: f64,
    pub lower_bound: f64,
    pub is_design: bool,
    pub slack: f64,
}

pub fn is_weighted_t_design(set: &WeightedStateSet, t: u32, tol: f64) -> FramePotentialReport {
    let phi_t = frame_potential(set, t);
    let lower_bound = frame_potential_lower_bound(set.dim(), t);
    let slack = phi_t - lower_bound;
    FramePotentialReport { t, phi_t, lower_bound, is_design: slack < tol, slack }
}

/// Lower bound on the number of elements of a weighted t-design,
/// `C(d + ceil(t/2) - 1, ceil(t/2)) * C(d + floor(t/2) - 1, floor(t/2))`.
pub fn design_min_size(d: usize, t: u32) -> u64 {
    let d = d as u64;
    let hi = (t as u64).div_ceil(2);
    let lo = t as u64 / 2;
    (binomial(d + hi - 1, hi) * binomial(d + lo - 1, lo)).round() as u64
}
