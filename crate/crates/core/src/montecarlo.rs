//! Deterministic Monte Carlo harness for linear tomography.
//!
//! Every trial draws from its own ChaCha8 stream seeded by a hash of
//! `(master_seed, state_index, trial_index)`, and results are reduced in
//! index order with pairwise summation, so the output does not depend on
//! the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{random_haar_pure, DensityOperator};
use crate::povm::Pom;
use crate::stats::{mean, pairwise_sum, std_dev, std_error};
use crate::tomography::{born_probabilities, linear_estimate, ReconstructionSet};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "TOMOLAB_THREADS";

const TRIAL_DOMAIN: u64 = 0x7472_6961_6c00_0001;
const STATE_DOMAIN: u64 = 0x7374_6174_6500_0002;

/// Copies per trial used when none is given, `1000 + 20 d^2`.
pub fn default_copies(d: usize) -> u64 {
    1000 + 20 * (d * d) as u64
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one `(domain, state, trial)` cell.
pub fn stream_seed(master: u64, domain: u64, state: u64, trial: u64) -> u64 {
    let mut h = splitmix64(master ^ domain);
    h = splitmix64(h ^ state);
    splitmix64(h ^ trial.rotate_left(32))
}

pub fn trial_rng(master: u64, state: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, TRIAL_DOMAIN, state as u64, trial as u64))
}

fn state_rng(master: u64, state: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, STATE_DOMAIN, state as u64, 0))
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probabilities: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    if probabilities.is_empty() {
        return Err(Error::EmptyMeasurement);
    }
    if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidProbabilities(format!("entry {p}")));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("sum {total}")));
    }
    let mut counts = vec![0u64; probabilities.len()];
    let mut remaining = n;
    let mut mass = total;
    let last = probabilities.len() - 1;
    for (j, &p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if j == last {
            counts[j] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).map_err(|e| Error::InvalidProbabilities(e.to_string()))?.sample(rng);
        counts[j] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub trace_distance: f64,
    pub hs_distance: f64,
    pub sq_hs: f64,
}

fn trial_from_probabilities<R: Rng + ?Sized>(
    probabilities: &[f64],
    recon: &ReconstructionSet,
    rho: &DensityOperator,
    n: u64,
    rng: &mut R,
) -> Result<TrialResult> {
    let counts = sample_counts(probabilities, n, rng)?;
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let est = linear_estimate(&freqs, recon)?;
    let delta = &est - rho.as_operator();
    let sq_hs = delta.purity();
    Ok(TrialResult { trace_distance: 0.5 * delta.trace_norm(), hs_distance: sq_hs.sqrt(), sq_hs })
}

/// One simulated experiment: sample `N` outcomes, reconstruct linearly and
/// compare with `rho`.
pub fn run_trial<R: Rng + ?Sized>(
    pom: &Pom,
    recon: &ReconstructionSet,
    rho: &DensityOperator,
    n: u64,
    rng: &mut R,
) -> Result<TrialResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let p = born_probabilities(pom, rho)?;
    trial_from_probabilities(&p, recon, rho, n, rng)
}

#[derive(Clone, Debug)]
pub enum TrueStateSpec {
    CompletelyMixed,
    Fixed(DensityOperator),
    /// `count` Haar-random pure states.
    HaarPureEnsemble {
        count: usize,
    },
    /// A caller-supplied list of states, each run for `trials` repetitions.
    Explicit(Vec<DensityOperator>),
}

impl TrueStateSpec {
    pub fn is_ensemble(&self) -> bool {
        matches!(self, TrueStateSpec::HaarPureEnsemble { .. } | TrueStateSpec::Explicit(_))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub state: TrueStateSpec,
    /// Copies per trial; `None` selects [`default_copies`].
    pub n: Option<u64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker count; `None` falls back to [`THREADS_ENV`], then to rayon's
    /// default.
    pub threads: Option<usize>,
}

/// Aggregated results. Distances carry a factor `sqrt(N)`, the MSE a factor
/// `N`. Standard deviations refer to the scaled trace distance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub dim: usize,
    pub n: u64,
    pub trials: usize,
    pub states: usize,
    pub scaled_mean_trace_distance: f64,
    pub scaled_mean_hs_distance: f64,
    pub scaled_mse: f64,
    pub se_trace_distance: f64,
    pub se_hs_distance: f64,
    pub se_mse: f64,
    /// Standard deviation over all trials pooled together.
    pub std_over_trials: f64,
    /// Mean over states of the per-state standard deviation over trials.
    pub std_over_states_mean_of_trials: Option<f64>,
    /// Standard deviation over states of the per-state mean.
    pub std_over_states: Option<f64>,
}

fn resolve_threads(requested: Option<usize>) -> Result<usize> {
    if let Some(t) = requested {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV}={v} is not an integer"))),
        Err(_) => Ok(0),
    }
}

fn resolve_states(spec: &TrueStateSpec, d: usize, seed: u64) -> Result<Vec<DensityOperator>> {
    let check = |rho: &DensityOperator| {
        if rho.dim() != d {
            Err(Error::DimensionMismatch { expected: d, found: rho.dim() })
        } else {
            Ok(())
        }
    };
    match spec {
        TrueStateSpec::CompletelyMixed => Ok(vec![DensityOperator::maximally_mixed(d)?]),
        TrueStateSpec::Fixed(rho) => {
            check(rho)?;
            Ok(vec![rho.clone()])
        }
        TrueStateSpec::HaarPureEnsemble { count } => {
            if *count == 0 {
                return Err(Error::InvalidParameter("empty state ensemble".into()));
            }
            (0..*count)
                .map(|s| random_haar_pure(d, &mut state_rng(seed, s)).map(|k| DensityOperator::pure(&k)))
                .collect()
        }
        TrueStateSpec::Explicit(list) => {
            if list.is_empty() {
                return Err(Error::InvalidParameter("empty state ensemble".into()));
            }
            list.iter().try_for_each(check)?;
            Ok(list.clone())
        }
    }
}

/// Per-state results in trial order.
#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub n: u64,
    pub trials: Vec<Vec<TrialResult>>,
}

/// Runs every trial and returns the raw per-trial results.
pub fn run_trials(pom: &Pom, recon: &ReconstructionSet, config: &ExperimentConfig) -> Result<ExperimentRecord> {
    let d = pom.dim();
    let n = config.n.unwrap_or_else(|| default_copies(d));
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let states = resolve_states(&config.state, d, config.master_seed)?;
    let probabilities = states.iter().map(|rho| born_probabilities(pom, rho)).collect::<Result<Vec<_>>>()?;
    let trials = config.trials;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(config.threads)?)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let flat: Vec<TrialResult> = pool.install(|| {
        (0..states.len() * trials)
            .into_par_iter()
            .map(|idx| {
                let (s, t) = (idx / trials, idx % trials);
                let mut rng = trial_rng(config.master_seed, s, t);
                trial_from_probabilities(&probabilities[s], recon, &states[s], n, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ExperimentRecord { n, trials: flat.chunks(trials).map(|c| c.to_vec()).collect() })
}

impl ExperimentRecord {
    pub fn summarize(&self, dim: usize, ensemble: bool) -> ExperimentStats {
        let root_n = (self.n as f64).sqrt();
        let nf = self.n as f64;
        let column = |f: &dyn Fn(&TrialResult) -> f64| -> Vec<Vec<f64>> {
            self.trials.iter().map(|ts| ts.iter().map(f).collect()).collect()
        };
        let tr = column(&|r| r.trace_distance * root_n);
        let hs = column(&|r| r.hs_distance * root_n);
        let sq = column(&|r| r.sq_hs * nf);
        let state_means = |v: &[Vec<f64>]| -> Vec<f64> { v.iter().map(|x| mean(x)).collect() };
        // Standard error of the grand mean: spread of per-state means when
        // there are several states, spread of trials otherwise.
        let se = |v: &[Vec<f64>]| -> f64 {
            if v.len() > 1 {
                std_error(&state_means(v))
            } else {
                std_error(&v[0])
            }
        };
        let grand = |v: &[Vec<f64>]| -> f64 { mean(&state_means(v)) };
        let pooled: Vec<f64> = tr.iter().flatten().copied().collect();
        let per_state_std: Vec<f64> = tr.iter().map(|x| std_dev(x)).collect();
        ExperimentStats {
            dim,
            n: self.n,
            trials: self.trials.first().map_or(0, Vec::len),
            states: self.trials.len(),
            scaled_mean_trace_distance: grand(&tr),
            scaled_mean_hs_distance: grand(&hs),
            scaled_mse: grand(&sq),
            se_trace_distance: se(&tr),
            se_hs_distance: se(&hs),
            se_mse: se(&sq),
            std_over_trials: std_dev(&pooled),
            std_over_states_mean_of_trials: ensemble.then(|| pairwise_sum(&per_state_std) / per_state_std.len() as f64),
            std_over_states: ensemble.then(|| std_dev(&state_means(&tr))),
        }
    }
}

/// Runs the trial grid and aggregates it.
pub fn run_experiment(pom: &Pom, recon: &ReconstructionSet, config: &ExperimentConfig) -> Result<ExperimentStats> {
    let record = run_trials(pom, recon, config)?;
    Ok(record.summarize(pom.dim(), config.state.is_ensemble()))
}
