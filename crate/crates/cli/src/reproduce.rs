//! Figure and table reproduction at desk scale.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tomolab_core::montecarlo::{
    default_copies, run_experiment, stream_seed, trial_rng, ExperimentConfig, ExperimentStats, TrueStateSpec,
};
use tomolab_core::operators::{random_haar_pure, BlochVector, DensityOperator};
use tomolab_core::povm::{product_pom, qubit_tetrahedron, Pom};
use tomolab_core::theory::{
    extreme_state_ellipsoid, isotropic_mean_trace_distance, mean_hs_distance, multipartite_ratio_approx,
    product_predictions, product_vs_joint_mse_ratio, qubit_mean_trace_distance, qubit_mse_matrix,
    rmt_mean_trace_distance, tight_ic_mse,
};
use tomolab_core::tomography::reconstruction_for;

use crate::error::{ensure_finite, CliError, CliResult};
use crate::fiducials::FiducialSource;
use crate::output::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Scaled trace and HS distances of SIC POMs versus dimension.
    Fig1,
    /// Qubit SIC: extreme states and random states of fixed purity.
    Fig2,
    /// Two-qubit joint versus product SIC POM.
    Table1,
    /// Product-to-joint MSE ratio over bipartite dimensions.
    Fig3,
    /// Joint versus product SIC POMs on k qubits.
    Fig4,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
            Target::Table1 => "table1",
            Target::Fig3 => "fig3",
            Target::Fig4 => "fig4",
        }
    }
}

/// Fully resolved reproduction settings; stored in the run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub target: Target,
    pub seed: u64,
    /// Last dimension of the fig1 sweep and of the fig3 grid.
    pub dmax: usize,
    pub kmax_theory: u32,
    pub kmax_sim: u32,
    /// Copies per experiment; `None` means `1000 + 20 d^2`.
    pub n: Option<u64>,
    /// Repetitions for the completely mixed state.
    pub trials: usize,
    /// Number of random pure states.
    pub states: usize,
    /// Repetitions per random state.
    pub state_trials: usize,
    /// Purity grid points (fig2).
    pub points: usize,
    pub fiducials: FiducialSource,
}

#[derive(Clone, Debug, Default)]
pub struct ReproduceOverrides {
    pub seed: Option<u64>,
    pub dmax: Option<usize>,
    pub kmax_theory: Option<u32>,
    pub kmax_sim: Option<u32>,
    pub n: Option<u64>,
    pub trials: Option<usize>,
    pub states: Option<usize>,
    pub state_trials: Option<usize>,
    pub points: Option<usize>,
    pub fiducials: FiducialSource,
}

impl ReproduceConfig {
    pub fn defaults(target: Target) -> Self {
        let mut c = ReproduceConfig {
            target,
            seed: 0,
            dmax: 8,
            kmax_theory: 5,
            kmax_sim: 3,
            n: None,
            trials: 1000,
            states: 1000,
            state_trials: 100,
            points: 11,
            fiducials: FiducialSource::default(),
        };
        match target {
            Target::Fig2 => {
                c.n = Some(1000);
                c.state_trials = 400;
            }
            Target::Table1 => {
                c.n = Some(1000);
                c.state_trials = 1000;
            }
            Target::Fig3 => c.dmax = 10,
            Target::Fig1 | Target::Fig4 => {}
        }
        c
    }

    pub fn resolve(target: Target, o: ReproduceOverrides) -> CliResult<Self> {
        let mut c = Self::defaults(target);
        c.seed = o.seed.unwrap_or(c.seed);
        c.dmax = o.dmax.unwrap_or(c.dmax);
        c.kmax_theory = o.kmax_theory.unwrap_or(c.kmax_theory);
        c.kmax_sim = o.kmax_sim.unwrap_or(c.kmax_sim);
        c.n = o.n.or(c.n);
        c.trials = o.trials.unwrap_or(c.trials);
        c.states = o.states.unwrap_or(c.states);
        c.state_trials = o.state_trials.unwrap_or(c.state_trials);
        c.points = o.points.unwrap_or(c.points);
        c.fiducials = o.fiducials;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dmax < 2 {
            return Err(CliError::usage("--dmax must be at least 2"));
        }
        if self.kmax_theory == 0 || self.kmax_sim > self.kmax_theory || self.kmax_theory > 12 {
            return Err(CliError::usage("need 1 <= --kmax-sim <= --kmax-theory <= 12"));
        }
        if self.n == Some(0) || self.trials == 0 || self.states == 0 || self.state_trials == 0 {
            return Err(CliError::usage("--n, --trials, --states and --state-trials must be positive"));
        }
        if self.points < 2 {
            return Err(CliError::usage("--points must be at least 2"));
        }
        Ok(())
    }

    fn copies(&self, d: usize) -> u64 {
        self.n.unwrap_or_else(|| default_copies(d))
    }

    /// Master seed for the `item`-th experiment of kind `tag`.
    fn sub_seed(&self, tag: u64, item: u64) -> u64 {
        stream_seed(self.seed, 0x7461_0000 + tag, item, 0)
    }

    fn experiment(
        &self,
        pom: &Pom,
        state: TrueStateSpec,
        n: u64,
        trials: usize,
        tag: u64,
        item: u64,
    ) -> CliResult<ExperimentStats> {
        let recon = reconstruction_for(pom)?;
        let stats = run_experiment(
            pom,
            &recon,
            &ExperimentConfig { state, n: Some(n), trials, master_seed: self.sub_seed(tag, item), threads: None },
        )?;
        ensure_finite("scaled mean trace distance", stats.scaled_mean_trace_distance)?;
        Ok(stats)
    }

    fn mixed(&self, pom: &Pom, n: u64, tag: u64, item: u64) -> CliResult<ExperimentStats> {
        self.experiment(pom, TrueStateSpec::CompletelyMixed, n, self.trials, tag, item)
    }

    fn pure(&self, pom: &Pom, n: u64, tag: u64, item: u64) -> CliResult<ExperimentStats> {
        let spec = TrueStateSpec::HaarPureEnsemble { count: self.states };
        self.experiment(pom, spec, n, self.state_trials, tag, item)
    }
}

pub fn reproduce(cfg: &ReproduceConfig) -> CliResult<Table> {
    cfg.validate()?;
    let mut table = match cfg.target {
        Target::Fig1 => fig1(cfg)?,
        Target::Fig2 => fig2(cfg)?,
        Target::Table1 => table1(cfg)?,
        Target::Fig3 => fig3(cfg)?,
        Target::Fig4 => fig4(cfg)?,
    };
    table.meta("seed", cfg.seed);
    table.meta("config", serde_json::to_string(cfg)?);
    Ok(table)
}

/// `(trace, hs)` distances from the tight-IC MSE at `purity`, scaled by `sqrt(N)`.
fn tight_ic_distances(d: usize, purity: f64) -> CliResult<(f64, f64)> {
    let mse = tight_ic_mse(d, purity, 1.0)?;
    Ok((rmt_mean_trace_distance(d, mse), mean_hs_distance(d, mse)))
}

fn fig1(cfg: &ReproduceConfig) -> CliResult<Table> {
    let mut t = Table::new(
        "fig1",
        &[
            "d",
            "theory_tr",
            "sim_tr_mixed",
            "sim_tr_pure",
            "theory_hs",
            "sim_hs_mixed",
            "sim_hs_pure",
            "std_a",
            "std_b",
            "std_c",
            "n",
            "theory_tr_pure",
            "theory_hs_pure",
            "se_tr_mixed",
            "se_tr_pure",
            "se_hs_mixed",
            "se_hs_pure",
        ],
    );
    for d in 2..=cfg.dmax {
        let pom = cfg.fiducials.sic(d)?;
        let n = cfg.copies(d);
        log::info!("fig1: d = {d}, N = {n}");
        let (tr, hs) = tight_ic_distances(d, 1.0 / d as f64)?;
        let (tr_pure, hs_pure) = tight_ic_distances(d, 1.0)?;
        let mixed = cfg.mixed(&pom, n, 1, d as u64)?;
        let pure = cfg.pure(&pom, n, 2, d as u64)?;
        t.push(vec![
            Cell::Int(d as u64),
            tr.into(),
            mixed.scaled_mean_trace_distance.into(),
            pure.scaled_mean_trace_distance.into(),
            hs.into(),
            mixed.scaled_mean_hs_distance.into(),
            pure.scaled_mean_hs_distance.into(),
            mixed.std_over_trials.into(),
            pure.std_over_states_mean_of_trials.into(),
            pure.std_over_states.into(),
            Cell::Int(n),
            tr_pure.into(),
            hs_pure.into(),
            mixed.se_trace_distance.into(),
            pure.se_trace_distance.into(),
            mixed.se_hs_distance.into(),
            pure.se_hs_distance.into(),
        ]);
    }
    Ok(t)
}

fn fig2(cfg: &ReproduceConfig) -> CliResult<Table> {
    let mut t = Table::new(
        "fig2",
        &[
            "purity",
            "z",
            "theory_parallel",
            "theory_antiparallel",
            "theory_isotropic",
            "sim_random_avg",
            "sim_se",
            "theory_random_avg",
        ],
    );
    let pom = qubit_tetrahedron();
    let n = cfg.copies(2);
    for i in 0..cfg.points {
        let purity = 0.5 + 0.5 * i as f64 / (cfg.points - 1) as f64;
        let r = (2.0 * purity - 1.0).max(0.0).sqrt();
        log::info!("fig2: purity = {purity}");
        let parallel = qubit_mean_trace_distance(&extreme_state_ellipsoid(r, 1.0)?);
        let antiparallel = qubit_mean_trace_distance(&extreme_state_ellipsoid(-r, 1.0)?);
        let isotropic = isotropic_mean_trace_distance(r * r, 1.0);
        // random Bloch directions at fixed length r
        let mut rng = trial_rng(cfg.sub_seed(3, i as u64), 0, 0);
        let mut blochs = Vec::with_capacity(cfg.states);
        for _ in 0..cfg.states {
            let dir = BlochVector::from_operator(DensityOperator::pure(&random_haar_pure(2, &mut rng)?).as_operator())?;
            blochs.push(dir.scaled(r / dir.norm()));
        }
        let mut theory_sum = 0.0;
        for s in &blochs {
            theory_sum += qubit_mean_trace_distance(&qubit_mse_matrix(s, 1.0)?.1);
        }
        let states = blochs.iter().map(DensityOperator::from_bloch).collect::<Result<Vec<_>, _>>()?;
        let sim = cfg.experiment(&pom, TrueStateSpec::Explicit(states), n, cfg.state_trials, 4, i as u64)?;
        t.push(vec![
            purity.into(),
            r.into(),
            parallel.into(),
            antiparallel.into(),
            isotropic.into(),
            sim.scaled_mean_trace_distance.into(),
            sim.se_trace_distance.into(),
            (theory_sum / blochs.len() as f64).into(),
        ]);
    }
    Ok(t)
}

fn error_pct(theory: f64, numerical: f64) -> f64 {
    100.0 * (theory - numerical) / theory
}

fn table1(cfg: &ReproduceConfig) -> CliResult<Table> {
    let mut t = Table::new(
        "table1",
        &[
            "pom",
            "theory_mixed",
            "numerical_mixed",
            "error_pct_mixed",
            "theory_pure",
            "numerical_pure",
            "error_pct_pure",
            "std_over_states",
            "se_mixed",
            "se_pure",
        ],
    );
    let n = cfg.copies(4);
    let prod = product_pom(&[cfg.fiducials.sic(2)?, cfg.fiducials.sic(2)?])?;
    let joint = cfg.fiducials.sic(4)?;
    let prod_theory = |p: f64| product_predictions(&[2, 2], p, None, 1.0).map(|x| x.mean_trace_distance);
    let theory =
        [(prod_theory(0.25)?, prod_theory(1.0)?), (tight_ic_distances(4, 0.25)?.0, tight_ic_distances(4, 1.0)?.0)];
    let mut sims = Vec::new();
    for (i, pom) in [&prod, &joint].into_iter().enumerate() {
        log::info!("table1: {}", ["Prod", "Joint"][i]);
        sims.push((cfg.mixed(pom, n, 5, i as u64)?, cfg.pure(pom, n, 6, i as u64)?));
    }
    for (i, label) in ["Prod", "Joint"].into_iter().enumerate() {
        let (tm, tp) = theory[i];
        let (m, p) = &sims[i];
        t.push(vec![
            Cell::Text(label.into()),
            tm.into(),
            m.scaled_mean_trace_distance.into(),
            error_pct(tm, m.scaled_mean_trace_distance).into(),
            tp.into(),
            p.scaled_mean_trace_distance.into(),
            error_pct(tp, p.scaled_mean_trace_distance).into(),
            p.std_over_states.into(),
            m.se_trace_distance.into(),
            p.se_trace_distance.into(),
        ]);
    }
    t.push(vec![
        Cell::Text("Ratio".into()),
        (theory[0].0 / theory[1].0).into(),
        (sims[0].0.scaled_mean_trace_distance / sims[1].0.scaled_mean_trace_distance).into(),
        Cell::Empty,
        (theory[0].1 / theory[1].1).into(),
        (sims[0].1.scaled_mean_trace_distance / sims[1].1.scaled_mean_trace_distance).into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ]);
    t.meta("n", n);
    Ok(t)
}

fn fig3(cfg: &ReproduceConfig) -> CliResult<Table> {
    let mut t = Table::new("fig3", &["d1", "d2", "mse_ratio"]);
    for d1 in 2..=cfg.dmax {
        for d2 in 2..=cfg.dmax {
            let r = product_vs_joint_mse_ratio(&[d1, d2], 1.0 / (d1 * d2) as f64)?;
            t.push(vec![Cell::Int(d1 as u64), Cell::Int(d2 as u64), ensure_finite("mse ratio", r)?.into()]);
        }
    }
    Ok(t)
}

fn fig4(cfg: &ReproduceConfig) -> CliResult<Table> {
    let mut t = Table::new(
        "fig4",
        &[
            "k",
            "d",
            "n",
            "joint_theory",
            "joint_sim_mixed",
            "joint_sim_pure",
            "product_theory",
            "product_sim_mixed",
            "product_sim_pure",
            "ratio_theory",
            "ratio_sim_mixed",
            "ratio_sim_pure",
            "ratio_theory_pure",
            "ratio_approx",
        ],
    );
    for k in 1..=cfg.kmax_theory {
        let d = 1usize << k;
        let dims = vec![2; k as usize];
        let mixed = 1.0 / d as f64;
        let joint_theory = tight_ic_distances(d, mixed)?.0;
        let product_theory = product_predictions(&dims, mixed, None, 1.0)?.mean_trace_distance;
        let ratio_pure = (product_vs_joint_mse_ratio(&dims, 1.0)?).sqrt();
        let n = cfg.copies(d);
        let sims = if k <= cfg.kmax_sim {
            log::info!("fig4: k = {k}, N = {n}");
            let joint = cfg.fiducials.sic(d)?;
            let qubit = cfg.fiducials.sic(2)?;
            let product = product_pom(&vec![qubit; k as usize])?;
            Some([
                cfg.mixed(&joint, n, 7, k as u64)?,
                cfg.pure(&joint, n, 8, k as u64)?,
                cfg.mixed(&product, n, 9, k as u64)?,
                cfg.pure(&product, n, 10, k as u64)?,
            ])
        } else {
            None
        };
        let sim = |i: usize| sims.as_ref().map(|s| s[i].scaled_mean_trace_distance);
        let ratio = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a / b);
        t.push(vec![
            Cell::Int(k as u64),
            Cell::Int(d as u64),
            Cell::Int(n),
            joint_theory.into(),
            sim(0).into(),
            sim(1).into(),
            product_theory.into(),
            sim(2).into(),
            sim(3).into(),
            (product_theory / joint_theory).into(),
            ratio(sim(2), sim(0)).into(),
            ratio(sim(3), sim(1)).into(),
            ratio_pure.into(),
            multipartite_ratio_approx(2, k).sqrt().into(),
        ]);
    }
    Ok(t)
}
