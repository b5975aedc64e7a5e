//! Argument parsing, command dispatch and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tomolab_core::designs::is_weighted_t_design;
use tomolab_core::montecarlo::{default_copies, run_experiment, ExperimentConfig, TrueStateSpec};
use tomolab_core::operators::{BlochVector, DensityOperator, Ket, C64};
use tomolab_core::povm::{
    fiducial_deviation, fiducial_residual, fiducial_search, save_fiducial, validate_pom, FiducialFile,
    FiducialSearchOptions, POM_TOL,
};
use tomolab_core::theory::{
    anisotropy_functionals, check_purity, multipartite_ratio_approx, noisy_predictions, product_predictions,
    product_vs_joint_mse_ratio, qubit_mean_error, qubit_mean_trace_distance, qubit_mse_matrix, tight_ic_predictions,
    EQ_CHI_HS, EQ_NOISY_HS, EQ_NOISY_MSE, EQ_NOISY_TRACE, EQ_PRODUCT_MSE, EQ_PRODUCT_RATIO, EQ_PRODUCT_TRACE,
    EQ_PRODUCT_VAR_BIPARTITE, EQ_PRODUCT_VAR_MIXED, EQ_QUBIT_MEAN_ERROR,
};
use tomolab_core::tomography::{frame_superoperator, reconstruction_for};

use crate::error::{CliError, CliResult};
use crate::fiducials::FiducialSource;
use crate::output::{SCHEMA_VERSION, TOOL_VERSION};
use crate::pom::{PomKind, PomSpec};
use crate::reproduce::{reproduce, ReproduceConfig, ReproduceOverrides, Target};

#[derive(Debug, Parser)]
#[command(name = "tomolab", version, about = "Linear state tomography with SIC and related POMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for or verify Heisenberg-Weyl fiducial kets.
    #[command(subcommand)]
    Fiducial(FiducialCmd),
    /// Check a POM: completeness, positivity, design order, informational completeness.
    Validate(ValidateArgs),
    /// Evaluate closed-form predictions (JSON).
    #[command(subcommand)]
    Theory(TheoryCmd),
    /// Monte Carlo tomography at one configuration (JSON).
    Simulate(SimulateArgs),
    /// Regenerate a figure or table as CSV with a run manifest.
    Reproduce(ReproduceArgs),
    /// Re-run a manifest and rewrite its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct FiducialArgs {
    /// Fiducial JSON file, used when its dimension matches.
    #[arg(long)]
    pub fiducial: Option<PathBuf>,
    /// Directory of `d{d}.json` fiducial files.
    #[arg(long)]
    pub fiducials: Option<PathBuf>,
}

impl FiducialArgs {
    fn source(&self) -> FiducialSource {
        FiducialSource { file: self.fiducial.clone(), dir: self.fiducials.clone() }
    }
}

#[derive(Debug, Subcommand)]
pub enum FiducialCmd {
    /// Numerical search; writes `{"d", "amplitudes"}` JSON.
    Find {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 5000)]
        iterations: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Largest deviation of `|<psi|X^k1 Z^k2|psi>|` from `1/sqrt(d+1)`.
    Verify {
        /// Fiducial file to check; otherwise the fiducial resolved for `--d`.
        #[arg(long)]
        fiducial: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        fiducials: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PomArgs {
    #[arg(long, value_enum, default_value = "sic")]
    pub pom: PomKind,
    #[arg(long)]
    pub d: Option<usize>,
    /// Subsystem dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub fiducials: FiducialArgs,
}

impl PomArgs {
    fn spec(&self) -> CliResult<PomSpec> {
        PomSpec::resolve(self.pom, self.d, self.dims.clone(), self.alpha)
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub pom: PomArgs,
    #[arg(long, default_value_t = POM_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryCmd {
    /// Tight-IC MSE, mean trace and HS distances.
    Mse {
        #[arg(long)]
        d: usize,
        /// tr(rho^2); defaults to the completely mixed state.
        #[arg(long)]
        purity: Option<f64>,
        /// Copies; 1 gives scaled values.
        #[arg(long, default_value_t = 1.0)]
        n: f64,
    },
    /// SIC POM mixed with white noise of strength alpha.
    Noisy {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        purity: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
    },
    /// Product SIC POM on subsystems of the given dimensions.
    Product {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        purity: Option<f64>,
        /// Reduced purities of the two parties (bipartite variance).
        #[arg(long, value_delimiter = ',')]
        reduced: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
    },
    /// Product-to-joint MSE ratio.
    Ratio {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        purity: Option<f64>,
    },
    /// Exact qubit tetrahedron error for a Bloch vector or an extreme state `z a_1`.
    Qubit {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "bloch")]
        z: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bloch: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
    },
    /// Unitary average of tr(C^2) and its bounds.
    Anisotropy {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        purity: f64,
        /// tr(rho^3).
        #[arg(long)]
        cubic: f64,
        /// Third frame potential; defaults to the SIC value.
        #[arg(long)]
        phi3: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Mixed,
    Haar,
    Bloch,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pom: PomArgs,
    #[arg(long, value_enum, default_value = "mixed")]
    pub state: StateKind,
    /// Random pure states for `--state haar`.
    #[arg(long, default_value_t = 100)]
    pub states: usize,
    /// Bloch vector for `--state bloch` (qubit POMs).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bloch: Option<Vec<f64>>,
    /// Copies per experiment; default 1000 + 20 d^2.
    #[arg(long, short = 'N')]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write JSON here (with a manifest) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dmax: Option<usize>,
    #[arg(long)]
    pub kmax_theory: Option<u32>,
    #[arg(long)]
    pub kmax_sim: Option<u32>,
    #[arg(long, short = 'N')]
    pub n: Option<u64>,
    /// Repetitions for the completely mixed state.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Number of random pure states.
    #[arg(long)]
    pub states: Option<usize>,
    /// Repetitions per random state.
    #[arg(long)]
    pub state_trials: Option<usize>,
    /// Purity grid points (fig2).
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub fiducials: FiducialArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output directory; defaults to the recorded paths.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare the regenerated files with the recorded ones; exit 3 on mismatch.
    #[arg(long)]
    pub check: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateChoice {
    Mixed,
    Haar { count: usize },
    Bloch { vector: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub pom: PomSpec,
    pub state: StateChoice,
    pub n: u64,
    pub trials: usize,
    pub seed: u64,
    pub fiducials: FiducialSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiducialFindConfig {
    pub d: usize,
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
}

/// Resolved work description; replaying it regenerates the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Reproduce(ReproduceConfig),
    Simulate(SimulateConfig),
    Theory { query: TheoryCmd },
    FiducialFind(FiducialFindConfig),
}

impl Job {
    fn master_seed(&self) -> Option<u64> {
        match self {
            Job::Reproduce(c) => Some(c.seed),
            Job::Simulate(c) => Some(c.seed),
            Job::FiducialFind(c) => Some(c.seed),
            Job::Theory { .. } => None,
        }
    }

    /// Output file name used when writing into a directory.
    fn file_name(&self) -> String {
        match self {
            Job::Reproduce(c) => format!("{}.csv", c.target.name()),
            Job::Simulate(_) => "simulate.json".into(),
            Job::Theory { .. } => "theory.json".into(),
            Job::FiducialFind(c) => format!("d{}.json", c.d),
        }
    }

    /// Runs the job and writes its single data file to `path`.
    fn execute(&self, path: &Path) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        match self {
            Job::Reproduce(cfg) => reproduce(cfg)?.write_csv(path),
            Job::Simulate(cfg) => write_json(path, &simulate(cfg)?),
            Job::Theory { query } => write_json(path, &theory(query)?),
            Job::FiducialFind(cfg) => {
                let ket = find_fiducial(cfg)?;
                Ok(save_fiducial(path, &ket)?)
            }
        }
    }
}

/// Sibling record of every data file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command_line: Vec<String>,
    pub master_seed: Option<u64>,
    pub config: Job,
    pub outputs: Vec<PathBuf>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::from(e).context(format!("reading {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: not a run manifest: {e}", path.display())))
    }
}

pub fn manifest_path(data: &Path) -> PathBuf {
    data.with_extension("manifest.json")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Executes `job` into `path` and writes the manifest next to it.
pub fn run_with_manifest(job: &Job, path: &Path, command_line: Vec<String>) -> CliResult<PathBuf> {
    let start = Instant::now();
    job.execute(path)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        command_line,
        master_seed: job.master_seed(),
        config: job.clone(),
        outputs: vec![path.to_path_buf()],
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let mpath = manifest_path(path);
    write_json(&mpath, &manifest)?;
    Ok(mpath)
}

fn print_json(value: &Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(value)?) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn run(cli: Cli, command_line: Vec<String>) -> CliResult<()> {
    match cli.command {
        Command::Fiducial(FiducialCmd::Find { d, seed, restarts, iterations, out }) => {
            let job = Job::FiducialFind(FiducialFindConfig { d, seed, restarts, iterations });
            run_with_manifest(&job, &out, command_line)?;
            let file: FiducialFile = serde_json::from_str(&fs::read_to_string(&out)?)?;
            let ket = file.to_ket(f64::INFINITY)?;
            print_json(&json!({
                "d": d,
                "path": out,
                "max_deviation": fiducial_deviation(&ket).0,
                "residual": fiducial_residual(&ket),
            }))
        }
        Command::Fiducial(FiducialCmd::Verify { fiducial, d, fiducials, tol }) => {
            verify_fiducial(fiducial, d, fiducials, tol)
        }
        Command::Validate(args) => validate(&args),
        Command::Theory(query) => print_json(&theory(&query)?),
        Command::Simulate(args) => {
            let cfg = simulate_config(&args)?;
            match &args.out {
                Some(out) => {
                    run_with_manifest(&Job::Simulate(cfg), out, command_line)?;
                    Ok(())
                }
                None => print_json(&simulate(&cfg)?),
            }
        }
        Command::Reproduce(args) => {
            let cfg = ReproduceConfig::resolve(
                args.target,
                ReproduceOverrides {
                    seed: args.seed,
                    dmax: args.dmax,
                    kmax_theory: args.kmax_theory,
                    kmax_sim: args.kmax_sim,
                    n: args.n,
                    trials: args.trials,
                    states: args.states,
                    state_trials: args.state_trials,
                    points: args.points,
                    fiducials: args.fiducials.source(),
                },
            )?;
            let job = Job::Reproduce(cfg);
            let path = args.out.join(job.file_name());
            let mpath = run_with_manifest(&job, &path, command_line)?;
            eprintln!("wrote {} and {}", path.display(), mpath.display());
            Ok(())
        }
        Command::Replay(args) => replay(&args, command_line),
    }
}

fn replay(args: &ReplayArgs, command_line: Vec<String>) -> CliResult<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    let original = manifest.outputs.first().ok_or_else(|| CliError::usage("manifest lists no outputs"))?;
    let target = match &args.out {
        Some(dir) => dir.join(
            original.file_name().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(manifest.config.file_name())),
        ),
        None => original.clone(),
    };
    let before = if args.check { Some(fs::read(original)?) } else { None };
    run_with_manifest(&manifest.config, &target, command_line)?;
    if let Some(before) = before {
        if fs::read(&target)? != before {
            return Err(CliError::construction(format!(
                "replay of {} differs from {}",
                args.manifest.display(),
                original.display()
            )));
        }
        eprintln!("replay matches {}", original.display());
    }
    Ok(())
}

fn find_fiducial(cfg: &FiducialFindConfig) -> CliResult<Ket> {
    let opts = FiducialSearchOptions { seed: cfg.seed, max_restarts: cfg.restarts, max_iterations: cfg.iterations };
    Ok(fiducial_search(cfg.d, &opts)?)
}

fn verify_fiducial(file: Option<PathBuf>, d: Option<usize>, dir: Option<PathBuf>, tol: f64) -> CliResult<()> {
    let ket = match (&file, d) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::from(e).context(format!("reading {}", path.display())))?;
            let raw: FiducialFile =
                serde_json::from_str(&text).map_err(|e| CliError::construction(format!("{}: {e}", path.display())))?;
            if raw.amplitudes.len() != raw.d {
                return Err(CliError::construction(format!(
                    "{}: d = {} but {} amplitudes",
                    path.display(),
                    raw.d,
                    raw.amplitudes.len()
                )));
            }
            Ket::normalized(raw.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect())?
        }
        (None, Some(d)) => FiducialSource { file: None, dir }.ket(d)?,
        (None, None) => return Err(CliError::usage("give --fiducial <path> or --d <dim>")),
    };
    let (deviation, k1, k2) = fiducial_deviation(&ket);
    let passed = deviation <= tol;
    print_json(&json!({
        "d": ket.dim(),
        "target": 1.0 / ((ket.dim() + 1) as f64).sqrt(),
        "max_deviation": deviation,
        "worst_k1": k1,
        "worst_k2": k2,
        "tolerance": tol,
        "passed": passed,
    }))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::construction(format!("not a fiducial: deviation {deviation:e} at ({k1},{k2}) exceeds {tol:e}")))
    }
}

fn validate(args: &ValidateArgs) -> CliResult<()> {
    let spec = args.pom.spec()?;
    let pom = spec.build(&args.pom.fiducials.source())?;
    let report = validate_pom(&pom, args.tol);
    let fso = frame_superoperator(&pom)?;
    let n0 = fso.traceless().nrows();
    let scale = fso.traceless().trace() / n0 as f64;
    let mut tight_dev = 0.0f64;
    for i in 0..n0 {
        for j in 0..n0 {
            let target = if i == j { scale } else { 0.0 };
            tight_dev = tight_dev.max((fso.traceless()[(i, j)] - target).abs());
        }
    }
    let ic = fso.is_informationally_complete();
    let residual = if ic { Some(reconstruction_for(&pom)?.reconstruction_residual(&pom)?) } else { None };
    let designs: Vec<_> = pom
        .source()
        .map(|set| (1..=3).map(|t| is_weighted_t_design(set, t, args.tol.max(1e-9))).collect())
        .unwrap_or_default();
    print_json(&json!({
        "pom": spec,
        "dim": pom.dim(),
        "validation": report,
        "informationally_complete": ic,
        "condition_number": fso.condition_number(),
        "traceless_frame_scale": scale,
        "tightness_deviation": tight_dev,
        "reconstruction_residual": residual,
        "designs": designs,
    }))?;
    if !report.passed {
        return Err(CliError::construction(format!("POM validation failed: {}", report.failures.join("; "))));
    }
    if !ic {
        return Err(CliError::construction("POM is not informationally complete"));
    }
    Ok(())
}

fn purity_or_mixed(d: usize, purity: Option<f64>) -> CliResult<f64> {
    let p = purity.unwrap_or(1.0 / d as f64);
    check_purity(d, p)?;
    Ok(p)
}

fn bloch_from(values: &[f64]) -> CliResult<BlochVector> {
    match values {
        [x, y, z] => Ok(BlochVector::new(*x, *y, *z)),
        _ => Err(CliError::usage("--bloch takes three comma-separated components")),
    }
}

pub fn theory(query: &TheoryCmd) -> CliResult<Value> {
    Ok(match query {
        TheoryCmd::Mse { d, purity, n } => {
            let p = purity_or_mixed(*d, *purity)?;
            let preds = tight_ic_predictions(*d, p, *n)?;
            json!({"d": d, "purity": p, "n": n, "mse": preds[0].value, "predictions": preds})
        }
        TheoryCmd::Noisy { d, alpha, purity, n } => {
            let p = purity_or_mixed(*d, *purity)?;
            let r = noisy_predictions(*d, *alpha, p, *n)?;
            json!({
                "d": d, "alpha": alpha, "purity": p, "n": n,
                "mse": r.mse, "mean_trace_distance": r.mean_trace_distance, "mean_hs_distance": r.mean_hs_distance,
                "equations": {"mse": EQ_NOISY_MSE, "mean_trace_distance": EQ_NOISY_TRACE, "mean_hs_distance": EQ_NOISY_HS},
            })
        }
        TheoryCmd::Product { dims, purity, reduced, n } => {
            let d: usize = dims.iter().product();
            let p = purity_or_mixed(d, *purity)?;
            let r = product_predictions(dims, p, reduced.as_deref(), *n)?;
            let var_eq = if reduced.is_some() { EQ_PRODUCT_VAR_BIPARTITE } else { EQ_PRODUCT_VAR_MIXED };
            json!({
                "dims": dims, "purity": p, "n": n, "predictions": r,
                "equations": {"mse": EQ_PRODUCT_MSE, "mean_trace_distance": EQ_PRODUCT_TRACE,
                              "mean_hs_distance": EQ_CHI_HS, "variance": var_eq, "ratio_vs_joint": EQ_PRODUCT_RATIO},
            })
        }
        TheoryCmd::Ratio { dims, purity } => {
            let d: usize = dims.iter().product();
            let p = purity_or_mixed(d, *purity)?;
            let ratio = product_vs_joint_mse_ratio(dims, p)?;
            let approx =
                (dims.iter().all(|&x| x == dims[0])).then(|| multipartite_ratio_approx(dims[0], dims.len() as u32));
            json!({
                "dims": dims, "purity": p, "mse_ratio": ratio, "trace_distance_ratio": ratio.sqrt(),
                "mse_ratio_equal_parties_approx": approx, "equation": EQ_PRODUCT_RATIO,
            })
        }
        TheoryCmd::Qubit { z, bloch, n } => {
            let s = match (z, bloch) {
                (Some(z), None) => {
                    if !(-1.0..=1.0).contains(z) {
                        return Err(CliError::usage("--z must lie in [-1, 1]"));
                    }
                    tomolab_core::povm::tetrahedron_vertices()[0].scaled(*z)
                }
                (None, Some(b)) => bloch_from(b)?,
                _ => return Err(CliError::usage("give exactly one of --z or --bloch")),
            };
            let (_, ellipsoid) = qubit_mse_matrix(&s, *n)?;
            json!({
                "bloch": s.0, "n": n, "variances": ellipsoid.sigma_sq,
                "mean_bloch_error": qubit_mean_error(&ellipsoid),
                "mean_trace_distance": qubit_mean_trace_distance(&ellipsoid),
                "equation": EQ_QUBIT_MEAN_ERROR,
            })
        }
        TheoryCmd::Anisotropy { d, purity, cubic, phi3 } => {
            let df = *d as f64;
            let phi3 = phi3.unwrap_or((df * df + 3.0 * df) / ((df + 1.0) * (df + 1.0)));
            let a = anisotropy_functionals(*d, *purity, *cubic, phi3)?;
            json!({"d": d, "purity": purity, "cubic": cubic, "phi3": phi3, "functionals": a,
                   "equation": "N^2 <tr C^2>_U from tr(rho^2), tr(rho^3) and the third frame potential"})
        }
    })
}

fn simulate_config(args: &SimulateArgs) -> CliResult<SimulateConfig> {
    let pom = args.pom.spec()?;
    let state = match args.state {
        StateKind::Mixed => StateChoice::Mixed,
        StateKind::Haar => {
            if args.states == 0 {
                return Err(CliError::usage("--states must be positive"));
            }
            StateChoice::Haar { count: args.states }
        }
        StateKind::Bloch => {
            if pom.dim != 2 {
                return Err(CliError::usage("--state bloch needs a qubit POM"));
            }
            let b =
                bloch_from(args.bloch.as_deref().ok_or_else(|| CliError::usage("--state bloch needs --bloch x,y,z"))?)?;
            StateChoice::Bloch { vector: b.0 }
        }
    };
    if args.state != StateKind::Bloch && args.bloch.is_some() {
        return Err(CliError::usage("--bloch only applies to --state bloch"));
    }
    if args.trials == 0 || args.n == Some(0) {
        return Err(CliError::usage("--n and --trials must be positive"));
    }
    Ok(SimulateConfig {
        n: args.n.unwrap_or_else(|| default_copies(pom.dim)),
        pom,
        state,
        trials: args.trials,
        seed: args.seed,
        fiducials: args.pom.fiducials.source(),
    })
}

pub fn simulate(cfg: &SimulateConfig) -> CliResult<Value> {
    let pom = cfg.pom.build(&cfg.fiducials)?;
    let recon = reconstruction_for(&pom)?;
    let d = pom.dim();
    let (spec, purity) = match &cfg.state {
        StateChoice::Mixed => (TrueStateSpec::CompletelyMixed, 1.0 / d as f64),
        StateChoice::Haar { count } => (TrueStateSpec::HaarPureEnsemble { count: *count }, 1.0),
        StateChoice::Bloch { vector } => {
            let rho = DensityOperator::from_bloch(&BlochVector(*vector))?;
            let p = rho.purity();
            (TrueStateSpec::Fixed(rho), p)
        }
    };
    let stats = run_experiment(
        &pom,
        &recon,
        &ExperimentConfig { state: spec, n: Some(cfg.n), trials: cfg.trials, master_seed: cfg.seed, threads: None },
    )?;
    crate::error::ensure_finite("scaled mean trace distance", stats.scaled_mean_trace_distance)?;
    let theory = match cfg.pom.kind {
        PomKind::Sic | PomKind::Tetra | PomKind::Octa => json!({"scaled": tight_ic_predictions(d, purity, 1.0)?}),
        PomKind::NoisySic => {
            let r = noisy_predictions(d, cfg.pom.alpha.unwrap_or(0.0), purity, 1.0)?;
            json!({"scaled": r, "equations": {"mse": EQ_NOISY_MSE, "mean_trace_distance": EQ_NOISY_TRACE,
                                              "mean_hs_distance": EQ_NOISY_HS}})
        }
        PomKind::ProductSic => {
            let r = product_predictions(cfg.pom.dims.as_deref().unwrap_or_default(), purity, None, 1.0)?;
            json!({"scaled": r, "equations": {"mse": EQ_PRODUCT_MSE, "mean_trace_distance": EQ_PRODUCT_TRACE,
                                              "mean_hs_distance": EQ_CHI_HS}})
        }
    };
    let exact_qubit = match (&cfg.state, cfg.pom.kind) {
        (StateChoice::Bloch { vector }, PomKind::Tetra) => {
            Some(qubit_mean_trace_distance(&qubit_mse_matrix(&BlochVector(*vector), 1.0)?.1))
        }
        (StateChoice::Mixed, PomKind::Tetra) => {
            Some(qubit_mean_trace_distance(&qubit_mse_matrix(&BlochVector::new(0.0, 0.0, 0.0), 1.0)?.1))
        }
        _ => None,
    };
    Ok(json!({
        "config": cfg,
        "purity": purity,
        "stats": stats,
        "theory": theory,
        "exact_qubit_scaled_mean_trace_distance": exact_qubit,
    }))
}
