//! Command implementations behind the `signet` binary.
//!
//! Each command validates all of its inputs before touching the output
//! directory, and writes only inside it.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    convergence_summary, lyapunov_series, recover_topology, ConvergenceSummary, MetricsSeries,
    RecoveredTopology,
};
use crate::config::{load_graph_file, GraphFile, RunConfig};
use crate::error::{Error, Result};
use crate::excitation::{delta_pe_check, DeltaPeReport, EdgeExcitation, GramForm};
use crate::graph::{
    laplacian_direct, random_connected_graph, spectral_report, GraphGenParams, IncidenceMatrix,
    RAYLEIGH_SLACK,
};
use crate::protocol::{required_gain, GainRule};
use crate::sim::{push_num, simulate, GainCheck, SimConfig, Trajectory};

pub const DEFAULT_RECOVERY_THRESHOLD: f64 = 0.1;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const FIG_ESTIMATION_ERROR: &str = "fig2a_estimation_error.csv";
pub const FIG_WEIGHTS: &str = "fig2b_estimated_weights.csv";
pub const FIG_SYNC: &str = "fig2c_sync_error.csv";
pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of a finished run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    /// Fully resolved configuration (graph inlined, seeds explicit).
    pub config: RunConfig,
    /// Output paths relative to the run directory.
    pub outputs: Vec<String>,
    pub duration_s: f64,
}

/// Scalar results written to `metrics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub gain_check: GainCheck,
    pub lambda_min: f64,
    pub summary: ConvergenceSummary,
    pub tail_fraction: f64,
    pub max_identity_residual: f64,
    pub topology: RecoveredTopology,
    pub final_w_hat: Vec<f64>,
}

struct RunOutput {
    files: Vec<(&'static str, Vec<u8>)>,
    manifest: RunManifest,
}

fn series_csv(header: &str, times: &[f64], cols: &[&[f64]]) -> Vec<u8> {
    let mut s = String::with_capacity(times.len() * 24 * (cols.len() + 1));
    s.push_str(header);
    s.push('\n');
    for (k, &t) in times.iter().enumerate() {
        push_num(&mut s, t);
        for c in cols {
            s.push(',');
            push_num(&mut s, c[k]);
        }
        s.push('\n');
    }
    s.into_bytes()
}

fn weight_figure(traj: &Trajectory, cfg: &SimConfig) -> Result<Vec<u8>> {
    let idx = crate::graph::EdgeIndexing::new(cfg.plant.n_nodes())?;
    let mut header = String::from("t");
    let mut cols = Vec::new();
    for e in cfg.plant.graph().edges() {
        header.push_str(&format!(",w_{}_{}", e.i + 1, e.j + 1));
        cols.push(traj.w_hat.column(idx.slot(e.i, e.j)?).to_vec());
    }
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    Ok(series_csv(&header, &traj.times, &refs))
}

fn execute(config: &RunConfig, base_dir: &Path) -> Result<RunOutput> {
    let started = Instant::now();
    let cfg = config.to_sim_config(base_dir)?;
    let resolved = config.resolved(base_dir)?;
    let snapshot = resolved.to_toml()?;
    let gain_check = cfg.gain_check()?;

    let traj = simulate(&cfg)?;
    let plant = &cfg.plant;
    let metrics: MetricsSeries =
        lyapunov_series(&traj, plant.weights(), &cfg.gains, plant.laplacian())?;
    let summary = convergence_summary(&metrics, DEFAULT_TAIL_FRACTION)?;
    let w_final = traj.final_w_hat().to_owned();
    let topology = recover_topology(&w_final, DEFAULT_RECOVERY_THRESHOLD, plant.weights())?;
    let run_metrics = RunMetrics {
        gain_check,
        lambda_min: spectral_report(plant.laplacian())?.lambda_min,
        summary,
        tail_fraction: DEFAULT_TAIL_FRACTION,
        max_identity_residual: metrics.max_identity_residual(),
        topology,
        final_w_hat: w_final.to_vec(),
    };

    let mut traj_csv = Vec::new();
    traj.write_csv(&mut traj_csv)?;
    let mut metrics_csv = Vec::new();
    metrics.write_csv(&mut metrics_csv)?;
    let files = vec![
        (TRAJECTORY_FILE, traj_csv),
        (METRICS_JSON, to_json(&run_metrics)?.into_bytes()),
        (METRICS_CSV, metrics_csv),
        (
            FIG_ESTIMATION_ERROR,
            series_csv("t,est_err_norm", &metrics.times, &[&metrics.est_err_norm]),
        ),
        (FIG_WEIGHTS, weight_figure(&traj, &cfg)?),
        (
            FIG_SYNC,
            series_csv("t,sync_err", &metrics.times, &[&metrics.sync_err]),
        ),
        (RESOLVED_CONFIG, snapshot.into_bytes()),
    ];
    let mut outputs: Vec<String> = files.iter().map(|(n, _)| n.to_string()).collect();
    outputs.push(MANIFEST_FILE.to_string());
    Ok(RunOutput {
        files,
        manifest: RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: resolved,
            outputs,
            duration_s: started.elapsed().as_secs_f64(),
        },
    })
}

fn persist(out: RunOutput, dir: &Path) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in &out.files {
        fs::write(dir.join(name), bytes)?;
    }
    fs::write(dir.join(MANIFEST_FILE), to_json(&out.manifest)?)?;
    Ok(out.manifest)
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn base_dir_of(path: &Path) -> PathBuf {
    path.parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs a config file and writes its artifacts into `out_dir`.
pub fn cmd_simulate(config_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let cfg = RunConfig::load(config_path)?;
    run_config(&cfg, &base_dir_of(config_path), out_dir)
}

/// Runs an in-memory config. Nothing is written unless the run succeeds.
pub fn run_config(cfg: &RunConfig, base_dir: &Path, out_dir: &Path) -> Result<RunManifest> {
    let out = execute(cfg, base_dir)?;
    persist(out, out_dir)
}

/// Runs `runs` copies of a config with seeds `seed, seed + 1, …` in parallel;
/// run `s` writes to `out_dir/seed_<s>`.
pub fn cmd_simulate_sweep(
    config_path: &Path,
    out_dir: &Path,
    runs: usize,
) -> Result<Vec<RunManifest>> {
    if runs == 0 {
        return Err(Error::Validation("sweep needs at least one run".into()));
    }
    let base = RunConfig::load(config_path)?;
    let base_dir = base_dir_of(config_path);
    base.to_sim_config(&base_dir)?;
    let configs: Vec<RunConfig> = (0..runs as u64)
        .map(|k| {
            let mut c = base.clone();
            c.sim.seed = base.sim.seed + k;
            c
        })
        .collect();
    let results: Vec<Result<RunOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(|| execute(c, &base_dir)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let outputs = results.into_iter().collect::<Result<Vec<_>>>()?;
    outputs
        .into_iter()
        .map(|o| {
            let dir = out_dir.join(format!("seed_{}", o.manifest.config.sim.seed));
            persist(o, &dir)
        })
        .collect()
}

/// Runs the built-in twelve-node benchmark.
pub fn cmd_reproduce(out_dir: &Path, seed: u64) -> Result<RunManifest> {
    run_config(&RunConfig::reference(seed), Path::new("."), out_dir)
}

/// Reads a trajectory CSV and runs the δ-qualified excitation check with
/// `B(t) = Ē diag(Ēᵀ x̂(t))` and `x1 = x − x̂`.
pub fn cmd_check_pe(
    csv_path: &Path,
    delta: f64,
    window: f64,
    stride: f64,
    form: GramForm,
) -> Result<DeltaPeReport> {
    let file = fs::File::open(csv_path)?;
    let traj = Trajectory::read_csv(BufReader::new(file))?;
    check_pe_on(&traj, delta, window, stride, form)
}

pub fn check_pe_on(
    traj: &Trajectory,
    delta: f64,
    window: f64,
    stride: f64,
    form: GramForm,
) -> Result<DeltaPeReport> {
    if traj.len() < 2 {
        return Err(Error::Range("trajectory has fewer than two samples".into()));
    }
    let incidence = IncidenceMatrix::complete(traj.n_nodes())?;
    let signal = EdgeExcitation {
        t0: traj.times[0],
        dt: traj.sample_dt(),
        z_hat: traj.z_hat(&incidence),
        incidence: &incidence,
        form,
    };
    let x1 = &traj.x - &traj.x_hat;
    delta_pe_check(&signal, &x1, delta, window, stride)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Gain threshold `−λ_min` for the known-spectrum rule.
    pub c1_prop1: f64,
    /// Gain threshold `N` for the normalized-weights rule.
    pub c1_prop2: f64,
    pub normalized: bool,
    /// `λ_min ≥ −N`.
    pub bound_holds: bool,
}

pub fn cmd_eigen(graph_path: &Path) -> Result<EigenReport> {
    let g = load_graph_file(graph_path)?;
    let report = spectral_report(&laplacian_direct(&g))?;
    let n = g.n_nodes();
    Ok(EigenReport {
        c1_prop1: required_gain(GainRule::KnownSpectrum, Some(report.lambda_min), n)?,
        c1_prop2: required_gain(GainRule::NormalizedWeights, None, n)?,
        normalized: g.is_normalized(),
        bound_holds: report.lambda_min >= -(n as f64) - RAYLEIGH_SLACK,
        lambda_min: report.lambda_min,
        lambda_max: report.lambda_max,
        eigenvalues: report.eigenvalues,
    })
}

/// Seeded random connected signed graph, as graph-file TOML.
pub fn cmd_gen_graph(params: &GraphGenParams, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(params, &mut rng)?;
    Ok(GraphFile::from_graph(&g).to_toml())
}
