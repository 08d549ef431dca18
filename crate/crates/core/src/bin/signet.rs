use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use signet_id::commands::{
    cmd_check_pe, cmd_eigen, cmd_gen_graph, cmd_reproduce, cmd_simulate, cmd_simulate_sweep,
};
use signet_id::excitation::GramForm;
use signet_id::graph::GraphGenParams;
use signet_id::{Error, Result};

/// Joint synchronization and signed-topology identification for networks
/// with antagonistic interactions.
///
/// Exit codes: 0 success, 1 validation error, 2 numeric or divergence error,
/// 3 I/O error.
#[derive(Parser)]
#[command(name = "signet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gram {
    /// N×N Gram of B Bᵀ
    State,
    /// M×M Gram of Bᵀ B (weight identifiability)
    Edge,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML config and write trajectory, metrics, figures and manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run this many seeds (seed, seed+1, ...) in parallel into out/seed_<s>.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Run the built-in twelve-node benchmark.
    Reproduce {
        #[arg(long)]
        out: PathBuf,
        /// Seed for edge magnitudes and initial state.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// δ-qualified excitation check on a trajectory CSV.
    CheckPe {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Window length T in seconds.
        #[arg(long, default_value_t = 2.0)]
        window: f64,
        /// Spacing of window starts in seconds.
        #[arg(long, default_value_t = 0.5)]
        stride: f64,
        #[arg(long, value_enum, default_value_t = Gram::State)]
        gram: Gram,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum of a graph file's Laplacian and the gain thresholds.
    Eigen {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Random connected signed graph as a graph file.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(long, default_value_t = 0.5)]
        negative_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow magnitudes above 1.
        #[arg(long)]
        unnormalized: bool,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))
}

fn emit(text: String, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            sweep: None,
        } => emit(json(&cmd_simulate(&config, &out)?)?, None),
        Command::Simulate {
            config,
            out,
            sweep: Some(n),
        } => emit(json(&cmd_simulate_sweep(&config, &out, n)?)?, None),
        Command::Reproduce { out, seed } => emit(json(&cmd_reproduce(&out, seed)?)?, None),
        Command::CheckPe {
            trajectory,
            delta,
            window,
            stride,
            gram,
            out,
        } => {
            let form = match gram {
                Gram::State => GramForm::Outer,
                Gram::Edge => GramForm::Inner,
            };
            let report = cmd_check_pe(&trajectory, delta, window, stride, form)?;
            emit(json(&report)? + "\n", out)
        }
        Command::Eigen { graph } => emit(json(&cmd_eigen(&graph)?)?, None),
        Command::GenGraph {
            n,
            density,
            negative_fraction,
            seed,
            unnormalized,
            out,
        } => {
            let params = GraphGenParams {
                n_nodes: n,
                density,
                negative_fraction,
                normalized: !unnormalized,
            };
            emit(cmd_gen_graph(&params, seed)?, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
