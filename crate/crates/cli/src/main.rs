//! `rhc`: seeded experiments for residue hyperdimensional computing.
//!
//! Settings come from an optional TOML file; flags override file values. Every run
//! writes its data files and a `manifest.json` into the output directory.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rhc::Execution;

use crate::config::Config;
use crate::run::{Fallible, Outputs};

#[derive(Parser, Debug)]
#[command(name = "rhc", version, about = "Residue hyperdimensional computing experiments")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "rhc-out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Resonator restarts after a failed attempt.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Empirical vs analytic similarity kernel.
    Kernel(KernelArgs),
    /// Decoding accuracy over increasing ranges and the resulting capacity.
    Capacity(CapacityArgs),
    /// Decoding accuracy under von Mises phase noise.
    Noise(NoiseArgs),
    /// Hexagonal kernel heatmap and state counts.
    Hex(HexArgs),
    /// Sub-integer decoding accuracy and bits per vector.
    Subint(SubintArgs),
    /// Subset-sum benchmark, or one instance with --instance.
    SubsetSum(SubsetArgs),
    /// Scene factorization in standard and residue modes.
    Scene(SceneArgs),
    /// Thermometer, float and scatter code kernels with shape fits.
    Baselines(BaselineArgs),
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Moduli, comma separated; more than one gives a residue system.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u64>>,
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    min_range: Option<u64>,
    #[arg(long)]
    max_range: Option<u64>,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    range: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct HexArgs {
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u64>>,
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct SubintArgs {
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    range: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct SubsetArgs {
    /// Set sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    items: Option<Vec<usize>>,
    #[arg(long = "D", value_delimiter = ',')]
    dim: Option<Vec<usize>>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    attempts: Option<usize>,
    /// JSON instance {items, target, seed}.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SceneArgs {
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long)]
    scenes: Option<usize>,
    /// JSON array of canonical-frame feature maps.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// Scatter-code dimension.
    #[arg(long = "D")]
    dim: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    max_delta: Option<u32>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Kernel(_) => "kernel",
            Self::Capacity(_) => "capacity",
            Self::Noise(_) => "noise",
            Self::Hex(_) => "hex",
            Self::Subint(_) => "subint",
            Self::SubsetSum(_) => "subset-sum",
            Self::Scene(_) => "scene",
            Self::Baselines(_) => "baselines",
        }
    }

    /// Apply flag overrides to the loaded configuration.
    fn apply(self, c: &mut Config) {
        match self {
            Self::Kernel(a) => {
                let s = &mut c.kernel;
                set(&mut s.moduli, a.m);
                set(&mut s.dim, a.dim);
                set(&mut s.start, a.start);
                set(&mut s.stop, a.stop);
                set(&mut s.step, a.step);
            }
            Self::Capacity(a) => {
                let s = &mut c.capacity;
                set(&mut s.dim, a.dim);
                set(&mut s.k, a.k);
                set(&mut s.trials, a.trials);
                set(&mut s.min_range, a.min_range);
                set(&mut s.max_range, a.max_range);
            }
            Self::Noise(a) => {
                let s = &mut c.noise;
                set(&mut s.dim, a.dim);
                set(&mut s.k, a.k);
                set(&mut s.range, a.range);
                set(&mut s.kappas, a.kappa);
                set(&mut s.trials, a.trials);
            }
            Self::Hex(a) => {
                let s = &mut c.hex;
                set(&mut s.moduli, a.m);
                set(&mut s.dim, a.dim);
                set(&mut s.extent, a.extent);
                set(&mut s.steps, a.steps);
            }
            Self::Subint(a) => {
                let s = &mut c.subint;
                set(&mut s.dim, a.dim);
                set(&mut s.k, a.k);
                set(&mut s.range, a.range);
                set(&mut s.partitions, a.r);
                set(&mut s.kappas, a.kappa);
                set(&mut s.trials, a.trials);
            }
            Self::SubsetSum(a) => {
                let s = &mut c.subset_sum;
                set(&mut s.sizes, a.items);
                set(&mut s.dims, a.dim);
                set(&mut s.m, a.m);
                set(&mut s.trials, a.trials);
                set(&mut s.attempts, a.attempts);
                if a.instance.is_some() {
                    s.instance = a.instance;
                }
            }
            Self::Scene(a) => {
                let s = &mut c.scene;
                set(&mut s.dim, a.dim);
                set(&mut s.scenes, a.scenes);
                if a.corpus.is_some() {
                    s.corpus = a.corpus;
                }
            }
            Self::Baselines(a) => {
                let s = &mut c.baselines;
                set(&mut s.scatter_dim, a.dim);
                set(&mut s.scatter_p, a.p);
                set(&mut s.seeds, a.seeds);
                set(&mut s.max_delta, a.max_delta);
            }
        }
    }
}

fn execute(cli: Cli) -> Fallible<()> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    set(&mut config.seed, cli.seed);
    set(&mut config.resonator.max_restarts, cli.restarts);
    config.resonator.validate().map_err(|e| e.to_string())?;
    if let Some(n) = cli.threads {
        rhc::par::set_num_threads(n).map_err(|e| e.to_string())?;
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let name = cli.command.name();
    cli.command.apply(&mut config);

    let mut out = Outputs::new(&cli.out)?;
    let (settings, inputs) = match name {
        "kernel" => (run::kernel(&config, &mut out, exec)?, Vec::new()),
        "capacity" => (run::capacity(&config, &mut out, exec)?, Vec::new()),
        "noise" => (run::noise(&config, &mut out, exec)?, Vec::new()),
        "hex" => (run::hex_cmd(&config, &mut out, exec)?, Vec::new()),
        "subint" => (run::subint(&config, &mut out, exec)?, Vec::new()),
        "subset-sum" => run::subset_sum(&config, &mut out, exec)?,
        "scene" => run::scene(&config, &mut out, exec)?,
        "baselines" => (run::baselines(&config, &mut out, exec)?, Vec::new()),
        other => unreachable!("unhandled command {other}"),
    };
    out.finish(name, &config, settings, &inputs)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
