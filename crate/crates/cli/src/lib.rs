//! Command-line front end for `rieopt`: primitive benchmarks, PCA on the
//! Grassmann manifold, and Fréchet means. All outputs are CSV.

pub mod bench;
pub mod error;
pub mod frechet;
pub mod io;
pub mod pca;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rieopt::geometry::GeometryKind;
use rieopt::privacy::PrivacyBudget;

use crate::bench::{default_dims, run_bench, write_records, DimSpec, Op};
use crate::error::{CliError, CliResult};
use crate::frechet::{flatten, run_frechet, FrechetOptions, Mechanism};
use crate::pca::{run_pca, write_outputs, DataSource, PcaOptions};

#[derive(Debug, Parser)]
#[command(name = "rieopt", version, about = "Riemannian optimization benchmarks and experiments")]
pub struct Cli {
    /// Seed for every random choice; falls back to RIEOPT_SEED, then 0.
    #[arg(long, global = true, env = "RIEOPT_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time exp, log, dist and parallel transport over a dimension grid.
    Bench(BenchArgs),
    /// Principal subspace by Riemannian gradient descent on the Grassmann manifold.
    Pca(PcaArgs),
    /// Fréchet mean of the points in a CSV file.
    Frechet(FrechetArgs),
}

fn parse_geometry(s: &str) -> Result<GeometryKind, String> {
    GeometryKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = GeometryKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("unknown geometry {s:?} (expected one of {})", names.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse_geometry)]
    pub geometry: GeometryKind,
    /// Comma list: `d` for vector geometries, `m:r` for grassmann, `m` for spd.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "exp,log,dist,pt")]
    pub ops: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    /// Header-free CSV, one sample per row.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// `n:d:decay`: variances `top·decay^k` along random orthogonal directions.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Largest variance of synthetic data.
    #[arg(long, default_value_t = 200.0)]
    pub top_variance: f64,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, default_value_t = 3e-3)]
    pub lr: f64,
    /// Defaults to 400, or 200 with --private.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub private: bool,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub clip: f64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FrechetArgs {
    #[arg(long, value_parser = parse_geometry)]
    pub geometry: GeometryKind,
    /// Header-free CSV, one point per row; matrices flattened row-major.
    #[arg(long)]
    pub input: PathBuf,
    /// Columns of each grassmann point.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    /// none, laplace or log-euclidean.
    #[arg(long, default_value = "none")]
    pub private: String,
    #[arg(long, default_value_t = 1.0)]
    pub sensitivity: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bench(a) => bench_cmd(a, cli.seed),
        Command::Pca(a) => pca_cmd(a, cli.seed),
        Command::Frechet(a) => frechet_cmd(a, cli.seed),
    }
}

fn bench_cmd(a: BenchArgs, seed: u64) -> CliResult<()> {
    let dims = if a.dims.is_empty() {
        default_dims(a.geometry)
    } else {
        a.dims
            .iter()
            .map(|s| DimSpec::parse(a.geometry, s))
            .collect::<CliResult<Vec<_>>>()?
    };
    let ops = a.ops.iter().map(|s| s.parse()).collect::<CliResult<Vec<Op>>>()?;
    let records = run_bench(a.geometry, &dims, &ops, a.repeats, seed)?;
    write_records(io::sink(a.output.as_deref())?, &records)
}

fn pca_cmd(a: PcaArgs, seed: u64) -> CliResult<()> {
    let source = match (&a.input, &a.synthetic) {
        (Some(p), None) => DataSource::File(p.clone()),
        (None, Some(s)) => DataSource::parse_synthetic(s)?,
        _ => return Err(CliError::usage("give exactly one of --input, --synthetic")),
    };
    let private = if a.private {
        Some(PrivacyBudget::new(a.eps, a.delta)?)
    } else {
        None
    };
    let opts = PcaOptions {
        source,
        top_variance: a.top_variance,
        rank: a.rank,
        lr: a.lr,
        epochs: a.epochs.unwrap_or(if a.private { 200 } else { 400 }),
        private,
        clip: a.clip,
        seed,
    };
    let run = run_pca(&opts)?;
    write_outputs(&a.output_dir, &run)?;
    let last = run.result.trace.last().map_or(f64::NAN, |s| s.loss);
    println!("seed {seed}");
    println!("initial_loss {}", io::fmt_f64(run.initial_loss));
    println!("final_loss {}", io::fmt_f64(last));
    if let Some(s) = run.sigma_mult {
        println!("sigma_mult {}", io::fmt_f64(s));
    }
    Ok(())
}

fn frechet_cmd(a: FrechetArgs, seed: u64) -> CliResult<()> {
    let rows = io::read_matrix(&a.input)?;
    let opts = FrechetOptions {
        geometry: a.geometry,
        rank: a.rank,
        mechanism: a.private.parse::<Mechanism>()?,
        sensitivity: a.sensitivity,
        eps: a.eps,
        delta: a.delta,
        seed,
        step: a.step,
        iters: a.iters,
    };
    let mean = run_frechet(&opts, &rows)?;
    let flat = flatten(mean.value());
    let row = nalgebra::DMatrix::from_row_slice(1, flat.len(), &flat);
    io::write_matrix(io::sink(a.output.as_deref())?, &row)
}
