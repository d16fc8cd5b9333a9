//! Subspace estimation on the Grassmann manifold, optionally differentially private.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rieopt::geometry::Grassmann;
use rieopt::optim::{dp_rsgd, fit, rsgd, FitConfig, FitResult, GradientOracle, Problem};
use rieopt::pca::{rows_as_samples, synthetic, PcaCost};
use rieopt::privacy::{calibrate_dprgd, PrivacyBudget};
use rieopt::{Manifold, ManifoldPoint};

use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, read_matrix, write_matrix};

pub const TRACE_HEADER: [&str; 4] = ["step", "wall_seconds", "loss", "variant"];

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic { n: usize, d: usize, decay: f64 },
}

impl DataSource {
    /// Parses `n:d:decay`.
    pub fn parse_synthetic(s: &str) -> CliResult<DataSource> {
        let bad = || CliError::usage(format!("--synthetic expects n:d:decay, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [n, d, decay] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(DataSource::Synthetic {
            n: n.parse().map_err(|_| bad())?,
            d: d.parse().map_err(|_| bad())?,
            decay: decay.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PcaOptions {
    pub source: DataSource,
    pub top_variance: f64,
    pub rank: usize,
    pub lr: f64,
    pub epochs: usize,
    pub private: Option<PrivacyBudget>,
    pub clip: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PcaRun {
    pub result: FitResult,
    pub initial_loss: f64,
    /// Noise multiplier relative to the clipped-mean sensitivity, for private runs.
    pub sigma_mult: Option<f64>,
}

fn load(opts: &PcaOptions, rng: &mut ChaCha8Rng) -> CliResult<DMatrix<f64>> {
    match &opts.source {
        DataSource::File(p) => read_matrix(p),
        DataSource::Synthetic { n, d, decay } => {
            Ok(synthetic(*n, *d, *decay, opts.top_variance, rng)?.data)
        }
    }
}

/// Data and the initial point both come from one generator seeded with `seed`,
/// data first.
pub fn run_pca(opts: &PcaOptions) -> CliResult<PcaRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let data = load(opts, &mut rng)?;
    let (n, d) = data.shape();
    if opts.rank == 0 || opts.rank >= d {
        return Err(CliError::usage(format!("--rank must be in [1, {d}), got {}", opts.rank)));
    }
    if opts.epochs == 0 {
        return Err(CliError::usage("--epochs must be >= 1"));
    }
    let manifold: Arc<dyn Manifold> = Arc::new(Grassmann::new(d, opts.rank)?);
    let problem = Problem::new(PcaCost, rows_as_samples(&data))?;
    let start = ManifoldPoint::random(manifold, &mut rng);
    let initial_loss = problem.full_loss(&start)?;
    let config = FitConfig::full_batch(opts.epochs);
    let (result, sigma_mult) = match &opts.private {
        None => (fit(&problem, start, &rsgd(opts.lr), &config)?, None),
        Some(budget) => {
            let sigma_mult = calibrate_dprgd(budget, opts.clip, n, opts.epochs as u64)?;
            // replace-one sensitivity of the clipped sum is 2·clip
            let opt = dp_rsgd(opts.lr, 2.0 * sigma_mult, opts.clip, opts.seed)?;
            (fit(&problem, start, &opt, &config)?, Some(sigma_mult))
        }
    };
    Ok(PcaRun {
        result,
        initial_loss,
        sigma_mult,
    })
}

pub fn write_outputs(dir: &Path, run: &PcaRun) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    let variant = if run.sigma_mult.is_some() { "private" } else { "nonprivate" };
    let mut w = csv::Writer::from_path(dir.join("trace.csv"))?;
    w.write_record(TRACE_HEADER)?;
    for s in &run.result.trace {
        w.write_record([
            s.step.to_string(),
            fmt_f64(s.elapsed_seconds),
            fmt_f64(s.loss),
            variant.to_string(),
        ])?;
    }
    w.flush()?;
    let file = std::fs::File::create(dir.join("subspace.csv"))?;
    write_matrix(file, run.result.params.value())
}
