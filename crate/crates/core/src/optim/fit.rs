//! Training loop: one init, then `epochs` update/apply cycles.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GradientInput, GradientOracle, GradientTransformation, Gradients, StepContext};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;
use crate::ops::apply_updates;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMode {
    Full,
    /// A fresh sample of this many distinct indices per step.
    MiniBatch(usize),
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch: BatchMode,
    /// Seeds minibatch sampling only; optimizer noise carries its own seed.
    pub seed: u64,
    pub record_iterates: bool,
}

impl FitConfig {
    pub fn full_batch(epochs: usize) -> Self {
        FitConfig {
            epochs,
            batch: BatchMode::Full,
            seed: 0,
            record_iterates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    /// Number of updates applied so far, starting at 1.
    pub step: usize,
    /// Full-data loss after the update.
    pub loss: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ManifoldPoint,
    pub trace: Vec<TraceStep>,
    /// Iterates after each step when `record_iterates` is set.
    pub iterates: Vec<ManifoldPoint>,
}

pub fn fit<T: GradientTransformation>(
    oracle: &dyn GradientOracle,
    params0: ManifoldPoint,
    optimizer: &T,
    config: &FitConfig,
) -> Result<FitResult> {
    if config.epochs == 0 {
        return Err(Error::invalid("epochs must be >= 1"));
    }
    let n = oracle.num_examples();
    let all: Vec<usize> = (0..n).collect();
    if let BatchMode::MiniBatch(b) = config.batch {
        if b == 0 || b > n {
            return Err(Error::invalid(format!("batch size {b} not in [1, {n}]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = params0;
    let mut state = optimizer.init(&params)?;
    let mut trace = Vec::with_capacity(config.epochs);
    let mut iterates = Vec::new();
    let start = Instant::now();

    for step in 0..config.epochs {
        let drawn;
        let batch: &[usize] = match config.batch {
            BatchMode::Full => &all,
            BatchMode::MiniBatch(b) => {
                drawn = sample(&mut rng, n, b).into_vec();
                &drawn
            }
        };
        let grads = match optimizer.input() {
            GradientInput::None => Gradients::None,
            GradientInput::Mean => Gradients::Mean(oracle.batch_grad(&params, batch)?),
            GradientInput::PerExample => Gradients::PerExample(oracle.example_grads(&params, batch)?),
        };
        let ctx = StepContext { oracle, batch };
        let (out, next) = optimizer.update(grads, state, &params, ctx)?;
        state = next;
        let update = out.into_mean("fit")?;
        params = apply_updates(&params, &update)?;
        let loss = oracle.full_loss(&params)?;
        if !loss.is_finite() {
            return Err(Error::NumericFailure { op: "fit" });
        }
        trace.push(TraceStep {
            step: step + 1,
            loss,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        if config.record_iterates {
            iterates.push(params.clone());
        }
    }
    Ok(FitResult {
        params,
        trace,
        iterates,
    })
}
