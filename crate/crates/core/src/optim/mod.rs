//! Riemannian optimizers as chains of gradient transformations.
//!
//! A transformation consumes gradients (per-example, averaged, or none) and
//! emits transformed gradients; the last link of a chain emits the update
//! tangent that [`crate::ops::apply_updates`] feeds to the exponential map.
//!
//! ```text
//! rsgd     = scale_by_lr
//! rsvrg    = variance_reduced  -> scale_by_lr
//! rsrg     = recursive         -> scale_by_lr
//! rasa     = scale_by_rasa     -> scale_by_lr
//! zo_rgd   = zeroth_order      -> scale_by_lr
//! dp_rsgd  = clip_per_example  -> noisy_mean -> scale_by_lr
//! ```

mod fit;
mod oracle;
mod rasa;
mod schedule;
mod transforms;
mod variance;
mod zeroth;

pub use fit::{fit, BatchMode, FitConfig, FitResult, TraceStep};
pub use oracle::{FrechetObjective, GradientOracle, Problem};
pub use rasa::{RasaVariant, ScaleByRasa};
pub use schedule::LearningRate;
pub use transforms::{ClipPerExample, MeanReduce, NoisyMean, ScaleByLearningRate};
pub use variance::{RecursiveGradient, VarianceReduced};
pub use zeroth::ZerothOrder;

use std::fmt;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldPoint, TangentVector};

/// Gradient information flowing through a chain.
#[derive(Debug, Clone)]
pub enum Gradients {
    /// The transformation evaluates the objective itself.
    None,
    Mean(TangentVector),
    PerExample(Vec<TangentVector>),
}

impl Gradients {
    pub fn into_mean(self, who: &str) -> Result<TangentVector> {
        match self {
            Gradients::Mean(g) => Ok(g),
            _ => Err(Error::invalid(format!("{who} expects an aggregated gradient"))),
        }
    }

    pub fn into_per_example(self, who: &str) -> Result<Vec<TangentVector>> {
        match self {
            Gradients::PerExample(gs) if !gs.is_empty() => Ok(gs),
            Gradients::PerExample(_) => Err(Error::invalid(format!("{who}: empty gradient list"))),
            _ => Err(Error::invalid(format!("{who} expects per-example gradients"))),
        }
    }
}

/// Which gradients the driver must compute before calling `update`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientInput {
    None,
    Mean,
    PerExample,
}

/// Objective access for transformations that need more than the current gradient.
#[derive(Clone, Copy)]
pub struct StepContext<'a> {
    pub oracle: &'a dyn GradientOracle,
    pub batch: &'a [usize],
}

/// An `init`/`update` pair. States are plain values threaded by the caller.
pub trait GradientTransformation {
    type State: Clone + fmt::Debug;

    fn input(&self) -> GradientInput {
        GradientInput::Mean
    }

    fn init(&self, params: &ManifoldPoint) -> Result<Self::State>;

    fn update(
        &self,
        grads: Gradients,
        state: Self::State,
        params: &ManifoldPoint,
        ctx: StepContext<'_>,
    ) -> Result<(Gradients, Self::State)>;

    /// Feeds the output of `self` into `next`.
    fn then<B: GradientTransformation>(self, next: B) -> Chain<Self, B>
    where
        Self: Sized,
    {
        Chain {
            first: self,
            second: next,
        }
    }
}

/// Sequential composition of two transformations.
#[derive(Debug, Clone)]
pub struct Chain<A, B> {
    first: A,
    second: B,
}

impl<A: GradientTransformation, B: GradientTransformation> GradientTransformation for Chain<A, B> {
    type State = (A::State, B::State);

    fn input(&self) -> GradientInput {
        self.first.input()
    }

    fn init(&self, params: &ManifoldPoint) -> Result<Self::State> {
        Ok((self.first.init(params)?, self.second.init(params)?))
    }

    fn update(
        &self,
        grads: Gradients,
        state: Self::State,
        params: &ManifoldPoint,
        ctx: StepContext<'_>,
    ) -> Result<(Gradients, Self::State)> {
        let (a, b) = state;
        let (mid, a) = self.first.update(grads, a, params, ctx)?;
        let (out, b) = self.second.update(mid, b, params, ctx)?;
        Ok((out, (a, b)))
    }
}

/// Riemannian SGD: `update = −η_t · grad`.
pub fn rsgd(lr: impl Into<LearningRate>) -> ScaleByLearningRate {
    ScaleByLearningRate::new(lr.into())
}

/// Riemannian SVRG with snapshots every `epoch_length` steps.
pub fn rsvrg(
    lr: impl Into<LearningRate>,
    epoch_length: usize,
) -> Result<Chain<VarianceReduced, ScaleByLearningRate>> {
    Ok(VarianceReduced::new(epoch_length)?.then(rsgd(lr)))
}

/// Riemannian SARAH-style recursive gradient with restarts every `epoch_length` steps.
pub fn rsrg(
    lr: impl Into<LearningRate>,
    epoch_length: usize,
) -> Result<Chain<RecursiveGradient, ScaleByLearningRate>> {
    Ok(RecursiveGradient::new(epoch_length)?.then(rsgd(lr)))
}

/// Riemannian adaptive SGD with row and column accumulators.
pub fn rasa(lr: impl Into<LearningRate>, eps_adapt: f64) -> Result<Chain<ScaleByRasa, ScaleByLearningRate>> {
    Ok(ScaleByRasa::new(eps_adapt)?.then(rsgd(lr)))
}

/// Zeroth-order Riemannian gradient descent with a two-point random-direction estimator.
pub fn zo_rgd(
    lr: impl Into<LearningRate>,
    mu: f64,
    num_dirs: usize,
    seed: u64,
) -> Result<Chain<ZerothOrder, ScaleByLearningRate>> {
    Ok(ZerothOrder::new(mu, num_dirs, seed)?.then(rsgd(lr)))
}

/// Differentially private RSGD: per-example clipping at `clip`, Gaussian tangent
/// noise of per-coordinate std `sigma · clip` added to the clipped sum, then averaging.
pub fn dp_rsgd(
    lr: impl Into<LearningRate>,
    sigma: f64,
    clip: f64,
    seed: u64,
) -> Result<Chain<Chain<ClipPerExample, NoisyMean>, ScaleByLearningRate>> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    let clip_t = ClipPerExample::new(clip)?;
    let std = if sigma == 0.0 { 0.0 } else { sigma * clip };
    Ok(clip_t.then(NoisyMean::new(std, seed)?).then(rsgd(lr)))
}
