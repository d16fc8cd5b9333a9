use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GradientInput, GradientTransformation, Gradients, LearningRate, StepContext};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;
use crate::ops::{clip_tangent, tangent_mean, tangent_sum};

/// `g ↦ −η_t g`, counting steps.
#[derive(Debug, Clone)]
pub struct ScaleByLearningRate {
    lr: LearningRate,
}

impl ScaleByLearningRate {
    pub fn new(lr: LearningRate) -> Self {
        ScaleByLearningRate { lr }
    }
}

impl GradientTransformation for ScaleByLearningRate {
    type State = u64;

    fn init(&self, _params: &ManifoldPoint) -> Result<u64> {
        self.lr.validate()?;
        Ok(0)
    }

    fn update(
        &self,
        grads: Gradients,
        t: u64,
        _params: &ManifoldPoint,
        _ctx: StepContext<'_>,
    ) -> Result<(Gradients, u64)> {
        let g = grads.into_mean("scale_by_lr")?;
        Ok((Gradients::Mean(g.scale(-self.lr.at(t))), t + 1))
    }
}

/// Clips every per-example gradient to Riemannian norm `tau`.
#[derive(Debug, Clone)]
pub struct ClipPerExample {
    tau: f64,
}

impl ClipPerExample {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid(format!("clip must be > 0, got {tau}")));
        }
        Ok(ClipPerExample { tau })
    }
}

impl GradientTransformation for ClipPerExample {
    type State = ();

    fn input(&self) -> GradientInput {
        GradientInput::PerExample
    }

    fn init(&self, _params: &ManifoldPoint) -> Result<()> {
        Ok(())
    }

    fn update(
        &self,
        grads: Gradients,
        _state: (),
        _params: &ManifoldPoint,
        _ctx: StepContext<'_>,
    ) -> Result<(Gradients, ())> {
        let clipped = grads
            .into_per_example("clip_per_example")?
            .iter()
            .map(|g| clip_tangent(g, self.tau))
            .collect::<Result<Vec<_>>>()?;
        Ok((Gradients::PerExample(clipped), ()))
    }
}

/// Plain average of per-example gradients.
#[derive(Debug, Clone, Default)]
pub struct MeanReduce;

impl GradientTransformation for MeanReduce {
    type State = ();

    fn input(&self) -> GradientInput {
        GradientInput::PerExample
    }

    fn init(&self, _params: &ManifoldPoint) -> Result<()> {
        Ok(())
    }

    fn update(
        &self,
        grads: Gradients,
        _state: (),
        _params: &ManifoldPoint,
        _ctx: StepContext<'_>,
    ) -> Result<(Gradients, ())> {
        let gs = grads.into_per_example("mean_reduce")?;
        Ok((Gradients::Mean(tangent_mean(&gs)?), ()))
    }
}

/// `(1/b)(Σ_i g_i + ξ)` with `ξ` a tangent Gaussian of per-coordinate std `std`
/// in an orthonormal basis of the tangent space.
#[derive(Debug, Clone)]
pub struct NoisyMean {
    std: f64,
    seed: u64,
}

impl NoisyMean {
    pub fn new(std: f64, seed: u64) -> Result<Self> {
        if !(std >= 0.0) || !std.is_finite() {
            return Err(Error::invalid(format!("noise std must be finite and >= 0, got {std}")));
        }
        Ok(NoisyMean { std, seed })
    }
}

impl GradientTransformation for NoisyMean {
    type State = ChaCha8Rng;

    fn input(&self) -> GradientInput {
        GradientInput::PerExample
    }

    fn init(&self, _params: &ManifoldPoint) -> Result<ChaCha8Rng> {
        Ok(ChaCha8Rng::seed_from_u64(self.seed))
    }

    fn update(
        &self,
        grads: Gradients,
        mut rng: ChaCha8Rng,
        params: &ManifoldPoint,
        _ctx: StepContext<'_>,
    ) -> Result<(Gradients, ChaCha8Rng)> {
        let gs = grads.into_per_example("noisy_mean")?;
        let b = gs.len() as f64;
        let mut sum = tangent_sum(&gs)?;
        if self.std > 0.0 {
            let noise = params.random_tangent(&mut rng)?.scale(self.std);
            sum = sum.add(&noise.rebase(sum.base().clone()))?;
        }
        Ok((Gradients::Mean(sum.scale(1.0 / b)), rng))
    }
}
