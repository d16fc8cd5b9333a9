use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GradientInput, GradientTransformation, Gradients, StepContext};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;

/// Two-point random-direction gradient estimator from loss values only:
/// `g = (D/N) Σ_j ((f(exp_w(μ u_j)) − f(w)) / μ) u_j`, with `u_j` uniform on
/// the unit sphere of `T_w M` and `D` the intrinsic dimension.
#[derive(Debug, Clone)]
pub struct ZerothOrder {
    mu: f64,
    num_dirs: usize,
    seed: u64,
}

impl ZerothOrder {
    pub fn new(mu: f64, num_dirs: usize, seed: u64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::invalid(format!("mu must be > 0, got {mu}")));
        }
        if num_dirs == 0 {
            return Err(Error::invalid("num_dirs must be >= 1"));
        }
        Ok(ZerothOrder { mu, num_dirs, seed })
    }
}

impl GradientTransformation for ZerothOrder {
    type State = ChaCha8Rng;

    fn input(&self) -> GradientInput {
        GradientInput::None
    }

    fn init(&self, _params: &ManifoldPoint) -> Result<ChaCha8Rng> {
        Ok(ChaCha8Rng::seed_from_u64(self.seed))
    }

    fn update(
        &self,
        _grads: Gradients,
        mut rng: ChaCha8Rng,
        params: &ManifoldPoint,
        ctx: StepContext<'_>,
    ) -> Result<(Gradients, ChaCha8Rng)> {
        let f0 = ctx.oracle.loss(params, ctx.batch)?;
        let mut acc = params.zero_tangent();
        for _ in 0..self.num_dirs {
            // Redraw degenerate samples so every direction is a unit tangent.
            let u = loop {
                let u = params.random_tangent(&mut rng)?;
                let n = u.norm()?;
                if n > 1e-8 {
                    break u.scale(1.0 / n);
                }
            };
            let probe = params.exp(&u.scale(self.mu))?;
            let f1 = ctx.oracle.loss(&probe, ctx.batch)?;
            acc = acc.add(&u.scale((f1 - f0) / self.mu))?;
        }
        let dim = params.manifold().intrinsic_dim() as f64;
        Ok((Gradients::Mean(acc.scale(dim / self.num_dirs as f64)), rng))
    }
}
