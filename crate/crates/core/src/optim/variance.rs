//! Variance-reduced gradient estimators.

use super::{GradientTransformation, Gradients, StepContext};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldPoint, TangentVector};

fn check_epoch(epoch_length: usize) -> Result<()> {
    if epoch_length == 0 {
        Err(Error::invalid("epoch_length must be >= 1"))
    } else {
        Ok(())
    }
}

/// SVRG estimator: `v_t = g_B(w_t) − Γ_{w̃→w_t}(g_B(w̃) − μ̃)` where the anchor
/// `w̃` and full gradient `μ̃` are refreshed every `epoch_length` steps. At a
/// refresh the estimator is `μ̃` itself.
#[derive(Debug, Clone)]
pub struct VarianceReduced {
    epoch_length: usize,
}

#[derive(Debug, Clone)]
pub struct SvrgState {
    pub step: u64,
    pub anchor: Option<ManifoldPoint>,
    pub full_grad: Option<TangentVector>,
}

impl VarianceReduced {
    pub fn new(epoch_length: usize) -> Result<Self> {
        check_epoch(epoch_length)?;
        Ok(VarianceReduced { epoch_length })
    }
}

impl GradientTransformation for VarianceReduced {
    type State = SvrgState;

    fn init(&self, _params: &ManifoldPoint) -> Result<SvrgState> {
        Ok(SvrgState {
            step: 0,
            anchor: None,
            full_grad: None,
        })
    }

    fn update(
        &self,
        grads: Gradients,
        state: SvrgState,
        params: &ManifoldPoint,
        ctx: StepContext<'_>,
    ) -> Result<(Gradients, SvrgState)> {
        let g = grads.into_mean("rsvrg")?;
        let refresh = state.step % self.epoch_length as u64 == 0;
        let (v, anchor, full_grad) = match (refresh, state.anchor, state.full_grad) {
            (false, Some(anchor), Some(mu)) => {
                let at_anchor = ctx.oracle.batch_grad(&anchor, ctx.batch)?;
                let correction = at_anchor.sub(&mu)?.transport_to(params)?;
                (g.sub(&correction)?, anchor, mu)
            }
            _ => {
                let mu = ctx.oracle.full_grad(params)?;
                (mu.clone(), params.clone(), mu)
            }
        };
        let next = SvrgState {
            step: state.step + 1,
            anchor: Some(anchor),
            full_grad: Some(full_grad),
        };
        Ok((Gradients::Mean(v), next))
    }
}

/// Recursive (SARAH-type) estimator:
/// `v_t = g_B(w_t) − Γ_{w_{t−1}→w_t}(g_B(w_{t−1}) − v_{t−1})`, restarted with the
/// full gradient every `epoch_length` steps.
#[derive(Debug, Clone)]
pub struct RecursiveGradient {
    epoch_length: usize,
}

#[derive(Debug, Clone)]
pub struct SrgState {
    pub step: u64,
    pub previous: Option<(ManifoldPoint, TangentVector)>,
}

impl RecursiveGradient {
    pub fn new(epoch_length: usize) -> Result<Self> {
        check_epoch(epoch_length)?;
        Ok(RecursiveGradient { epoch_length })
    }
}

impl GradientTransformation for RecursiveGradient {
    type State = SrgState;

    fn init(&self, _params: &ManifoldPoint) -> Result<SrgState> {
        Ok(SrgState {
            step: 0,
            previous: None,
        })
    }

    fn update(
        &self,
        grads: Gradients,
        state: SrgState,
        params: &ManifoldPoint,
        ctx: StepContext<'_>,
    ) -> Result<(Gradients, SrgState)> {
        let g = grads.into_mean("rsrg")?;
        let refresh = state.step % self.epoch_length as u64 == 0;
        let v = match (refresh, state.previous) {
            (false, Some((prev_w, prev_v))) => {
                let at_prev = ctx.oracle.batch_grad(&prev_w, ctx.batch)?;
                let correction = at_prev.sub(&prev_v)?.transport_to(params)?;
                g.sub(&correction)?
            }
            _ => ctx.oracle.full_grad(params)?,
        };
        let next = SrgState {
            step: state.step + 1,
            previous: Some((params.clone(), v.clone())),
        };
        Ok((Gradients::Mean(v), next))
    }
}
