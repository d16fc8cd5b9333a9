//! Adaptive scaling with row and column second-moment accumulators.

use nalgebra::DVector;

use super::{GradientTransformation, Gradients, StepContext};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;

/// Which accumulators precondition the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasaVariant {
    /// `G ↦ L̂^{-1/4} G R̂^{-1/4}` (matrix parameters).
    RowColumn,
    /// `G ↦ L̂^{-1/2} G`.
    Row,
}

/// Scales the Riemannian gradient entrywise by
/// `1 / (â_row,i^{1/4} · â_col,j^{1/4} + eps)` and projects back onto the
/// tangent space. Accumulators are exponential averages of the squared row and
/// column norms, passed through a running maximum so the scaling never grows.
#[derive(Debug, Clone)]
pub struct ScaleByRasa {
    beta: f64,
    eps: f64,
    variant: RasaVariant,
    fixed: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RasaState {
    pub step: u64,
    pub row_avg: DVector<f64>,
    pub col_avg: DVector<f64>,
    pub row_max: DVector<f64>,
    pub col_max: DVector<f64>,
}

impl ScaleByRasa {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps_adapt must be > 0, got {eps}")));
        }
        Ok(ScaleByRasa {
            beta: 0.99,
            eps,
            variant: RasaVariant::RowColumn,
            fixed: None,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid(format!("beta must be in [0, 1), got {beta}")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn with_variant(mut self, variant: RasaVariant) -> Self {
        self.variant = variant;
        self
    }

    /// Pins every accumulator to `value`, disabling adaptation.
    pub fn with_fixed_accumulators(mut self, value: f64) -> Self {
        self.fixed = Some(value);
        self
    }

    /// Per-entry multipliers for the current state.
    pub fn scaling(&self, state: &RasaState, rows: usize, cols: usize) -> nalgebra::DMatrix<f64> {
        let row_only = self.variant == RasaVariant::Row || cols == 1;
        nalgebra::DMatrix::from_fn(rows, cols, |i, j| {
            let denom = if row_only {
                state.row_max[i].sqrt()
            } else {
                state.row_max[i].powf(0.25) * state.col_max[j].powf(0.25)
            };
            1.0 / (denom + self.eps)
        })
    }
}

impl GradientTransformation for ScaleByRasa {
    type State = RasaState;

    fn init(&self, params: &ManifoldPoint) -> Result<RasaState> {
        let (m, r) = params.value().shape();
        let fill = self.fixed.unwrap_or(0.0);
        Ok(RasaState {
            step: 0,
            row_avg: DVector::from_element(m, fill),
            col_avg: DVector::from_element(r, fill),
            row_max: DVector::from_element(m, fill),
            col_max: DVector::from_element(r, fill),
        })
    }

    fn update(
        &self,
        grads: Gradients,
        mut state: RasaState,
        params: &ManifoldPoint,
        _ctx: StepContext<'_>,
    ) -> Result<(Gradients, RasaState)> {
        let g = grads.into_mean("rasa")?;
        let gv = g.value();
        let (m, r) = gv.shape();
        if self.fixed.is_none() {
            let b = self.beta;
            for i in 0..m {
                let sq = gv.row(i).norm_squared() / r as f64;
                state.row_avg[i] = b * state.row_avg[i] + (1.0 - b) * sq;
                state.row_max[i] = state.row_max[i].max(state.row_avg[i]);
            }
            for j in 0..r {
                let sq = gv.column(j).norm_squared() / m as f64;
                state.col_avg[j] = b * state.col_avg[j] + (1.0 - b) * sq;
                state.col_max[j] = state.col_max[j].max(state.col_avg[j]);
            }
        }
        let scaled = gv.component_mul(&self.scaling(&state, m, r));
        let out = params.project(&scaled)?;
        state.step += 1;
        Ok((Gradients::Mean(out), state))
    }
}
