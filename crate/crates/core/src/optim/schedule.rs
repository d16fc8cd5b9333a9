use crate::error::{Error, Result};

/// Step-size schedule `η_t`, with `t` counted from 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRate {
    Constant(f64),
    /// `η₀ / √(t + 1)`
    InvSqrt(f64),
}

impl LearningRate {
    pub fn at(&self, t: u64) -> f64 {
        match *self {
            LearningRate::Constant(eta) => eta,
            LearningRate::InvSqrt(eta) => eta / ((t + 1) as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eta = match *self {
            LearningRate::Constant(e) | LearningRate::InvSqrt(e) => e,
        };
        if eta.is_finite() && eta >= 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("learning rate must be finite and >= 0, got {eta}")))
        }
    }
}

impl From<f64> for LearningRate {
    fn from(eta: f64) -> Self {
        LearningRate::Constant(eta)
    }
}
