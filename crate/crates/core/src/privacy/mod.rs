//! Differential privacy: manifold-valued mechanisms and an RDP accountant for
//! calibrating the noise multiplier of private gradient descent.

mod accountant;
mod mechanism;

pub use accountant::{
    calibrate_dprgd, calibrate_dprsgd, rdp_gaussian, rdp_subsampled_gaussian, rdp_to_dp,
    AccountantState, DEFAULT_ORDERS,
};
pub use mechanism::{
    gaussian_sigma, log_euclidean_mechanism, rie_laplace_mechanism, McmcConfig,
};

use crate::error::{Error, Result};

/// An (ε, δ) target. δ = 0 is only meaningful for the Laplace mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be finite and > 0, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must be in [0, 1), got {delta}")));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    pub(crate) fn require_delta(&self, who: &str) -> Result<()> {
        if self.delta > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("{who} requires delta > 0")))
        }
    }
}
