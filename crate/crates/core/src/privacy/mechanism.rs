use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PrivacyBudget;
use crate::error::{Error, Result};
use crate::geometry::sym_gaussian;
use crate::linalg::{spd_fun, sym, MatrixFn};
use crate::manifold::ManifoldPoint;

/// Metropolis–Hastings settings for [`rie_laplace_mechanism`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    pub burn_in: usize,
    /// Proposal step scale; `None` means half the target scale `σ`.
    pub proposal_std: Option<f64>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            burn_in: 500,
            proposal_std: None,
        }
    }
}

/// Classical Gaussian-mechanism scale `Δ·sqrt(2 ln(1.25/δ))/ε`.
pub fn gaussian_sigma(sensitivity: f64, budget: &PrivacyBudget) -> Result<f64> {
    budget.require_delta("gaussian mechanism")?;
    Ok(sensitivity * (2.0 * (1.25 / budget.delta).ln()).sqrt() / budget.epsilon)
}

/// Samples from the density proportional to `exp(−dist(x, center)/σ)`,
/// `σ = sensitivity/epsilon`, by a Metropolis–Hastings chain started at
/// `center`. Proposals are `exp_x(s·ξ)` with `ξ` a standard tangent Gaussian.
/// They are symmetric on all supported geometries, so acceptance uses the
/// density ratio alone. Proposals that hit a domain error are rejected.
pub fn rie_laplace_mechanism(
    center: &ManifoldPoint,
    sensitivity: f64,
    epsilon: f64,
    mcmc: McmcConfig,
    seed: u64,
) -> Result<ManifoldPoint> {
    if !(sensitivity > 0.0) || !(epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "sensitivity and epsilon must be > 0 (got {sensitivity}, {epsilon})"
        )));
    }
    let sigma = sensitivity / epsilon;
    let step = mcmc.proposal_std.unwrap_or(sigma / 2.0);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(format!("proposal_std must be finite and > 0, got {step}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = center.clone();
    let mut dx = 0.0;
    for _ in 0..=mcmc.burn_in {
        let xi = x.random_tangent(&mut rng)?;
        let proposal = x
            .exp(&xi.scale(step))
            .and_then(|y| center.dist(&y).map(|d| (y, d)));
        let u: f64 = rng.random();
        if let Ok((y, dy)) = proposal {
            if u.ln() < (dx - dy) / sigma {
                x = y;
                dx = dy;
            }
        }
    }
    Ok(x)
}

/// Gaussian mechanism in matrix-log coordinates:
/// `expm(logm X + σ_g S)` where `S` is a standard Gaussian in the free
/// coordinates of a symmetric matrix (off-diagonal coordinates carry √2, so
/// the coordinate map is a Frobenius isometry).
pub fn log_euclidean_mechanism(
    x: &ManifoldPoint,
    sensitivity: f64,
    budget: &PrivacyBudget,
    seed: u64,
) -> Result<ManifoldPoint> {
    if !x.manifold().name().starts_with("spd") {
        return Err(Error::invalid(format!(
            "log-euclidean mechanism needs an SPD point, got {}",
            x.manifold().name()
        )));
    }
    if !(sensitivity >= 0.0) {
        return Err(Error::invalid(format!("sensitivity must be >= 0, got {sensitivity}")));
    }
    let sigma = gaussian_sigma(sensitivity, budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = x.value().nrows();
    let l = spd_fun(x.value(), MatrixFn::Log)?;
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let noisy = l + sym_gaussian(m, &mut rng) * sigma;
    ManifoldPoint::new(x.manifold().clone(), sym(&spd_fun(&noisy, MatrixFn::Exp)?))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{Hypersphere, SpdLogEuclidean};
    use crate::manifold::Manifold;

    #[test]
    fn laplace_concentrates_and_is_seeded() {
        let s: Arc<dyn Manifold> = Arc::new(Hypersphere::new(4).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = ManifoldPoint::random(s, &mut rng);
        let a = rie_laplace_mechanism(&c, 1.0, 1e6, McmcConfig::default(), 9).unwrap();
        assert!(c.dist(&a).unwrap() < 1e-2);
        let b = rie_laplace_mechanism(&c, 1.0, 1e6, McmcConfig::default(), 9).unwrap();
        assert_eq!(a.value(), b.value());
        assert!(rie_laplace_mechanism(&c, 0.0, 1.0, McmcConfig::default(), 9).is_err());
    }

    #[test]
    fn log_euclidean_zero_sensitivity_is_identity() {
        let spd: Arc<dyn Manifold> = Arc::new(SpdLogEuclidean::new(3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = ManifoldPoint::random(spd, &mut rng);
        let budget = PrivacyBudget::new(1.0, 1e-5).unwrap();
        let y = log_euclidean_mechanism(&x, 0.0, &budget, 0).unwrap();
        assert!((y.value() - x.value()).norm() < 1e-10);
        let no_delta = PrivacyBudget::new(1.0, 0.0).unwrap();
        assert!(log_euclidean_mechanism(&x, 1.0, &no_delta, 0).is_err());
    }

    #[test]
    fn classical_gaussian_scale() {
        let b = PrivacyBudget::new(1.0, 1e-6).unwrap();
        let s = gaussian_sigma(1.0, &b).unwrap();
        assert!((s - (2.0 * 1.25e6f64.ln()).sqrt()).abs() < 1e-15);
    }
}
