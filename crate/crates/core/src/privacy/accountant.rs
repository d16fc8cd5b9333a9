//! Rényi-DP accounting for the (subsampled) Gaussian mechanism.

use super::PrivacyBudget;
use crate::error::{Error, Result};

/// Integer orders 2..=64 plus 128 and 256.
pub const DEFAULT_ORDERS: [f64; 65] = {
    let mut o = [0.0; 65];
    let mut i = 0;
    while i < 63 {
        o[i] = (i + 2) as f64;
        i += 1;
    }
    o[63] = 128.0;
    o[64] = 256.0;
    o
};

const SEARCH_LO: f64 = 1e-4;
const SEARCH_HI: f64 = 1e6;
const SEARCH_RTOL: f64 = 1e-4;

/// RDP of the Gaussian mechanism with noise multiplier `sigma_mult`: `α / (2σ²)`.
pub fn rdp_gaussian(sigma_mult: f64, order: f64) -> f64 {
    order / (2.0 * sigma_mult * sigma_mult)
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// RDP at integer order `α ≥ 2` of the Gaussian mechanism applied to a
/// Poisson subsample with rate `q`:
/// `ln(Σ_k C(α,k) (1−q)^{α−k} q^k exp((k²−k)/(2σ²))) / (α−1)`.
pub fn rdp_subsampled_gaussian(sigma_mult: f64, q: f64, order: u32) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    let a = order;
    let (lq, l1q) = (q.ln(), (-q).ln_1p());
    let two_s2 = 2.0 * sigma_mult * sigma_mult;
    let terms: Vec<f64> = (0..=a)
        .map(|k| {
            let kf = k as f64;
            let mut t = ln_binomial(a, k) + (kf * kf - kf) / two_s2;
            if k > 0 {
                t += kf * lq;
            }
            if k < a {
                t += (a - k) as f64 * l1q;
            }
            t
        })
        .collect();
    (log_sum_exp(&terms) / (a as f64 - 1.0)).max(0.0)
}

/// Accumulated RDP over a fixed order grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountantState {
    pub orders: Vec<f64>,
    pub rdp: Vec<f64>,
    pub steps: u64,
}

impl Default for AccountantState {
    fn default() -> Self {
        AccountantState::new(DEFAULT_ORDERS.to_vec()).expect("default orders are valid")
    }
}

impl AccountantState {
    pub fn new(orders: Vec<f64>) -> Result<Self> {
        if let Some(bad) = orders.iter().find(|&&a| !(a > 1.0)) {
            return Err(Error::invalid(format!("RDP orders must be > 1, got {bad}")));
        }
        let rdp = vec![0.0; orders.len()];
        Ok(AccountantState {
            orders,
            rdp,
            steps: 0,
        })
    }

    /// Adds `steps` copies of a mechanism with per-order RDP `per_step(α)`.
    pub fn compose(mut self, steps: u64, per_step: impl Fn(f64) -> f64) -> Self {
        for (r, &a) in self.rdp.iter_mut().zip(&self.orders) {
            *r += steps as f64 * per_step(a);
        }
        self.steps += steps;
        self
    }

    pub fn compose_gaussian(self, sigma_mult: f64, steps: u64) -> Self {
        self.compose(steps, |a| rdp_gaussian(sigma_mult, a))
    }

    /// Orders must be integers for the subsampled bound; fractional orders are skipped
    /// by charging them infinite RDP.
    pub fn compose_subsampled(self, sigma_mult: f64, q: f64, steps: u64) -> Self {
        self.compose(steps, |a| {
            if a.fract() == 0.0 {
                rdp_subsampled_gaussian(sigma_mult, q, a as u32)
            } else {
                f64::INFINITY
            }
        })
    }
}

/// `min_α rdp(α) + ln(1/δ)/(α−1)`.
pub fn rdp_to_dp(state: &AccountantState, delta: f64) -> Result<f64> {
    if state.orders.is_empty() {
        return Err(Error::invalid("empty RDP order grid"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    let l = (1.0 / delta).ln();
    Ok(state
        .orders
        .iter()
        .zip(&state.rdp)
        .map(|(&a, &r)| r + l / (a - 1.0))
        .fold(f64::INFINITY, f64::min))
}

fn check_run(clip: f64, n: usize, steps: u64) -> Result<()> {
    if !(clip > 0.0) || n == 0 || steps == 0 {
        return Err(Error::invalid(format!(
            "clip, n and steps must be positive (clip={clip}, n={n}, steps={steps})"
        )));
    }
    Ok(())
}

/// Smallest multiplier (to relative tolerance) on a log-scale bisection whose
/// accountant meets the budget. `eps_of` must be nonincreasing.
fn search(budget: &PrivacyBudget, eps_of: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    budget.require_delta("noise calibration")?;
    let (mut lo, mut hi) = (SEARCH_LO, SEARCH_HI);
    if eps_of(hi)? > budget.epsilon {
        return Err(Error::Calibration { lo, hi });
    }
    if eps_of(lo)? <= budget.epsilon {
        return Ok(lo);
    }
    while hi / lo - 1.0 > SEARCH_RTOL {
        let mid = (lo * hi).sqrt();
        if eps_of(mid)? <= budget.epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Noise multiplier for `steps` full-batch steps. The released quantity is the
/// clipped mean, whose replace-one sensitivity is `2·clip/n`; the returned
/// multiplier scales that sensitivity.
pub fn calibrate_dprgd(budget: &PrivacyBudget, clip: f64, n: usize, steps: u64) -> Result<f64> {
    check_run(clip, n, steps)?;
    search(budget, |s| {
        rdp_to_dp(&AccountantState::default().compose_gaussian(s, steps), budget.delta)
    })
}

/// As [`calibrate_dprgd`] with Poisson subsampling at rate `batch/n`.
pub fn calibrate_dprsgd(
    budget: &PrivacyBudget,
    clip: f64,
    n: usize,
    steps: u64,
    batch: usize,
) -> Result<f64> {
    check_run(clip, n, steps)?;
    if batch == 0 || batch > n {
        return Err(Error::invalid(format!("batch must be in [1, {n}], got {batch}")));
    }
    let q = batch as f64 / n as f64;
    search(budget, |s| {
        rdp_to_dp(
            &AccountantState::default().compose_subsampled(s, q, steps),
            budget.delta,
        )
    })
}
