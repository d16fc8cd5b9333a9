//! Cost functions, the Riemannian gradient operator, and the basic update
//! primitives shared by every optimizer.

use crate::error::{Error, Result};
use crate::manifold::{Array, ManifoldPoint, TangentVector};

/// A per-datum objective `f(w; datum)` on the ambient representation of `w`.
pub trait CostFn: Send + Sync {
    type Datum;

    fn evaluate(&self, w: &Array, datum: &Self::Datum) -> f64;

    /// Analytic Euclidean gradient. `None` selects central finite differences.
    fn euclidean_grad(&self, _w: &Array, _datum: &Self::Datum) -> Option<Array> {
        None
    }
}

type ValueFn<D> = dyn Fn(&Array, &D) -> f64 + Send + Sync;
type GradFn<D> = dyn Fn(&Array, &D) -> Array + Send + Sync;

/// A [`CostFn`] assembled from closures.
pub struct ClosureCost<D> {
    value: Box<ValueFn<D>>,
    grad: Option<Box<GradFn<D>>>,
}

impl<D> ClosureCost<D> {
    pub fn new(value: impl Fn(&Array, &D) -> f64 + Send + Sync + 'static) -> Self {
        ClosureCost {
            value: Box::new(value),
            grad: None,
        }
    }

    pub fn with_grad(mut self, grad: impl Fn(&Array, &D) -> Array + Send + Sync + 'static) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }
}

impl<D> CostFn for ClosureCost<D> {
    type Datum = D;

    fn evaluate(&self, w: &Array, datum: &D) -> f64 {
        (self.value)(w, datum)
    }

    fn euclidean_grad(&self, w: &Array, datum: &D) -> Option<Array> {
        self.grad.as_ref().map(|g| g(w, datum))
    }
}

/// Default finite-difference step `1e-6 · (1 + max|w|)`.
pub fn default_fd_step(w: &Array) -> f64 {
    1e-6 * (1.0 + w.amax())
}

/// Central differences of `cost` along every ambient coordinate.
pub fn finite_diff_egrad<C: CostFn + ?Sized>(
    cost: &C,
    w: &Array,
    datum: &C::Datum,
    h: Option<f64>,
) -> Result<Array> {
    let h = h.unwrap_or_else(|| default_fd_step(w));
    if !(h > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut probe = w.clone();
    let mut g = Array::zeros(w.nrows(), w.ncols());
    for k in 0..w.len() {
        let orig = probe[k];
        probe[k] = orig + h;
        let up = cost.evaluate(&probe, datum);
        probe[k] = orig - h;
        let down = cost.evaluate(&probe, datum);
        probe[k] = orig;
        g[k] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

/// Euclidean gradient, analytic when available.
pub fn euclidean_gradient<C: CostFn + ?Sized>(cost: &C, w: &Array, datum: &C::Datum) -> Result<Array> {
    match cost.euclidean_grad(w, datum) {
        Some(g) => Ok(g),
        None => finite_diff_egrad(cost, w, datum, None),
    }
}

/// Riemannian gradient of `cost` at `w`.
pub fn riemannian_gradient<C: CostFn + ?Sized>(
    cost: &C,
    w: &ManifoldPoint,
    datum: &C::Datum,
) -> Result<TangentVector> {
    let g = euclidean_gradient(cost, w.value(), datum)?;
    if !g.iter().all(|x| x.is_finite()) {
        return Err(Error::NumericFailure {
            op: "riemannian_gradient",
        });
    }
    let r = w.egrad_to_rgrad(&g)?;
    if !r.value().iter().all(|x| x.is_finite()) {
        return Err(Error::NumericFailure {
            op: "egrad_to_rgrad",
        });
    }
    Ok(r)
}

/// Rescales `v` so that its Riemannian norm is at most `tau`.
pub fn clip_tangent(v: &TangentVector, tau: f64) -> Result<TangentVector> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("clip threshold must be > 0, got {tau}")));
    }
    let n = v.norm()?;
    if n <= tau {
        Ok(v.clone())
    } else {
        Ok(v.scale(tau / n))
    }
}

/// Moves `w` along the exponential map by an already-scaled update.
pub fn apply_updates(w: &ManifoldPoint, u: &TangentVector) -> Result<ManifoldPoint> {
    w.exp(u)
}

/// Sum of tangents at a common base, accumulated in slice order.
pub fn tangent_sum(vs: &[TangentVector]) -> Result<TangentVector> {
    let (first, rest) = vs
        .split_first()
        .ok_or_else(|| Error::invalid("empty tangent list"))?;
    rest.iter().try_fold(first.clone(), |acc, v| acc.add(v))
}

/// Arithmetic mean of tangents at a common base, accumulated in slice order.
pub fn tangent_mean(vs: &[TangentVector]) -> Result<TangentVector> {
    Ok(tangent_sum(vs)?.scale(1.0 / vs.len() as f64))
}

/// Result of [`frechet_mean`]: the final iterate and `‖mean_i log_w(z_i)‖_w` there.
#[derive(Debug, Clone)]
pub struct FrechetMean {
    pub point: ManifoldPoint,
    pub residual: f64,
}

fn mean_log(w: &ManifoldPoint, points: &[ManifoldPoint]) -> Result<TangentVector> {
    let logs = points
        .iter()
        .map(|z| w.log(z))
        .collect::<Result<Vec<_>>>()?;
    tangent_mean(&logs)
}

/// Fixed-step Riemannian gradient iteration for `min_w (1/n) Σ dist²(w, z_i)`,
/// started at `points[0]`.
pub fn frechet_mean(points: &[ManifoldPoint], step: f64, iters: usize) -> Result<FrechetMean> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("frechet mean of an empty set"))?;
    if !(step > 0.0) {
        return Err(Error::invalid(format!("step must be > 0, got {step}")));
    }
    if points.len() == 1 {
        return Ok(FrechetMean {
            point: first.clone(),
            residual: 0.0,
        });
    }
    let mut w = first.clone();
    for _ in 0..iters {
        let m = mean_log(&w, points)?;
        if m.value().iter().all(|&x| x == 0.0) {
            break;
        }
        w = w.exp(&m.scale(step))?;
    }
    let residual = mean_log(&w, points)?.norm()?;
    Ok(FrechetMean { point: w, residual })
}
