//! Access to losses and per-example Riemannian gradients of a finite-sum objective.

use crate::error::{Error, Result};
use crate::manifold::{ManifoldPoint, TangentVector};
use crate::ops::{riemannian_gradient, tangent_mean, CostFn};

/// A finite-sum objective `f(w) = (1/n) Σ_i f_i(w)`.
pub trait GradientOracle: Send + Sync {
    fn num_examples(&self) -> usize;

    /// Mean of `f_i(w)` over `batch`.
    fn loss(&self, w: &ManifoldPoint, batch: &[usize]) -> Result<f64>;

    /// Riemannian gradient of `f_i` at `w`.
    fn example_grad(&self, w: &ManifoldPoint, i: usize) -> Result<TangentVector>;

    fn example_grads(&self, w: &ManifoldPoint, batch: &[usize]) -> Result<Vec<TangentVector>> {
        batch.iter().map(|&i| self.example_grad(w, i)).collect()
    }

    /// Mean gradient over `batch`, summed in batch order.
    fn batch_grad(&self, w: &ManifoldPoint, batch: &[usize]) -> Result<TangentVector> {
        tangent_mean(&self.example_grads(w, batch)?)
    }

    fn full_loss(&self, w: &ManifoldPoint) -> Result<f64> {
        let all: Vec<usize> = (0..self.num_examples()).collect();
        self.loss(w, &all)
    }

    fn full_grad(&self, w: &ManifoldPoint) -> Result<TangentVector> {
        let all: Vec<usize> = (0..self.num_examples()).collect();
        self.batch_grad(w, &all)
    }
}

/// A [`CostFn`] applied over a dataset.
pub struct Problem<C: CostFn> {
    cost: C,
    data: Vec<C::Datum>,
}

impl<C: CostFn> Problem<C> {
    pub fn new(cost: C, data: Vec<C::Datum>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("problem needs at least one datum"));
        }
        Ok(Problem { cost, data })
    }

    pub fn cost(&self) -> &C {
        &self.cost
    }

    pub fn data(&self) -> &[C::Datum] {
        &self.data
    }
}

fn check_batch(batch: &[usize], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    match batch.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::invalid(format!("index {i} out of range for {n} examples"))),
        None => Ok(()),
    }
}

impl<C> GradientOracle for Problem<C>
where
    C: CostFn,
    C::Datum: Send + Sync,
{
    fn num_examples(&self) -> usize {
        self.data.len()
    }

    fn loss(&self, w: &ManifoldPoint, batch: &[usize]) -> Result<f64> {
        check_batch(batch, self.data.len())?;
        let total: f64 = batch
            .iter()
            .map(|&i| self.cost.evaluate(w.value(), &self.data[i]))
            .sum();
        Ok(total / batch.len() as f64)
    }

    fn example_grad(&self, w: &ManifoldPoint, i: usize) -> Result<TangentVector> {
        check_batch(&[i], self.data.len())?;
        riemannian_gradient(&self.cost, w, &self.data[i])
    }
}

/// `f_i(w) = dist²(w, z_i)` with gradient `−2 log_w(z_i)`.
pub struct FrechetObjective {
    points: Vec<ManifoldPoint>,
}

impl FrechetObjective {
    pub fn new(points: Vec<ManifoldPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("frechet objective needs at least one point"));
        }
        Ok(FrechetObjective { points })
    }

    pub fn points(&self) -> &[ManifoldPoint] {
        &self.points
    }
}

impl GradientOracle for FrechetObjective {
    fn num_examples(&self) -> usize {
        self.points.len()
    }

    fn loss(&self, w: &ManifoldPoint, batch: &[usize]) -> Result<f64> {
        check_batch(batch, self.points.len())?;
        let mut total = 0.0;
        for &i in batch {
            total += w.dist(&self.points[i])?.powi(2);
        }
        Ok(total / batch.len() as f64)
    }

    fn example_grad(&self, w: &ManifoldPoint, i: usize) -> Result<TangentVector> {
        check_batch(&[i], self.points.len())?;
        Ok(w.log(&self.points[i])?.scale(-2.0))
    }
}
