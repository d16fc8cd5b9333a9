use rand::RngCore;

use super::{gaussian, require};
use crate::error::{Error, Result};
use crate::manifold::{Array, Manifold, Tolerances};

/// Below this angle, exp and log fall back to first-order forms.
const SMALL_ANGLE: f64 = 1e-12;
/// Pairs with `1 + xᵀy` at or below this are treated as antipodal.
const ANTIPODAL: f64 = 1e-10;

/// Unit sphere `S(d) = {x ∈ ℝᵈ : xᵀx = 1}` with the metric `⟨u, v⟩ = uᵀv`.
#[derive(Debug, Clone)]
pub struct Hypersphere {
    dim: usize,
    tol: Tolerances,
}

impl Hypersphere {
    pub fn new(dim: usize) -> Result<Self> {
        require(dim >= 2, "hypersphere needs d >= 2")?;
        Ok(Hypersphere {
            dim,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(θ, y − (xᵀy)x)`; the angle is recovered with atan2 so that nearby
    /// points keep full relative accuracy.
    fn angle_and_direction(x: &Array, y: &Array) -> (f64, Array) {
        let c = x.dot(y);
        let u = y - x * c;
        (u.norm().atan2(c), u)
    }
}

impl Manifold for Hypersphere {
    fn name(&self) -> &str {
        "hypersphere"
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.dim, 1)
    }

    fn intrinsic_dim(&self) -> usize {
        self.dim - 1
    }

    fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn point_residual(&self, x: &Array) -> f64 {
        (x.norm_squared() - 1.0).abs()
    }

    fn tangent_residual(&self, x: &Array, v: &Array) -> f64 {
        x.dot(v).abs() / (1.0 + v.norm())
    }

    fn inner(&self, _x: &Array, u: &Array, v: &Array) -> Result<f64> {
        Ok(u.dot(v))
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array> {
        let t = v.norm();
        if t < SMALL_ANGLE {
            let y = x + v;
            let n = y.norm();
            return Ok(y / n);
        }
        Ok(x * t.cos() + v * (t.sin() / t))
    }

    fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        if 1.0 + x.dot(y) <= ANTIPODAL {
            return Err(Error::domain("hypersphere log", "antipodal points"));
        }
        let (theta, u) = Self::angle_and_direction(x, y);
        if theta < SMALL_ANGLE {
            return Ok(u);
        }
        let n = u.norm();
        Ok(u * (theta / n))
    }

    fn dist(&self, x: &Array, y: &Array) -> Result<f64> {
        Ok(Self::angle_and_direction(x, y).0)
    }

    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        let c = 1.0 + x.dot(y);
        if c <= ANTIPODAL {
            return Err(Error::domain("hypersphere transport", "antipodal points"));
        }
        Ok(v - (x + y) * (y.dot(v) / c))
    }

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        self.project_tangent(x, g)
    }

    fn project_tangent(&self, x: &Array, z: &Array) -> Result<Array> {
        Ok(z - x * x.dot(z))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Array {
        loop {
            let g = gaussian(self.dim, 1, rng);
            let n = g.norm();
            if n > 1e-8 {
                return g / n;
            }
        }
    }

    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array> {
        self.project_tangent(x, &gaussian(self.dim, 1, rng))
    }
}
