//! Hyperbolic space of curvature −1 in two models.
//!
//! Poincaré ball `D(d) = {x : xᵀx < 1}` with `⟨u, v⟩_x = 4uᵀv / (1 − xᵀx)²`,
//! and the Lorentz hyperboloid `H(d) = {x : ⟨x, x⟩_L = −1, x₀ > 0}` with the
//! Minkowski form `⟨u, v⟩_L = −u₀v₀ + u₁v₁ + ⋯`.

use nalgebra::DMatrix;
use rand::RngCore;

use super::{gaussian, require};
use crate::error::{Error, Result};
use crate::manifold::{Array, Manifold, Tolerances};

/// Points this close to the boundary are pulled back to radius `1 − BOUNDARY_EPS`.
pub const BOUNDARY_EPS: f64 = 1e-7;
const STRICT_INTERIOR: f64 = 1e-12;

/// Möbius addition `x ⊕ y` in the unit ball.
pub fn mobius_add(x: &Array, y: &Array) -> Result<Array> {
    let xy = x.dot(y);
    let x2 = x.norm_squared();
    let y2 = y.norm_squared();
    let den = 1.0 + 2.0 * xy + x2 * y2;
    if den.abs() < 1e-15 {
        return Err(Error::NumericFailure { op: "mobius_add" });
    }
    Ok((x * (1.0 + 2.0 * xy + y2) + y * (1.0 - x2)) / den)
}

/// Gyration `gyr[u, v]w`, linear in `w`.
pub fn gyration(u: &Array, v: &Array, w: &Array) -> Result<Array> {
    let u2 = u.norm_squared();
    let v2 = v.norm_squared();
    let uv = u.dot(v);
    let uw = u.dot(w);
    let vw = v.dot(w);
    let a = -uw * v2 + vw + 2.0 * uv * vw;
    let b = -vw * u2 - uw;
    let d = 1.0 + 2.0 * uv + u2 * v2;
    if d.abs() < 1e-15 {
        return Err(Error::NumericFailure { op: "gyration" });
    }
    Ok(w + (u * a + v * b) * (2.0 / d))
}

/// Conformal factor `λ_x = 2 / (1 − ‖x‖²)`.
fn conformal(x: &Array) -> f64 {
    2.0 / (1.0 - x.norm_squared())
}

/// Poincaré ball model.
#[derive(Debug, Clone)]
pub struct PoincareBall {
    dim: usize,
    tol: Tolerances,
}

impl PoincareBall {
    pub fn new(dim: usize) -> Result<Self> {
        require(dim >= 1, "poincare ball needs d >= 1")?;
        Ok(PoincareBall {
            dim,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }
}

impl Manifold for PoincareBall {
    fn name(&self) -> &str {
        "poincare"
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.dim, 1)
    }

    fn intrinsic_dim(&self) -> usize {
        self.dim
    }

    fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn point_residual(&self, x: &Array) -> f64 {
        let excess = x.norm_squared() - (1.0 - STRICT_INTERIOR);
        if excess.is_nan() {
            f64::INFINITY
        } else {
            excess.max(0.0)
        }
    }

    fn check_point(&self, x: &Array) -> Result<()> {
        crate::manifold::check_shape(self.ambient_shape(), x)?;
        let residual = self.point_residual(x);
        if residual == 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidPoint {
                manifold: self.name().to_string(),
                residual,
                tol: 0.0,
            })
        }
    }

    fn tangent_residual(&self, _x: &Array, _v: &Array) -> f64 {
        0.0
    }

    fn canonicalize(&self, x: Array) -> Array {
        let r = x.norm();
        let edge = 1.0 - BOUNDARY_EPS;
        if r > edge && r <= 1.0 {
            x * (edge / r)
        } else {
            x
        }
    }

    fn inner(&self, x: &Array, u: &Array, v: &Array) -> Result<f64> {
        let lam = conformal(x);
        Ok(lam * lam * u.dot(v))
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array> {
        let n = v.norm();
        if n == 0.0 {
            return Ok(x.clone());
        }
        let step = v * ((conformal(x) * n / 2.0).tanh() / n);
        Ok(self.canonicalize(mobius_add(x, &step)?))
    }

    fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        let w = mobius_add(&(-x), y)?;
        let n = w.norm();
        if n == 0.0 {
            return Ok(w);
        }
        Ok(w * (2.0 / conformal(x) * n.atanh() / n))
    }

    fn dist(&self, x: &Array, y: &Array) -> Result<f64> {
        Ok(2.0 * mobius_add(&(-x), y)?.norm().atanh())
    }

    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        Ok(gyration(y, &(-x), v)? * (conformal(x) / conformal(y)))
    }

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        let lam = conformal(x);
        Ok(g / (lam * lam))
    }

    fn project_tangent(&self, _x: &Array, z: &Array) -> Result<Array> {
        Ok(z.clone())
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Array {
        // exp at the origin of a tangent with Euclidean norm ≈ 0.5
        let v = gaussian(self.dim, 1, rng) * (0.5 / (self.dim as f64).sqrt());
        let n = v.norm();
        if n == 0.0 {
            return v;
        }
        &v * (n.tanh() / n)
    }

    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array> {
        Ok(gaussian(self.dim, 1, rng) / conformal(x))
    }
}

/// Minkowski bilinear form `−u₀v₀ + Σ_{i≥1} u_i v_i`.
pub fn lorentz_inner(u: &Array, v: &Array) -> f64 {
    u.dot(v) - 2.0 * u[0] * v[0]
}

/// Isometry from the Poincaré ball onto the hyperboloid.
pub fn poincare_to_lorentz(x: &Array) -> Array {
    let x2 = x.norm_squared();
    let den = 1.0 - x2;
    let mut out = DMatrix::zeros(x.nrows() + 1, 1);
    out[0] = (1.0 + x2) / den;
    for i in 0..x.nrows() {
        out[i + 1] = 2.0 * x[i] / den;
    }
    out
}

/// Lorentz hyperboloid model with ambient dimension `d` (intrinsic `d − 1`).
#[derive(Debug, Clone)]
pub struct Lorentz {
    dim: usize,
    tol: Tolerances,
}

impl Lorentz {
    pub fn new(dim: usize) -> Result<Self> {
        require(dim >= 2, "lorentz hyperboloid needs ambient d >= 2")?;
        Ok(Lorentz {
            dim,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    fn origin(&self) -> Array {
        let mut o = DMatrix::zeros(self.dim, 1);
        o[0] = 1.0;
        o
    }

    /// Recomputes `x₀` from the spatial part, removing drift off the sheet.
    fn lift(mut x: Array) -> Array {
        let spatial: f64 = x.iter().skip(1).map(|v| v * v).sum();
        x[0] = (1.0 + spatial).sqrt();
        x
    }

    /// Geodesic distance, via `‖x − y‖_L = 2 sinh(d/2)` to avoid cancellation in arccosh.
    fn geodesic_distance(x: &Array, y: &Array) -> Result<f64> {
        let beta = -lorentz_inner(x, y);
        if beta < 1.0 - 1e-9 {
            return Err(Error::domain(
                "lorentz dist",
                format!("-<x,y>_L = {beta} < 1"),
            ));
        }
        let diff = x - y;
        let chord = lorentz_inner(&diff, &diff).max(0.0).sqrt();
        Ok(2.0 * (chord / 2.0).asinh())
    }
}

impl Manifold for Lorentz {
    fn name(&self) -> &str {
        "lorentz"
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
        if x[0] <= 0.0 {
            return f64::INFINITY;
        }
        (lorentz_inner(x, x) + 1.0).abs()
    }

    fn tangent_residual(&self, x: &Array, v: &Array) -> f64 {
        lorentz_inner(x, v).abs() / (1.0 + x.norm() * v.norm())
    }

    fn inner(&self, _x: &Array, u: &Array, v: &Array) -> Result<f64> {
        Ok(lorentz_inner(u, v))
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array> {
        let s = lorentz_inner(v, v).max(0.0).sqrt();
        let sinhc = if s < 1e-8 { 1.0 + s * s / 6.0 } else { s.sinh() / s };
        Ok(Self::lift(x * s.cosh() + v * sinhc))
    }

    fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        let beta = -lorentz_inner(x, y);
        if beta < 1.0 - 1e-9 {
            return Err(Error::domain(
                "lorentz log",
                format!("-<x,y>_L = {beta} < 1"),
            ));
        }
        if beta <= 1.0 + 1e-14 {
            return Ok(DMatrix::zeros(self.dim, 1));
        }
        let d = Self::geodesic_distance(x, y)?;
        let u = y - x * beta;
        let u = &u + x * lorentz_inner(x, &u);
        Ok(u * (d / d.sinh()))
    }

    fn dist(&self, x: &Array, y: &Array) -> Result<f64> {
        Self::geodesic_distance(x, y)
    }

    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        let beta = -lorentz_inner(x, y);
        if beta < 1.0 - 1e-9 {
            return Err(Error::domain(
                "lorentz transport",
                format!("-<x,y>_L = {beta} < 1"),
            ));
        }
        Ok(v + (x + y) * (lorentz_inner(y, v) / (1.0 + beta)))
    }

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        let mut h = g.clone();
        h[0] = -h[0];
        self.project_tangent(x, &h)
    }

    fn project_tangent(&self, x: &Array, z: &Array) -> Result<Array> {
        Ok(z + x * lorentz_inner(x, z))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Array {
        let mut v = gaussian(self.dim, 1, rng) * (1.0 / (self.dim as f64).sqrt());
        v[0] = 0.0;
        let s = v.norm();
        let o = self.origin();
        if s == 0.0 {
            return o;
        }
        Self::lift(o * s.cosh() + v * (s.sinh() / s))
    }

    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array> {
        let mut v = gaussian(self.dim, 1, rng);
        v[0] = 0.0;
        self.transport(&self.origin(), x, &v)
    }
}
