//! Grassmann manifold `G(m, r)` of r-dimensional subspaces of ℝᵐ.
//!
//! Points are m×r matrices with orthonormal columns standing for the class
//! `[X] = {XO : O ∈ O(r)}`; tangents are horizontal (`XᵀU = 0`). Operations may
//! return any representative, so comparisons go through principal angles.

use nalgebra::DMatrix;
use rand::RngCore;

use super::{gaussian, require};
use crate::error::{Error, Result};
use crate::linalg::{sym_eig, SymEig};
use crate::manifold::{Array, Manifold, Tolerances};

/// Smallest admissible singular value of `XᵀY` in `log`.
const CUT_LOCUS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Grassmann {
    m: usize,
    r: usize,
    tol: Tolerances,
}

fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Orthonormal factor of a thin QR with a nonnegative diagonal in R.
pub(crate) fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Principal angles between `span(X)` and `span(Y)`, ascending.
///
/// Cosines come from `σ(XᵀY)` and sines from `σ((I − XXᵀ)Y)`; pairing them
/// through atan2 keeps small angles accurate.
pub fn principal_angles(x: &Array, y: &Array) -> Vec<f64> {
    let xty = x.transpose() * y;
    let mut cos = singular_values(&xty);
    let resid = y - x * &xty;
    let mut sin = singular_values(&resid);
    cos.sort_by(|a, b| b.total_cmp(a));
    sin.sort_by(|a, b| a.total_cmp(b));
    cos.iter()
        .zip(sin.iter().chain(std::iter::repeat(&0.0)))
        .map(|(&c, &s)| s.atan2(c.max(0.0)))
        .collect()
}

impl Grassmann {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        require(r >= 1 && m > r, "grassmann needs m > r >= 1")?;
        Ok(Grassmann {
            m,
            r,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.r)
    }

    fn horizontal(x: &Array, z: &Array) -> Array {
        z - x * (x.transpose() * z)
    }

    /// Geodesic endpoint `X cos(M) + V sinc(M)`, `M = (VᵀV)^{1/2}`, before
    /// re-orthonormalization. Equal to `XQ cosΣ Qᵀ + P sinΣ Qᵀ` for `V = PΣQᵀ`
    /// but free of the singular-vector sensitivity near repeated singular values.
    fn geodesic(x: &Array, v: &Array) -> Result<Array> {
        let g = gram_eig(v)?;
        Ok(x * g.apply(cos_sqrt) + v * g.apply(sinc_sqrt))
    }

    /// Parallel transport of `v` along the unit-time geodesic with initial
    /// velocity `direction`, landing at `exp(x, direction)`:
    /// `v − X sinc(M) Dᵀv + D ((cos M − I) M⁻²) Dᵀv`.
    pub fn transport_along(&self, x: &Array, direction: &Array, v: &Array) -> Result<Array> {
        let g = gram_eig(direction)?;
        let dtv = direction.transpose() * v;
        Ok(v - x * (g.apply(sinc_sqrt) * &dtv) + direction * (g.apply(cosm1_over) * dtv))
    }
}

/// Eigendecomposition of the Gram matrix `AᵀA`, eigenvalues clamped at 0.
struct GramEig(SymEig);

fn gram_eig(a: &Array) -> Result<GramEig> {
    let e = sym_eig(&(a.transpose() * a))?;
    Ok(GramEig(e))
}

impl GramEig {
    /// `f(AᵀA)` for a scalar function of the squared singular values.
    fn apply(&self, f: fn(f64) -> f64) -> DMatrix<f64> {
        self.0
            .reconstruct_with(&self.0.eigenvalues.map(|s| f(s.max(0.0))))
    }
}

const SERIES: f64 = 1e-6;

fn cos_sqrt(s: f64) -> f64 {
    s.sqrt().cos()
}

fn sinc_sqrt(s: f64) -> f64 {
    if s < SERIES {
        1.0 - s / 6.0 + s * s / 120.0
    } else {
        s.sqrt().sin() / s.sqrt()
    }
}

/// `(cos √s − 1)/s`.
fn cosm1_over(s: f64) -> f64 {
    if s < SERIES {
        -0.5 + s / 24.0 - s * s / 720.0
    } else {
        let h = (0.5 * s.sqrt()).sin();
        -2.0 * h * h / s
    }
}

/// `atan(√s)/√s`.
fn atanc_sqrt(s: f64) -> f64 {
    if s < SERIES {
        1.0 - s / 3.0 + s * s / 5.0
    } else {
        s.sqrt().atan() / s.sqrt()
    }
}

impl Manifold for Grassmann {
    fn name(&self) -> &str {
        "grassmann"
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.m, self.r)
    }

    fn intrinsic_dim(&self) -> usize {
        (self.m - self.r) * self.r
    }

    fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn point_residual(&self, x: &Array) -> f64 {
        (x.transpose() * x - DMatrix::identity(self.r, self.r)).norm()
    }

    fn tangent_residual(&self, x: &Array, v: &Array) -> f64 {
        (x.transpose() * v).norm() / (1.0 + v.norm())
    }

    fn inner(&self, _x: &Array, u: &Array, v: &Array) -> Result<f64> {
        Ok(u.dot(v))
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array> {
        if v.norm() == 0.0 {
            return Ok(x.clone());
        }
        Ok(orthonormalize(Self::geodesic(x, v)?))
    }

    fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        let xty = x.transpose() * y;
        let smin = singular_values(&xty)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if smin <= CUT_LOCUS {
            return Err(Error::domain(
                "grassmann log",
                format!("XᵀY is singular (σ_min = {smin:.3e})"),
            ));
        }
        let inv = xty
            .try_inverse()
            .ok_or(Error::domain("grassmann log", "XᵀY is not invertible"))?;
        let a = Self::horizontal(x, y) * inv;
        let u = &a * gram_eig(&a)?.apply(atanc_sqrt);
        Ok(Self::horizontal(x, &u))
    }

    fn dist(&self, x: &Array, y: &Array) -> Result<f64> {
        Ok(principal_angles(x, y)
            .iter()
            .map(|t| t * t)
            .sum::<f64>()
            .sqrt())
    }

    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        let direction = self.log(x, y)?;
        let moved = self.transport_along(x, &direction, v)?;
        // the geodesic lands on a representative Y' = Y·O of [Y]; re-express at Y
        let landing = Self::geodesic(x, &direction)?;
        let w = moved * (landing.transpose() * y);
        Ok(Self::horizontal(y, &w))
    }

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        Ok(Self::horizontal(x, g))
    }

    fn project_tangent(&self, x: &Array, z: &Array) -> Result<Array> {
        Ok(Self::horizontal(x, z))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Array {
        orthonormalize(gaussian(self.m, self.r, rng))
    }

    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array> {
        Ok(Self::horizontal(x, &gaussian(self.m, self.r, rng)))
    }
}
