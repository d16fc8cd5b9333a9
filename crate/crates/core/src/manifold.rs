//! The manifold contract and the manifold-tagged point and tangent types.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::RngCore;

use crate::error::{Error, Result};

/// Dense ambient array. Vector-valued geometries use `d × 1` columns.
pub type Array = DMatrix<f64>;

/// Validation tolerances for points and tangents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub point: f64,
    pub tangent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            point: 1e-9,
            tangent: 1e-8,
        }
    }
}

/// A Riemannian manifold with its full set of primitives.
///
/// Primitives take raw ambient arrays and do not re-validate their inputs;
/// [`ManifoldPoint`] and [`TangentVector`] carry validity.
pub trait Manifold: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// `(rows, cols)` of the ambient representation.
    fn ambient_shape(&self) -> (usize, usize);

    fn intrinsic_dim(&self) -> usize;

    fn tolerances(&self) -> Tolerances {
        Tolerances::default()
    }

    /// Constraint residual of a candidate point.
    fn point_residual(&self, x: &Array) -> f64;

    /// Constraint residual of a candidate tangent at `x`, relative to `1 + |v|`.
    fn tangent_residual(&self, x: &Array, v: &Array) -> f64;

    /// Maps a nearly-valid array onto a representable point (e.g. boundary clamping).
    fn canonicalize(&self, x: Array) -> Array {
        x
    }

    fn check_point(&self, x: &Array) -> Result<()> {
        check_shape(self.ambient_shape(), x)?;
        let residual = self.point_residual(x);
        let tol = self.tolerances().point;
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::InvalidPoint {
                manifold: self.name().to_string(),
                residual,
                tol,
            })
        }
    }

    fn check_tangent(&self, x: &Array, v: &Array) -> Result<()> {
        check_shape(self.ambient_shape(), v)?;
        if !v.iter().all(|e| e.is_finite()) {
            return Err(Error::NumericFailure { op: "check_tangent" });
        }
        let residual = self.tangent_residual(x, v);
        let tol = self.tolerances().tangent;
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::InvalidTangent {
                manifold: self.name().to_string(),
                residual,
                tol,
            })
        }
    }

    /// Riemannian inner product `⟨u, v⟩_x`.
    fn inner(&self, x: &Array, u: &Array, v: &Array) -> Result<f64>;

    /// Inner product that first validates both tangents.
    fn checked_inner(&self, x: &Array, u: &Array, v: &Array) -> Result<f64> {
        self.check_tangent(x, u)?;
        self.check_tangent(x, v)?;
        self.inner(x, u, v)
    }

    fn norm(&self, x: &Array, v: &Array) -> Result<f64> {
        Ok(self.inner(x, v, v)?.max(0.0).sqrt())
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array>;

    fn log(&self, x: &Array, y: &Array) -> Result<Array>;

    fn dist(&self, x: &Array, y: &Array) -> Result<f64>;

    /// Parallel transport of `v` from `x` to `y` along the minimizing geodesic.
    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array>;

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array>;

    /// Euclidean-orthogonal projection of an ambient array onto `T_x M`.
    fn project_tangent(&self, x: &Array, z: &Array) -> Result<Array>;

    fn random_point(&self, rng: &mut dyn RngCore) -> Array;

    /// Standard Gaussian on `T_x M` with respect to the metric at `x`:
    /// isotropic, with `E‖ξ‖²_x = intrinsic_dim`.
    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array>;
}

pub(crate) fn check_shape(expected: (usize, usize), a: &Array) -> Result<()> {
    if a.shape() == expected {
        Ok(())
    } else {
        Err(Error::Shape {
            expected,
            got: a.shape(),
        })
    }
}

fn same_manifold(a: &Arc<dyn Manifold>, b: &Arc<dyn Manifold>) -> bool {
    Arc::ptr_eq(a, b) || (a.name() == b.name() && a.ambient_shape() == b.ambient_shape())
}

/// An array known to lie on its manifold.
#[derive(Clone)]
pub struct ManifoldPoint {
    value: Array,
    manifold: Arc<dyn Manifold>,
}

impl fmt::Debug for ManifoldPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManifoldPoint")
            .field("manifold", &self.manifold.name())
            .field("value", &self.value)
            .finish()
    }
}

impl ManifoldPoint {
    /// Validates `value` on `manifold` after canonicalization.
    pub fn new(manifold: Arc<dyn Manifold>, value: Array) -> Result<Self> {
        check_shape(manifold.ambient_shape(), &value)?;
        let value = manifold.canonicalize(value);
        manifold.check_point(&value)?;
        Ok(ManifoldPoint { value, manifold })
    }

    pub fn random(manifold: Arc<dyn Manifold>, rng: &mut dyn RngCore) -> Self {
        let value = manifold.random_point(rng);
        ManifoldPoint { value, manifold }
    }

    pub fn value(&self) -> &Array {
        &self.value
    }

    pub fn into_value(self) -> Array {
        self.value
    }

    pub fn manifold(&self) -> &Arc<dyn Manifold> {
        &self.manifold
    }

    pub(crate) fn sibling(&self, value: Array) -> Result<Self> {
        ManifoldPoint::new(self.manifold.clone(), value)
    }

    fn ensure_same(&self, other: &ManifoldPoint) -> Result<()> {
        if same_manifold(&self.manifold, &other.manifold) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "points live on different manifolds ({} vs {})",
                self.manifold.name(),
                other.manifold.name()
            )))
        }
    }

    /// Wraps an ambient array as a tangent at this point after validation.
    pub fn tangent(&self, value: Array) -> Result<TangentVector> {
        self.manifold.check_tangent(&self.value, &value)?;
        Ok(TangentVector {
            value,
            base: self.clone(),
        })
    }

    pub(crate) fn tangent_unchecked(&self, value: Array) -> TangentVector {
        TangentVector {
            value,
            base: self.clone(),
        }
    }

    pub fn zero_tangent(&self) -> TangentVector {
        let (r, c) = self.manifold.ambient_shape();
        self.tangent_unchecked(Array::zeros(r, c))
    }

    /// Projects an ambient array onto the tangent space here.
    pub fn project(&self, z: &Array) -> Result<TangentVector> {
        check_shape(self.manifold.ambient_shape(), z)?;
        let v = self.manifold.project_tangent(&self.value, z)?;
        Ok(self.tangent_unchecked(v))
    }

    pub fn random_tangent(&self, rng: &mut dyn RngCore) -> Result<TangentVector> {
        let v = self.manifold.random_tangent(&self.value, rng)?;
        Ok(self.tangent_unchecked(v))
    }

    pub fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        self.ensure_same(&v.base)?;
        self.sibling(self.manifold.exp(&self.value, &v.value)?)
    }

    pub fn log(&self, other: &ManifoldPoint) -> Result<TangentVector> {
        self.ensure_same(other)?;
        let v = self.manifold.log(&self.value, &other.value)?;
        self.tangent(v)
    }

    pub fn dist(&self, other: &ManifoldPoint) -> Result<f64> {
        self.ensure_same(other)?;
        self.manifold.dist(&self.value, &other.value)
    }

    pub fn egrad_to_rgrad(&self, g: &Array) -> Result<TangentVector> {
        check_shape(self.manifold.ambient_shape(), g)?;
        let v = self.manifold.egrad_to_rgrad(&self.value, g)?;
        self.tangent(v)
    }
}

/// An ambient array anchored at a base point, tangent there.
#[derive(Debug, Clone)]
pub struct TangentVector {
    value: Array,
    base: ManifoldPoint,
}

impl TangentVector {
    pub fn value(&self) -> &Array {
        &self.value
    }

    pub fn into_value(self) -> Array {
        self.value
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn manifold(&self) -> &Arc<dyn Manifold> {
        self.base.manifold()
    }

    pub fn norm(&self) -> Result<f64> {
        self.manifold().norm(self.base.value(), &self.value)
    }

    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        self.base.ensure_same(&other.base)?;
        self.manifold()
            .inner(self.base.value(), &self.value, &other.value)
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            value: &self.value * s,
            base: self.base.clone(),
        }
    }

    /// Sum of two tangents at the same base point.
    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        self.base.ensure_same(&other.base)?;
        Ok(TangentVector {
            value: &self.value + &other.value,
            base: self.base.clone(),
        })
    }

    pub fn sub(&self, other: &TangentVector) -> Result<TangentVector> {
        self.base.ensure_same(&other.base)?;
        Ok(TangentVector {
            value: &self.value - &other.value,
            base: self.base.clone(),
        })
    }

    /// Parallel transport to `target` along the minimizing geodesic.
    pub fn transport_to(&self, target: &ManifoldPoint) -> Result<TangentVector> {
        self.base.ensure_same(target)?;
        let v = self
            .manifold()
            .transport(self.base.value(), target.value(), &self.value)?;
        Ok(target.tangent_unchecked(v))
    }

    /// Re-anchors the ambient value at another base point without transport.
    pub(crate) fn rebase(self, base: ManifoldPoint) -> TangentVector {
        TangentVector {
            value: self.value,
            base,
        }
    }
}
