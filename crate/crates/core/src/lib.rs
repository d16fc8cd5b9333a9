//! Riemannian optimization over six geometries: hypersphere, Poincaré ball,
//! Lorentz hyperboloid, Grassmann, and SPD matrices under the affine-invariant
//! and Log-Euclidean metrics.
//!
//! Points and tangents are `DMatrix<f64>` values (vectors are columns) wrapped
//! in [`ManifoldPoint`] / [`TangentVector`], which carry their geometry and are
//! validated on construction. Optimizers are chains of
//! [`optim::GradientTransformation`]s driven by [`optim::fit`].

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod manifold;
pub mod ops;
pub mod optim;
pub mod pca;
pub mod privacy;

pub use error::{Error, Result};
pub use manifold::{Array, Manifold, ManifoldPoint, TangentVector, Tolerances};
