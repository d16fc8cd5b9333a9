//! Geometries: hypersphere, Poincaré ball, Lorentz hyperboloid, Grassmann,
//! and SPD matrices under the affine-invariant and Log-Euclidean metrics.

mod grassmann;
mod hyperbolic;
mod sphere;
mod spd;

pub use grassmann::{principal_angles, Grassmann};
pub(crate) use grassmann::orthonormalize;
pub use hyperbolic::{gyration, lorentz_inner, mobius_add, poincare_to_lorentz, Lorentz, PoincareBall};
pub use sphere::Hypersphere;
pub use spd::{SpdAffineInvariant, SpdLogEuclidean};

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::manifold::{Array, Manifold};

/// Geometry selector used by front ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    Hypersphere,
    Lorentz,
    Poincare,
    Grassmann,
    SpdAffineInvariant,
    SpdLogEuclidean,
}

impl GeometryKind {
    pub const ALL: [GeometryKind; 6] = [
        GeometryKind::Hypersphere,
        GeometryKind::Lorentz,
        GeometryKind::Poincare,
        GeometryKind::Grassmann,
        GeometryKind::SpdAffineInvariant,
        GeometryKind::SpdLogEuclidean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::Hypersphere => "hypersphere",
            GeometryKind::Lorentz => "lorentz",
            GeometryKind::Poincare => "poincare",
            GeometryKind::Grassmann => "grassmann",
            GeometryKind::SpdAffineInvariant => "spd-ai",
            GeometryKind::SpdLogEuclidean => "spd-le",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        GeometryKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Builds the geometry. `rows` is d (vectors), m (SPD) or m (Grassmann);
    /// `cols` is r for Grassmann and ignored otherwise.
    pub fn build(self, rows: usize, cols: usize) -> Result<Arc<dyn Manifold>> {
        Ok(match self {
            GeometryKind::Hypersphere => Arc::new(Hypersphere::new(rows)?),
            GeometryKind::Lorentz => Arc::new(Lorentz::new(rows)?),
            GeometryKind::Poincare => Arc::new(PoincareBall::new(rows)?),
            GeometryKind::Grassmann => Arc::new(Grassmann::new(rows, cols)?),
            GeometryKind::SpdAffineInvariant => Arc::new(SpdAffineInvariant::new(rows)?),
            GeometryKind::SpdLogEuclidean => Arc::new(SpdLogEuclidean::new(rows)?),
        })
    }
}

pub(crate) fn gaussian(rows: usize, cols: usize, rng: &mut dyn RngCore) -> Array {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Symmetric matrix whose free coordinates (diagonal, and off-diagonal
/// scaled by √2) are i.i.d. standard normal, i.e. a standard Gaussian in
/// the Frobenius geometry of symmetric matrices.
pub(crate) fn sym_gaussian(m: usize, rng: &mut dyn RngCore) -> Array {
    let mut s = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let z: f64 = StandardNormal.sample(rng);
            if i == j {
                s[(i, i)] = z;
            } else {
                let z = z * std::f64::consts::FRAC_1_SQRT_2;
                s[(i, j)] = z;
                s[(j, i)] = z;
            }
        }
    }
    s
}

pub(crate) fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}
