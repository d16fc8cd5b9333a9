//! Principal component analysis as minimization over the Grassmann manifold:
//! `min_U (1/n) Σ_i ‖z_i − U Uᵀ z_i‖²`.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::geometry::{gaussian, orthonormalize};
use crate::manifold::Array;
use crate::ops::CostFn;

/// Reconstruction error of one sample `z` (a `d × 1` column).
#[derive(Debug, Clone, Copy, Default)]
pub struct PcaCost;

impl CostFn for PcaCost {
    type Datum = Array;

    fn evaluate(&self, u: &Array, z: &Array) -> f64 {
        (z - u * (u.transpose() * z)).norm_squared()
    }

    /// `−2 (r zᵀU + z rᵀU)` with `r = z − UUᵀz`: the gradient over all `d × r`
    /// matrices, not only orthonormal ones.
    fn euclidean_grad(&self, u: &Array, z: &Array) -> Option<Array> {
        let r = z - u * (u.transpose() * z);
        let zu = z.transpose() * u;
        let ru = r.transpose() * u;
        Some((&r * zu + z * ru) * -2.0)
    }
}

/// Splits an `n × d` sample matrix into `d × 1` columns.
pub fn rows_as_samples(data: &DMatrix<f64>) -> Vec<Array> {
    (0..data.nrows())
        .map(|i| DMatrix::from_iterator(data.ncols(), 1, data.row(i).iter().copied()))
        .collect()
}

/// Spectrum `λ_k = top · decay^(k−1)`, k = 1..=d.
pub fn spectrum(d: usize, decay: f64, top: f64) -> DVector<f64> {
    DVector::from_fn(d, |k, _| top * decay.powi(k as i32))
}

/// Synthetic samples whose second-moment matrix `(1/n) ZᵀZ` equals
/// `V diag(λ) Vᵀ` exactly for a random orthogonal `V`.
#[derive(Debug, Clone)]
pub struct SyntheticPca {
    /// `n × d`, one sample per row.
    pub data: DMatrix<f64>,
    /// Columns are the principal directions, by decreasing variance.
    pub directions: DMatrix<f64>,
    pub spectrum: DVector<f64>,
}

pub fn synthetic(
    n: usize,
    d: usize,
    decay: f64,
    top: f64,
    rng: &mut dyn RngCore,
) -> Result<SyntheticPca> {
    if d < 2 || n < d {
        return Err(Error::invalid(format!("synthetic PCA needs n >= d >= 2, got n={n}, d={d}")));
    }
    if !(decay > 0.0 && decay <= 1.0) || !(top > 0.0) {
        return Err(Error::invalid(format!(
            "spectral decay must be in (0, 1] and top variance > 0 (got {decay}, {top})"
        )));
    }
    let q = orthonormalize(gaussian(n, d, rng));
    let v = orthonormalize(gaussian(d, d, rng));
    let lam = spectrum(d, decay, top);
    let scale = DMatrix::from_diagonal(&lam.map(|l| (n as f64 * l).sqrt()));
    Ok(SyntheticPca {
        data: q * scale * v.transpose(),
        directions: v,
        spectrum: lam,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::ops::finite_diff_egrad;

    #[test]
    fn cost_on_and_off_subspace() {
        let u = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let on = DMatrix::from_column_slice(3, 1, &[2.0, 0.0, 0.0]);
        let off = DMatrix::from_column_slice(3, 1, &[0.0, 3.0, 4.0]);
        assert_eq!(PcaCost.evaluate(&u, &on), 0.0);
        assert_eq!(PcaCost.evaluate(&u, &off), 25.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = gaussian(6, 2, &mut rng);
        let z = gaussian(6, 1, &mut rng);
        let g = PcaCost.euclidean_grad(&u, &z).unwrap();
        let fd = finite_diff_egrad(&PcaCost, &u, &z, Some(1e-6)).unwrap();
        assert!((g - fd).norm() < 1e-6);
    }

    #[test]
    fn synthetic_second_moment_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = synthetic(40, 6, 0.5, 10.0, &mut rng).unwrap();
        let c = s.data.transpose() * &s.data / 40.0;
        let target = &s.directions * DMatrix::from_diagonal(&s.spectrum) * s.directions.transpose();
        assert!((c - target).norm() < 1e-10);
        assert!(synthetic(4, 6, 0.5, 1.0, &mut rng).is_err());
    }
}
