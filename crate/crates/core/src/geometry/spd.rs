//! Symmetric positive definite matrices `SPD(m)`.
//!
//! Both metrics route every matrix function through one symmetric
//! eigendecomposition per input matrix.

use rand::RngCore;

use super::{require, sym_gaussian};
use crate::error::{Error, Result};
use crate::linalg::{sym, sym_eig, DerivFn, MatrixFn, SymEig};
use crate::manifold::{check_shape, Array, Manifold, Tolerances};

/// Symmetry tolerance for SPD points.
const SYMMETRY_TOL: f64 = 1e-10;

fn asymmetry(x: &Array) -> f64 {
    (x - x.transpose()).norm() / (1.0 + x.norm())
}

fn check_spd(name: &str, shape: (usize, usize), x: &Array) -> Result<()> {
    check_shape(shape, x)?;
    let residual = asymmetry(x);
    if residual > SYMMETRY_TOL {
        return Err(Error::InvalidPoint {
            manifold: name.to_string(),
            residual,
            tol: SYMMETRY_TOL,
        });
    }
    sym_eig(x)?.ensure_positive()
}

/// Random SPD matrix `expm(S)` with spectrum roughly inside `[e⁻¹, e]`.
fn random_spd(m: usize, rng: &mut dyn RngCore) -> Array {
    let s = sym_gaussian(m, rng) * (0.5 / (m as f64).sqrt());
    let e = sym_eig(&s).expect("finite gaussian");
    e.map(MatrixFn::Exp).expect("exp has no domain restriction")
}

/// Eigendecomposition of `logm(X)` reusing the eigenvectors of `X`.
fn log_spectrum(e: &SymEig) -> Result<SymEig> {
    e.ensure_positive()?;
    Ok(SymEig {
        eigenvalues: e.eigenvalues.map(f64::ln),
        eigenvectors: e.eigenvectors.clone(),
    })
}

/// `X^{1/2}`, `X^{-1/2}` from one decomposition.
fn sqrt_pair(x: &Array) -> Result<(Array, Array)> {
    let e = sym_eig(x)?;
    Ok((e.map(MatrixFn::Sqrt)?, e.map(MatrixFn::InvSqrt)?))
}

fn whiten(isqrt: &Array, y: &Array) -> Array {
    sym(&(isqrt * y * isqrt))
}

/// SPD(m) with `⟨U, V⟩_X = tr(X⁻¹UX⁻¹V)`.
#[derive(Debug, Clone)]
pub struct SpdAffineInvariant {
    m: usize,
    tol: Tolerances,
}

impl SpdAffineInvariant {
    pub fn new(m: usize) -> Result<Self> {
        require(m >= 1, "spd needs m >= 1")?;
        Ok(SpdAffineInvariant {
            m,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }
}

impl Manifold for SpdAffineInvariant {
    fn name(&self) -> &str {
        "spd-ai"
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.m, self.m)
    }

    fn intrinsic_dim(&self) -> usize {
        self.m * (self.m + 1) / 2
    }

    fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn point_residual(&self, x: &Array) -> f64 {
        asymmetry(x)
    }

    fn check_point(&self, x: &Array) -> Result<()> {
        check_spd(self.name(), self.ambient_shape(), x)
    }

    fn tangent_residual(&self, _x: &Array, v: &Array) -> f64 {
        asymmetry(v)
    }

    fn inner(&self, x: &Array, u: &Array, v: &Array) -> Result<f64> {
        let isqrt = sym_eig(x)?.map(MatrixFn::InvSqrt)?;
        let su = whiten(&isqrt, u);
        let sv = whiten(&isqrt, v);
        Ok(su.dot(&sv))
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array> {
        let (sqrt, isqrt) = sqrt_pair(x)?;
        let e = sym_eig(&whiten(&isqrt, v))?.map(MatrixFn::Exp)?;
        Ok(sym(&(&sqrt * e * &sqrt)))
    }

    fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        let (sqrt, isqrt) = sqrt_pair(x)?;
        let l = sym_eig(&whiten(&isqrt, y))?.map(MatrixFn::Log)?;
        Ok(sym(&(&sqrt * l * &sqrt)))
    }

    fn dist(&self, x: &Array, y: &Array) -> Result<f64> {
        let isqrt = sym_eig(x)?.map(MatrixFn::InvSqrt)?;
        let e = sym_eig(&whiten(&isqrt, y))?;
        e.ensure_positive()?;
        Ok(e.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
    }

    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        let (sqrt, isqrt) = sqrt_pair(x)?;
        let half = sym_eig(&whiten(&isqrt, y))?.map(MatrixFn::Pow(0.5))?;
        let e = &sqrt * half * &isqrt;
        Ok(sym(&(&e * v * e.transpose())))
    }

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        Ok(sym(&(x * sym(g) * x)))
    }

    fn project_tangent(&self, _x: &Array, z: &Array) -> Result<Array> {
        Ok(sym(z))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Array {
        random_spd(self.m, rng)
    }

    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array> {
        let sqrt = sym_eig(x)?.map(MatrixFn::Sqrt)?;
        Ok(sym(&(&sqrt * sym_gaussian(self.m, rng) * &sqrt)))
    }
}

/// SPD(m) with `⟨U, V⟩_X = tr(D_U logm(X) · D_V logm(X))`.
#[derive(Debug, Clone)]
pub struct SpdLogEuclidean {
    m: usize,
    tol: Tolerances,
}

impl SpdLogEuclidean {
    pub fn new(m: usize) -> Result<Self> {
        require(m >= 1, "spd needs m >= 1")?;
        Ok(SpdLogEuclidean {
            m,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }
}

impl Manifold for SpdLogEuclidean {
    fn name(&self) -> &str {
        "spd-le"
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.m, self.m)
    }

    fn intrinsic_dim(&self) -> usize {
        self.m * (self.m + 1) / 2
    }

    fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn point_residual(&self, x: &Array) -> f64 {
        asymmetry(x)
    }

    fn check_point(&self, x: &Array) -> Result<()> {
        check_spd(self.name(), self.ambient_shape(), x)
    }

    fn tangent_residual(&self, _x: &Array, v: &Array) -> f64 {
        asymmetry(v)
    }

    fn inner(&self, x: &Array, u: &Array, v: &Array) -> Result<f64> {
        let e = sym_eig(x)?;
        let du = e.dfun(u, DerivFn::Log)?;
        let dv = e.dfun(v, DerivFn::Log)?;
        Ok(du.dot(&dv))
    }

    fn exp(&self, x: &Array, v: &Array) -> Result<Array> {
        let e = sym_eig(x)?;
        let l = e.map(MatrixFn::Log)? + e.dfun(v, DerivFn::Log)?;
        sym_eig(&l)?.map(MatrixFn::Exp)
    }

    fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        let ex = sym_eig(x)?;
        let diff = sym_eig(y)?.map(MatrixFn::Log)? - ex.map(MatrixFn::Log)?;
        log_spectrum(&ex)?.dfun(&diff, DerivFn::Exp)
    }

    fn dist(&self, x: &Array, y: &Array) -> Result<f64> {
        let lx = sym_eig(x)?.map(MatrixFn::Log)?;
        let ly = sym_eig(y)?.map(MatrixFn::Log)?;
        Ok((lx - ly).norm())
    }

    fn transport(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        let flat = sym_eig(x)?.dfun(v, DerivFn::Log)?;
        log_spectrum(&sym_eig(y)?)?.dfun(&flat, DerivFn::Exp)
    }

    fn egrad_to_rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        let lx = log_spectrum(&sym_eig(x)?)?;
        let once = lx.dfun(&sym(g), DerivFn::Exp)?;
        lx.dfun(&once, DerivFn::Exp)
    }

    fn project_tangent(&self, _x: &Array, z: &Array) -> Result<Array> {
        Ok(sym(z))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Array {
        random_spd(self.m, rng)
    }

    fn random_tangent(&self, x: &Array, rng: &mut dyn RngCore) -> Result<Array> {
        log_spectrum(&sym_eig(x)?)?.dfun(&sym_gaussian(self.m, rng), DerivFn::Exp)
    }
}
