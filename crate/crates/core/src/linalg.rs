//! Symmetric spectral kernels.
//!
//! Every matrix function used by the SPD geometries goes through a single
//! symmetric eigendecomposition: `f(A) = Q f(Λ) Qᵀ`, and directional
//! derivatives use the Daleckii–Krein divided-difference form
//! `Df(A)[U] = Q (Γ ∘ QᵀUQ) Qᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues at or below this floor are treated as not positive definite.
pub const EPS_SPD: f64 = 1e-12;

/// Relative gap under which two eigenvalues share the derivative limit.
pub const DEGENERATE_GAP: f64 = 1e-10;

/// Eigendecomposition of a symmetric matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Scalar functions that can be lifted to symmetric matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFn {
    Exp,
    Log,
    Sqrt,
    InvSqrt,
    Pow(f64),
}

impl MatrixFn {
    fn needs_positive(self) -> bool {
        !matches!(self, MatrixFn::Exp)
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            MatrixFn::Exp => x.exp(),
            MatrixFn::Log => x.ln(),
            MatrixFn::Sqrt => x.sqrt(),
            MatrixFn::InvSqrt => 1.0 / x.sqrt(),
            MatrixFn::Pow(t) => x.powf(t),
        }
    }
}

/// Functions whose Fréchet derivative is available through [`dfun_sym`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivFn {
    Exp,
    Log,
}

/// `(A + Aᵀ) / 2`.
pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

fn check_finite(a: &DMatrix<f64>, op: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericFailure { op })
    }
}

/// Eigendecomposition of `A`, symmetrized first. Eigenvalues ascend.
pub fn sym_eig(a: &DMatrix<f64>) -> Result<SymEig> {
    if !a.is_square() {
        return Err(Error::Shape {
            expected: (a.nrows(), a.nrows()),
            got: a.shape(),
        });
    }
    check_finite(a, "sym_eig")?;
    let eig = SymmetricEigen::new(sym(a));
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if !eigenvalues.iter().all(|x| x.is_finite()) {
        return Err(Error::NumericFailure { op: "sym_eig" });
    }
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

impl SymEig {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Q diag(values) Qᵀ`, symmetric by construction.
    pub fn reconstruct_with(&self, values: &DVector<f64>) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= values[j];
        }
        sym(&(scaled * q.transpose()))
    }

    pub fn ensure_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min > EPS_SPD {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            })
        }
    }

    /// `Q f(Λ) Qᵀ`.
    pub fn map(&self, f: MatrixFn) -> Result<DMatrix<f64>> {
        if f.needs_positive() {
            self.ensure_positive()?;
        }
        let values = self.eigenvalues.map(|x| f.eval(x));
        let out = self.reconstruct_with(&values);
        check_finite(&out, "spd_fun")?;
        Ok(out)
    }

    /// Daleckii–Krein derivative of `f` at this matrix along symmetric `u`.
    pub fn dfun(&self, u: &DMatrix<f64>, f: DerivFn) -> Result<DMatrix<f64>> {
        if f == DerivFn::Log {
            self.ensure_positive()?;
        }
        let q = &self.eigenvectors;
        let lam = &self.eigenvalues;
        let mut inner = q.transpose() * sym(u) * q;
        let n = lam.len();
        for j in 0..n {
            for i in 0..n {
                inner[(i, j)] *= divided_difference(f, lam[i], lam[j]);
            }
        }
        let out = sym(&(q * inner * q.transpose()));
        check_finite(&out, "dfun_sym")?;
        Ok(out)
    }
}

/// First divided difference `(f(a) - f(b)) / (a - b)` with the derivative
/// limit on (near-)coincident arguments.
fn divided_difference(f: DerivFn, a: f64, b: f64) -> f64 {
    let gap = a - b;
    if gap.abs() < DEGENERATE_GAP * a.abs().max(1.0) {
        let mid = 0.5 * (a + b);
        return match f {
            DerivFn::Exp => mid.exp(),
            DerivFn::Log => 1.0 / mid,
        };
    }
    match f {
        // e^b (e^{a-b} - 1) / (a - b)
        DerivFn::Exp => b.exp() * gap.exp_m1() / gap,
        // ln(1 + (a-b)/b) / (a - b)
        DerivFn::Log => (gap / b).ln_1p() / gap,
    }
}

/// `f(A)` for symmetric `A`; log, sqrt, inverse sqrt and powers require SPD input.
pub fn spd_fun(a: &DMatrix<f64>, f: MatrixFn) -> Result<DMatrix<f64>> {
    sym_eig(a)?.map(f)
}

/// Directional derivative `Df(A)[U]` of the spectral function `f` at `A`.
pub fn dfun_sym(a: &DMatrix<f64>, u: &DMatrix<f64>, f: DerivFn) -> Result<DMatrix<f64>> {
    sym_eig(a)?.dfun(u, f)
}

/// Frobenius inner product `tr(AᵀB)`.
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
        sym(&a)
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
        &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let e = sym_eig(&DMatrix::identity(4, 4)).unwrap();
        assert!(e.eigenvalues.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let e = sym_eig(&d).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn eig_reconstructs_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_sym(5, &mut rng);
        let e = sym_eig(&a).unwrap();
        let back = e.reconstruct_with(&e.eigenvalues);
        assert!((&back - &a).norm() / a.norm() < 1e-10);
        let qtq = e.eigenvectors.transpose() * &e.eigenvectors;
        assert!((qtq - DMatrix::identity(5, 5)).norm() < 1e-12);
        assert!(e.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(
            sym_eig(&a),
            Err(Error::NumericFailure { op: "sym_eig" })
        ));
    }

    #[test]
    fn spd_fun_closed_forms() {
        let z = spd_fun(&DMatrix::identity(3, 3), MatrixFn::Log).unwrap();
        assert!(z.norm() < 1e-15);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2f64.ln()]));
        let e = spd_fun(&d, MatrixFn::Exp).unwrap();
        assert!((e[(0, 0)] - 1.0).abs() < 1e-14 && (e[(1, 1)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_spd(6, &mut rng);
        let s = spd_fun(&a, MatrixFn::Sqrt).unwrap();
        assert!((&s * &s - &a).norm() / a.norm() < 1e-10);
        let is = spd_fun(&a, MatrixFn::InvSqrt).unwrap();
        assert!((&s * &is - DMatrix::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(5, &mut rng);
        let l = spd_fun(&a, MatrixFn::Log).unwrap();
        let back = spd_fun(&l, MatrixFn::Exp).unwrap();
        assert!((back - &a).norm() / a.norm() < 1e-10);
    }

    #[test]
    fn log_of_indefinite_reports_min_eigenvalue() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        match spd_fun(&d, MatrixFn::Log) {
            Err(Error::NotPositiveDefinite { min_eigenvalue }) => {
                assert_eq!(min_eigenvalue, -0.5)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn derivative_at_identity_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_sym(4, &mut rng);
        let i = DMatrix::identity(4, 4);
        let dl = dfun_sym(&i, &u, DerivFn::Log).unwrap();
        assert!((&dl - &u).norm() < 1e-14);
        let de = dfun_sym(&DMatrix::zeros(4, 4), &u, DerivFn::Exp).unwrap();
        assert!((&de - &u).norm() < 1e-14);
        // exp at I has Γ ≡ e
        let de_i = dfun_sym(&i, &u, DerivFn::Exp).unwrap();
        assert!((de_i - &u * std::f64::consts::E).norm() < 1e-13);
    }

    #[test]
    fn log_derivative_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_spd(5, &mut rng);
        let u = random_sym(5, &mut rng);
        let h = 1e-5;
        let fd = (spd_fun(&(&a + &u * h), MatrixFn::Log).unwrap()
            - spd_fun(&(&a - &u * h), MatrixFn::Log).unwrap())
            / (2.0 * h);
        let dk = dfun_sym(&a, &u, DerivFn::Log).unwrap();
        assert!((fd - dk).norm() < 1e-5);
    }

    #[test]
    fn inverse_function_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a = random_spd(5, &mut rng);
            let mut u = random_sym(5, &mut rng);
            u *= 0.1 * a.norm() / u.norm();
            let l = spd_fun(&a, MatrixFn::Log).unwrap();
            let dl = dfun_sym(&a, &u, DerivFn::Log).unwrap();
            let back = dfun_sym(&l, &dl, DerivFn::Exp).unwrap();
            assert!((back - &u).norm() < 1e-8);
        }
    }

    #[test]
    fn degenerate_spectrum_uses_derivative_limit() {
        // eigenvalues 2, 2+1e-13: the pair falls under the degenerate threshold
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0 + 1e-13]));
        let u = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let dl = dfun_sym(&d, &u, DerivFn::Log).unwrap();
        assert!((dl[(0, 1)] - 0.5).abs() < 1e-12);
    }
}
