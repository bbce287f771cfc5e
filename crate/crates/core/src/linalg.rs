//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are vectorized by stacking their *rows*, so that
//! `vec(A X Bᵀ) = (A ⊗ B) vec(X)` with the ordinary Kronecker product. A map
//! `X ↦ V X V*` is then represented by `V ⊗ conj(V)`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
pub use num_complex::Complex64;
#[allow(unused_imports)] // float math for builds without std
use num_traits::Float as _;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Absolute and relative tolerances used by every validation routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Result<Self> {
        if !(atol >= 0.0 && rtol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerances must be non-negative (atol {atol}, rtol {rtol})")));
        }
        Ok(Self { atol, rtol })
    }

    /// Same value for both components.
    pub fn uniform(tol: f64) -> Result<Self> {
        Self::new(tol, tol)
    }

    /// `atol + rtol * scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn from_real(m: &RealMatrix) -> ComplexMatrix {
    m.map(re)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Frobenius norm.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &ComplexMatrix) -> f64 {
    m.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} has non-finite entries")))
    }
}

/// `(X + X*) / 2`.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::Dimension(format!("{what} must be square, got {}x{}", m.nrows(), m.ncols())))
    }
}

/// Exact integer square root, if `len` is a perfect square.
pub fn perfect_sqrt(len: usize) -> Option<usize> {
    let mut r = (len as f64).sqrt() as usize;
    while r * r > len {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= len {
        r += 1;
    }
    (r * r == len).then_some(r)
}

/// Row-stacking vectorization of a square matrix.
pub fn vec(a: &ComplexMatrix) -> Result<ComplexVector> {
    let n = ensure_square(a, "vec input")?;
    Ok(ComplexVector::from_fn(n * n, |k, _| a[(k / n, k % n)]))
}

/// Inverse of [`vec`].
pub fn unvec(v: &ComplexVector) -> Result<ComplexMatrix> {
    let n = perfect_sqrt(v.len())
        .ok_or_else(|| Error::Dimension(format!("vector length {} is not a perfect square", v.len())))?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| v[i * n + j]))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Hilbert–Schmidt inner product `Tr(B* A)`, conjugate-linear in `b`.
pub fn hs_inner(b: &ComplexMatrix, a: &ComplexMatrix) -> Result<Complex64> {
    let n = ensure_square(a, "hs_inner argument")?;
    if b.shape() != (n, n) {
        return Err(Error::Dimension(format!("hs_inner shapes differ: {:?} vs {:?}", b.shape(), a.shape())));
    }
    Ok(b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Orthonormal basis of the eigenvalue-1 eigenspace of `m`.
///
/// Computed as the numerical null space of `m - I` from its singular value
/// decomposition; a right singular vector is kept when its singular value
/// (which equals the residual `‖(M - I)v‖`) is at most `atol + rtol‖M‖_F`.
pub fn fixed_space(m: &ComplexMatrix, tol: &Tolerance) -> Vec<ComplexVector> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Vec::new();
    }
    let threshold = tol.threshold(frobenius(m));
    let shifted = m - identity(n);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= threshold)
        .map(|(k, _)| v_t.row(k).adjoint().into_owned())
        .collect()
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub psd: bool,
    pub hermitian: bool,
    pub min_eigenvalue: f64,
}

impl PsdCheck {
    /// Strict positivity: PSD with smallest eigenvalue above `atol`.
    pub fn strictly_positive(&self, tol: &Tolerance) -> bool {
        self.psd && self.min_eigenvalue > tol.atol
    }
}

/// Hermitian eigenvalues of `(X + X*)/2`, ascending.
pub fn hermitian_eigenvalues(x: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(hermitize(x)).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

pub fn is_psd(x: &ComplexMatrix, tol: &Tolerance) -> PsdCheck {
    if x.nrows() != x.ncols() || x.nrows() == 0 {
        return PsdCheck { psd: false, hermitian: false, min_eigenvalue: f64::NAN };
    }
    let skew = frobenius(&(x - x.adjoint())) * 0.5;
    let hermitian = skew <= tol.threshold(frobenius(x));
    let min_eigenvalue = hermitian_eigenvalues(x).first().copied().unwrap_or(f64::NAN);
    PsdCheck { psd: hermitian && min_eigenvalue >= -tol.atol, hermitian, min_eigenvalue }
}

/// Eigenvalues of a general square matrix via the complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Option<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 100_000)?;
    let (_, t) = schur.unpack();
    Some(t.diagonal().iter().copied().collect())
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    match eigenvalues(m) {
        Some(values) => values.iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => gelfand_estimate(m),
    }
}

// ‖M^(2^k)‖^(1/2^k); only used when the QR iteration fails to converge.
fn gelfand_estimate(m: &ComplexMatrix) -> f64 {
    let mut power = m.clone();
    let mut log_scale = 0.0;
    let mut exponent = 1.0;
    for _ in 0..10 {
        let norm = frobenius(&power);
        if norm == 0.0 {
            return 0.0;
        }
        log_scale += norm.ln() / exponent;
        power = power.unscale(norm);
        power = &power * &power;
        exponent *= 2.0;
    }
    (log_scale + frobenius(&power).ln() / exponent).exp()
}

/// An LU factorization with a 1-norm condition number of the factored matrix.
pub(crate) struct Factorized {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    pub condition: f64,
}

/// Largest condition estimate accepted before a solve is declared singular.
pub const MAX_CONDITION: f64 = 1e13;

impl Factorized {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = ensure_square(a, "system matrix")?;
        let lu = a.clone().lu();
        let inverse = lu.try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })?;
        let condition = norm1(a) * norm1(&inverse);
        if !condition.is_finite() || condition > MAX_CONDITION || !is_finite(&inverse) {
            return Err(Error::Singular { condition });
        }
        debug_assert_eq!(inverse.nrows(), n);
        Ok(Self { lu, condition })
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        self.lu.solve(b).expect("factorization checked invertible")
    }
}

/// `A⁻¹` by LU solve against the identity, plus its 1-norm condition number.
pub fn inverse_with_condition(a: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let f = Factorized::new(a)?;
    let inverse = f.solve(&identity(a.nrows()));
    Ok((inverse, f.condition))
}
