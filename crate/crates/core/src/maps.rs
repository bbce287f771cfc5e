//! Positive trace-preserving maps on `M_n` and their validation.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, ensure_finite, fixed_space, frobenius, hermitize, identity, is_psd, kron, re, trace, unvec, ComplexMatrix,
    ComplexVector, RealMatrix, Tolerance,
};

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates `m` as a state. The matrix is stored Hermitized.
    pub fn new(m: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        ensure_finite(&m, "density matrix")?;
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let check = is_psd(&m, tol);
        if !check.hermitian {
            return Err(Error::InvalidDensity("matrix is not Hermitian".into()));
        }
        let tr = trace(&m);
        if (tr - re(1.0)).norm() > tol.atol.max(1e-12) * m.nrows() as f64 {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        if !check.psd {
            return Err(Error::InvalidDensity(format!("minimum eigenvalue {:e} is negative", check.min_eigenvalue)));
        }
        Ok(Self(hermitize(&m)))
    }

    /// Hermitizes and trace-normalizes `m`, then validates it.
    pub fn normalized(m: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let h = hermitize(m);
        let tr = trace(&h).re;
        if !(tr.abs() > tol.atol) {
            return Err(Error::InvalidDensity("trace vanishes; cannot normalize".into()));
        }
        Self::new(h.unscale(tr), tol)
    }

    /// `|φ⟩⟨φ|` for `φ / ‖φ‖`.
    pub fn pure(phi: &ComplexVector) -> Result<Self> {
        let norm = phi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("pure state vector must be nonzero and finite".into()));
        }
        let unit = phi.unscale(norm);
        Ok(Self(&unit * unit.adjoint()))
    }

    /// `Σ xᵢ |i⟩⟨i|` for a probability vector `x`.
    pub fn diagonal(x: &[f64], tol: &Tolerance) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if let Some(i) = x.iter().position(|v| !(*v >= -tol.atol)) {
            return Err(Error::InvalidArgument(format!("distribution entry {i} is negative")));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > tol.atol.max(1e-12) * x.len() as f64 {
            return Err(Error::InvalidArgument(format!("distribution sums to {sum}, expected 1")));
        }
        let n = x.len();
        Ok(Self(ComplexMatrix::from_fn(n, n, |i, j| if i == j { re(x[i]) } else { re(0.0) })))
    }

    /// Basis state `|i⟩⟨i|` (0-based).
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidArgument(format!("state index {i} out of range for dimension {n}")));
        }
        let mut m = ComplexMatrix::zeros(n, n);
        m[(i, i)] = re(1.0);
        Ok(Self(m))
    }

    /// Wraps an already-valid state. Callers guarantee the invariants.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn vectorized(&self) -> ComplexVector {
        linalg::vec(&self.0).expect("density matrices are square")
    }
}

/// Where a superoperator representation came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Kraus(Vec<ComplexMatrix>),
    /// Column-stochastic transition matrix.
    Stochastic(RealMatrix),
    Raw,
}

/// The `n² × n²` matrix representation of a linear map on `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    rep: ComplexMatrix,
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    pub preserving: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpCheck {
    pub completely_positive: bool,
    pub min_choi_eigenvalue: f64,
}

/// Result of probing positivity on random pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledPositivity {
    pub samples: usize,
    pub violations: usize,
    pub worst_min_eigenvalue: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityVerdict {
    /// The Choi matrix is PSD.
    CompletelyPositive,
    /// Not CP; no violation found on random pure states. Positivity is not proven.
    PositiveBySampling,
    NotPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub verdict: PositivityVerdict,
    pub cp: CpCheck,
    pub sampled: Option<SampledPositivity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CertifiedIrreducible,
    NotIrreducible,
    Inconclusive,
}

/// Irreducibility evidence: a unique fixed point that is a strictly positive state.
#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibilityCertificate {
    pub invariant_state: Option<DensityMatrix>,
    pub fixed_space_dim: usize,
    pub min_eigenvalue_of_pi: f64,
    /// `‖Φ(π) − π‖_F`, NaN when no state was produced.
    pub fixed_point_residual: f64,
    pub verdict: Verdict,
}

impl IrreducibilityCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedIrreducible
    }

    pub fn require_certified(&self) -> Result<&DensityMatrix> {
        match (&self.verdict, &self.invariant_state) {
            (Verdict::CertifiedIrreducible, Some(pi)) => Ok(pi),
            (verdict, _) => Err(Error::NotIrreducible { verdict: *verdict }),
        }
    }
}

/// Default number of random pure states probed for positive-but-not-CP maps.
pub const DEFAULT_POSITIVITY_SAMPLES: usize = 1000;

impl SuperOperator {
    /// `⌈Φ⌉ = Σ Vᵢ ⊗ conj(Vᵢ)` for `Φ(X) = Σ Vᵢ X Vᵢ*`.
    pub fn from_kraus(kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus_ops.first().ok_or_else(|| Error::InvalidArgument("empty Kraus operator list".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::Dimension("Kraus operators must be non-empty".into()));
        }
        for (k, v) in kraus_ops.iter().enumerate() {
            if v.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "Kraus operator {k} has shape {:?}, expected ({n}, {n})",
                    v.shape()
                )));
            }
            ensure_finite(v, "Kraus operator")?;
        }
        let mut rep = ComplexMatrix::zeros(n * n, n * n);
        for v in &kraus_ops {
            rep += kron(v, &v.map(|z| z.conj()));
        }
        Ok(Self { dim: n, rep, provenance: Provenance::Kraus(kraus_ops) })
    }

    /// Embedding `Φ = Σ p_ij |i⟩⟨j| · |j⟩⟨i|` of a column-stochastic matrix.
    ///
    /// On diagonal matrices this acts as `x ↦ P x`; off-diagonal entries are
    /// annihilated.
    pub fn from_stochastic(p: &RealMatrix, tol: &Tolerance) -> Result<Self> {
        validate_column_stochastic(p, tol)?;
        let n = p.nrows();
        let mut rep = ComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                // vec(E_ii) has its single 1 at i*n + i
                rep[(i * n + i, j * n + j)] = re(p[(i, j)]);
            }
        }
        Ok(Self { dim: n, rep, provenance: Provenance::Stochastic(p.clone()) })
    }

    pub fn from_raw(rep: ComplexMatrix) -> Result<Self> {
        if rep.nrows() != rep.ncols() {
            return Err(Error::Dimension(format!("superoperator must be square, got {}x{}", rep.nrows(), rep.ncols())));
        }
        let n = linalg::perfect_sqrt(rep.nrows())
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Dimension(format!("size {} is not a positive perfect square", rep.nrows())))?;
        ensure_finite(&rep, "superoperator")?;
        Ok(Self { dim: n, rep, provenance: Provenance::Raw })
    }

    pub fn identity(n: usize) -> Self {
        Self { dim: n, rep: identity(n * n), provenance: Provenance::Kraus(alloc::vec![identity(n)]) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rep(&self) -> &ComplexMatrix {
        &self.rep
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::Dimension(format!("map acts on {0}x{0} matrices, got {1:?}", self.dim, x.shape())));
        }
        unvec(&(&self.rep * linalg::vec(x)?))
    }

    /// The Hilbert–Schmidt adjoint; its representation is `⌈Φ⌉*`.
    pub fn adjoint(&self) -> Self {
        let provenance = match &self.provenance {
            Provenance::Kraus(ops) => Provenance::Kraus(ops.iter().map(|v| v.adjoint()).collect()),
            _ => Provenance::Raw,
        };
        Self { dim: self.dim, rep: self.rep.adjoint(), provenance }
    }

    /// `Φ*(I) = I` up to `atol` in Frobenius norm.
    pub fn check_trace_preserving(&self, tol: &Tolerance) -> TraceCheck {
        let n = self.dim;
        let image = self.adjoint().apply(&identity(n)).expect("dimension matches");
        let residual = frobenius(&(image - identity(n)));
        TraceCheck { preserving: residual <= tol.atol, residual }
    }

    /// Choi matrix `Σ E_ij ⊗ Φ(E_ij)`.
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.dim;
        // Φ(E_ij)[k, l] = rep[(k n + l, i n + j)]
        ComplexMatrix::from_fn(n * n, n * n, |r, s| {
            let (i, k) = (r / n, r % n);
            let (j, l) = (s / n, s % n);
            self.rep[(k * n + l, i * n + j)]
        })
    }

    pub fn check_complete_positivity(&self, tol: &Tolerance) -> CpCheck {
        let check = is_psd(&self.choi(), tol);
        CpCheck { completely_positive: check.psd, min_choi_eigenvalue: check.min_eigenvalue }
    }

    /// Applies the map to `samples` Haar-random pure states and checks each
    /// output is PSD.
    pub fn sample_positivity(&self, samples: usize, seed: u64, tol: &Tolerance) -> SampledPositivity {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0;
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let phi = crate::random::gaussian_vector(&mut rng, self.dim);
            let rho = DensityMatrix::pure(&phi).expect("gaussian vector is nonzero");
            let out = self.apply(rho.matrix()).expect("dimension matches");
            let check = is_psd(&out, tol);
            worst = worst.min(check.min_eigenvalue);
            if !check.psd {
                violations += 1;
            }
        }
        SampledPositivity { samples, violations, worst_min_eigenvalue: worst, seed }
    }

    /// CP certificate, falling back to random sampling when the Choi test fails.
    pub fn certify_positivity(&self, samples: usize, seed: u64, tol: &Tolerance) -> PositivityReport {
        let cp = self.check_complete_positivity(tol);
        if cp.completely_positive {
            return PositivityReport { verdict: PositivityVerdict::CompletelyPositive, cp, sampled: None };
        }
        let sampled = self.sample_positivity(samples, seed, tol);
        let verdict = if sampled.violations == 0 {
            PositivityVerdict::PositiveBySampling
        } else {
            PositivityVerdict::NotPositive
        };
        PositivityReport { verdict, cp, sampled: Some(sampled) }
    }

    /// Invariant state and irreducibility verdict.
    pub fn invariant_state(&self, tol: &Tolerance) -> Result<IrreducibilityCertificate> {
        let tp = self.check_trace_preserving(tol);
        if !tp.preserving {
            return Err(Error::NotTracePreserving { residual: tp.residual });
        }
        let basis = fixed_space(&self.rep, tol);
        let fixed_space_dim = basis.len();
        let mut cert = IrreducibilityCertificate {
            invariant_state: None,
            fixed_space_dim,
            min_eigenvalue_of_pi: f64::NAN,
            fixed_point_residual: f64::NAN,
            verdict: if fixed_space_dim == 1 { Verdict::Inconclusive } else { Verdict::NotIrreducible },
        };
        if fixed_space_dim == 0 {
            cert.verdict = Verdict::Inconclusive;
            return Ok(cert);
        }
        if fixed_space_dim > 1 {
            return Ok(cert);
        }
        let x = unvec(&basis[0])?;
        let tr: Complex64 = trace(&x);
        if tr.norm() <= tol.atol {
            return Ok(cert);
        }
        let candidate = hermitize(&(x / tr));
        let check = is_psd(&candidate, tol);
        cert.min_eigenvalue_of_pi = check.min_eigenvalue;
        if !check.psd {
            return Ok(cert);
        }
        let residual = frobenius(&(self.apply(&candidate)? - &candidate));
        cert.fixed_point_residual = residual;
        cert.verdict = if residual > tol.threshold(1.0) {
            Verdict::Inconclusive
        } else if check.min_eigenvalue > tol.atol {
            Verdict::CertifiedIrreducible
        } else {
            Verdict::NotIrreducible
        };
        cert.invariant_state = Some(DensityMatrix::from_trusted(candidate));
        Ok(cert)
    }

    /// Representation of `self ∘ other`.
    pub fn compose(&self, other: &SuperOperator) -> Result<SuperOperator> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("cannot compose maps on M_{} and M_{}", self.dim, other.dim)));
        }
        SuperOperator::from_raw(&self.rep * &other.rep)
    }
}

/// Non-negative entries and unit column sums.
pub fn validate_column_stochastic(p: &RealMatrix, tol: &Tolerance) -> Result<()> {
    if p.nrows() != p.ncols() || p.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "transition matrix must be square and non-empty, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    for (j, col) in p.column_iter().enumerate() {
        if let Some(i) = col.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NotStochastic { column: j, reason: format!("entry in row {i} is {}", col[i]) });
        }
        let sum: f64 = col.iter().sum();
        if (sum - 1.0).abs() > tol.atol.max(1e-12) * p.nrows() as f64 {
            return Err(Error::NotStochastic { column: j, reason: format!("sums to {sum}") });
        }
    }
    Ok(())
}
