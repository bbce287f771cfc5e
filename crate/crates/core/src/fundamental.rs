//! The fundamental map `Z = (I − Φ + Ω)⁻¹` with `Ω = |π⟩⟨I_n|`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, identity, inverse_with_condition, trace, ComplexMatrix, Tolerance};
use crate::maps::{DensityMatrix, IrreducibilityCertificate, SuperOperator};

/// `⌈Ω⌉ = vec(π) vec(I_n)ᵀ`.
pub fn build_omega(pi: &DensityMatrix) -> ComplexMatrix {
    let n = pi.dim();
    let ones = linalg::vec(&identity(n)).expect("square");
    pi.vectorized() * ones.transpose()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalData {
    pub pi: DensityMatrix,
    pub omega_rep: ComplexMatrix,
    pub z_rep: ComplexMatrix,
    /// 1-norm condition number of `I − ⌈Φ⌉ + ⌈Ω⌉`.
    pub condition_estimate: f64,
}

/// Solves for `⌈Z⌉`. Requires a certified-irreducible, trace-preserving map.
pub fn fundamental_map(
    t: &SuperOperator,
    cert: &IrreducibilityCertificate,
    tol: &Tolerance,
) -> Result<FundamentalData> {
    let pi = cert.require_certified()?.clone();
    if pi.dim() != t.dim() {
        return Err(Error::Dimension("certificate does not belong to this map".into()));
    }
    let tp = t.check_trace_preserving(tol);
    if !tp.preserving {
        return Err(Error::NotTracePreserving { residual: tp.residual });
    }
    let m = t.rep().nrows();
    let omega_rep = build_omega(&pi);
    let system = identity(m) - t.rep() + &omega_rep;
    let (z_rep, condition_estimate) = inverse_with_condition(&system)?;
    Ok(FundamentalData { pi, omega_rep, z_rep, condition_estimate })
}

/// One Frobenius residual of a fundamental-map identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub residuals: Vec<IdentityResidual>,
    pub condition_estimate: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn passed(&self, bound: f64) -> bool {
        self.residuals.iter().all(|r| r.residual <= bound)
    }
}

/// Residuals of `ZΩ = ΩZ = Ω`, `Z(I−Φ) = (I−Φ)Z = I−Ω`, `Ω² = ΦΩ = ΩΦ = Ω`,
/// the solve itself, and trace preservation of `Z` and `Ω`.
pub fn verify_fundamental_identities(fd: &FundamentalData, t: &SuperOperator) -> IdentityReport {
    let m = t.rep().nrows();
    let id = identity(m);
    let phi = t.rep();
    let z = &fd.z_rep;
    let omega = &fd.omega_rep;
    let i_minus_phi = &id - phi;
    let i_minus_omega = &id - omega;
    let res = |a: ComplexMatrix, b: &ComplexMatrix| frobenius(&(a - b));

    // Φ*(I) = I in vec form: vec(I)ᵀ T = vec(I)ᵀ for trace preservation of T.
    let ones = linalg::vec(&identity(t.dim())).expect("square").transpose();
    let tp = |rep: &ComplexMatrix| (&ones * rep - &ones).norm();

    let residuals = alloc::vec![
        IdentityResidual { name: "Z(I-Phi+Omega) = I", residual: res(z * (&i_minus_phi + omega), &id) },
        IdentityResidual { name: "Z Omega = Omega", residual: res(z * omega, omega) },
        IdentityResidual { name: "Omega Z = Omega", residual: res(omega * z, omega) },
        IdentityResidual { name: "Z(I-Phi) = I-Omega", residual: res(z * &i_minus_phi, &i_minus_omega) },
        IdentityResidual { name: "(I-Phi)Z = I-Omega", residual: res(&i_minus_phi * z, &i_minus_omega) },
        IdentityResidual { name: "Omega^2 = Omega", residual: res(omega * omega, omega) },
        IdentityResidual { name: "Phi Omega = Omega", residual: res(phi * omega, omega) },
        IdentityResidual { name: "Omega Phi = Omega", residual: res(omega * phi, omega) },
        IdentityResidual { name: "Z trace preserving", residual: tp(z) },
        IdentityResidual { name: "Omega trace preserving", residual: tp(omega) },
        IdentityResidual { name: "Tr(pi) = 1", residual: (trace(fd.pi.matrix()).re - 1.0).abs() },
    ];
    IdentityReport { residuals, condition_estimate: fd.condition_estimate }
}
