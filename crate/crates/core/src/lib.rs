//! Mean hitting times of irreducible positive trace-preserving maps on
//! matrix algebras, computed from the fundamental map and the first-visit
//! generating maps of a monitored subspace.
//!
//! Maps act on `M_n` and are stored as `n² × n²` matrices acting on row-major
//! vectorizations, so `vec(A X Bᵀ) = (A ⊗ B) vec(X)` and a Kraus map
//! `X ↦ Σ Vᵢ X Vᵢ*` is represented by `Σ Vᵢ ⊗ conj(Vᵢ)`.
//!
//! ```
//! use qhitting_core::{reference, ArrivalSubspace, DensityMatrix, HittingSolution, Tolerance};
//!
//! let tol = Tolerance::default();
//! let v = ArrivalSubspace::from_vectors(&[reference::qubit_psi()], &tol).unwrap();
//! let sol = HittingSolution::new(reference::qubit_channel(), v, &tol).unwrap();
//! let rho = DensityMatrix::pure(&reference::qubit_phi()).unwrap();
//! assert!((sol.mean_hitting_time_direct(&rho).unwrap() - 6.0).abs() < 1e-12);
//! ```

#![no_std]
// `!(x > 0.0)` style comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classical;
pub mod error;
pub mod fundamental;
pub mod hitting;
pub mod linalg;
pub mod maps;
pub mod oracle;
pub mod random;
pub mod reference;

pub use classical::{MarkovChain, SubsetHitting};
pub use error::{Error, Result};
pub use fundamental::{build_omega, fundamental_map, verify_fundamental_identities, FundamentalData, IdentityReport};
pub use hitting::{ArrivalSubspace, FirstStep, HittingMaps, HittingSolution, OrthogonalMhtf, Side, SuperProjectors};
pub use linalg::{ComplexMatrix, ComplexVector, RealMatrix, Tolerance};
pub use maps::{DensityMatrix, IrreducibilityCertificate, SuperOperator, Verdict};
pub use oracle::{classical_monte_carlo, first_visit_series, tau_series, MonteCarloEstimate, Start};
