//! Finite irreducible Markov chains in the column-stochastic convention
//! (`p[(i, j)]` is the probability of the transition `j → i`).
//!
//! With `Z = (I − P + Ω)⁻¹`, `Ω_ij = π_i`, the mean first-passage time from
//! `i` to `j ≠ i` is `(Z_jj − Z_ji)/π_j` and the mean return time to `j` is
//! `1/π_j`. The distribution-start and subset-arrival variants below are
//! obtained from the embedding of the chain as a positive map on diagonal
//! matrices.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hitting::{ArrivalSubspace, HittingSolution};
use crate::linalg::{fixed_space, from_real, RealMatrix, Tolerance};
use crate::maps::{validate_column_stochastic, DensityMatrix, SuperOperator, Verdict};

/// Bound on the spread of `Σ_{k∈S} Z_kj τ(k→S)` over `j ∈ S`.
pub const SUBSET_CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    p: RealMatrix,
    pi: DVector<f64>,
    z: RealMatrix,
}

/// Result of [`MarkovChain::mhtf_subset`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetHitting {
    pub tau: f64,
    /// `(k, τ(k→S))` for each `k ∈ S`, 0-based.
    pub return_times: Vec<(usize, f64)>,
    /// `max − min` of `Σ_{k∈S} (Z_kj − Z_ki) τ(k→S)` over `j ∈ S`.
    pub j_spread: f64,
}

impl MarkovChain {
    pub fn new(p: RealMatrix, tol: &Tolerance) -> Result<Self> {
        validate_column_stochastic(&p, tol)?;
        let n = p.nrows();
        let basis = fixed_space(&from_real(&p), tol);
        if basis.len() != 1 {
            return Err(Error::NotIrreducible { verdict: Verdict::NotIrreducible });
        }
        let v = &basis[0];
        let sum: num_complex::Complex64 = v.iter().sum();
        if sum.norm() <= tol.atol {
            return Err(Error::NotIrreducible { verdict: Verdict::Inconclusive });
        }
        let pi = DVector::from_iterator(n, v.iter().map(|z| (z / sum).re));
        if pi.iter().any(|x| !(*x > tol.atol)) {
            return Err(Error::NotIrreducible { verdict: Verdict::NotIrreducible });
        }

        let omega = RealMatrix::from_fn(n, n, |i, _| pi[i]);
        let system = RealMatrix::identity(n, n) - &p + &omega;
        let lu = system.clone().lu();
        let z = lu.try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })?;

        let scale = 1.0 + z.abs().max();
        let stationary_residual = (&p * &pi - &pi).norm();
        let solve_residual = (&z * &system - RealMatrix::identity(n, n)).norm();
        let column_residual = z.row_sum().add_scalar(-1.0).norm();
        let bound = tol.threshold(scale) * n as f64;
        for (what, spread) in [
            ("P pi = pi", stationary_residual),
            ("Z (I - P + Omega) = I", solve_residual),
            ("columns of Z sum to 1", column_residual),
        ] {
            if spread > bound {
                return Err(Error::Inconsistent { what, spread });
            }
        }
        Ok(Self { p, pi, z })
    }

    /// Transposes a row-stochastic matrix first.
    pub fn from_row_stochastic(p: &RealMatrix, tol: &Tolerance) -> Result<Self> {
        Self::new(p.transpose(), tol)
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn transition(&self) -> &RealMatrix {
        &self.p
    }

    pub fn stationary(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn fundamental(&self) -> &RealMatrix {
        &self.z
    }

    fn check_state(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("state {i} out of range for {} states", self.n())))
        }
    }

    /// `E_i T_j = (Z_jj − Z_ji)/π_j` for `i ≠ j`.
    pub fn mhtf(&self, i: usize, j: usize) -> Result<f64> {
        self.check_state(i)?;
        self.check_state(j)?;
        if i == j {
            return Err(Error::SameState);
        }
        Ok((self.z[(j, j)] - self.z[(j, i)]) / self.pi[j])
    }

    /// Kac: mean return time `1/π_j`.
    pub fn kac_return_time(&self, j: usize) -> Result<f64> {
        self.check_state(j)?;
        Ok(1.0 / self.pi[j])
    }

    /// `τ(x→j) = 1 + (Z_jj − (Z P x)_j)/π_j` for an initial distribution `x`.
    pub fn mhtf_distribution(&self, x: &[f64], j: usize) -> Result<f64> {
        self.check_state(j)?;
        if x.len() != self.n() {
            return Err(Error::Dimension(format!("distribution has {} entries, chain has {}", x.len(), self.n())));
        }
        DensityMatrix::diagonal(x, &Tolerance::default())?;
        let x = DVector::from_column_slice(x);
        let zpx = &self.z * (&self.p * x);
        Ok(1.0 + (self.z[(j, j)] - zpx[j]) / self.pi[j])
    }

    /// The chain as a positive map on `M_n`.
    pub fn embedding(&self) -> SuperOperator {
        SuperOperator::from_stochastic(&self.p, &Tolerance::default()).expect("validated at construction")
    }

    /// Hitting data of the embedded map for arrival in `span{|k⟩ : k ∈ states}`.
    pub fn embedded_solution(&self, states: &[usize], tol: &Tolerance) -> Result<HittingSolution> {
        let v = ArrivalSubspace::from_basis_states(self.n(), states)?;
        HittingSolution::new(self.embedding(), v, tol)
    }

    /// `τ(i→S) = Σ_{k∈S} (Z_kj − Z_ki) τ(k→S)`, with the return times `τ(k→S)`
    /// read from the embedded mean hitting time map.
    pub fn mhtf_subset(&self, i: usize, set: &[usize], tol: &Tolerance) -> Result<SubsetHitting> {
        self.check_state(i)?;
        let mut set: Vec<usize> = set.to_vec();
        set.sort_unstable();
        set.dedup();
        for &k in &set {
            self.check_state(k)?;
        }
        if set.is_empty() || set.len() == self.n() {
            return Err(Error::InvalidArgument("subset must be nonempty and proper".into()));
        }
        if set.contains(&i) {
            return Err(Error::InvalidArgument(format!("start state {i} lies in the arrival subset")));
        }
        let solution = self.embedded_solution(&set, tol)?;
        let return_times = set
            .iter()
            .map(|&k| {
                let rho = DensityMatrix::basis(self.n(), k)?;
                Ok((k, solution.mean_hitting_time_direct(&rho)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let per_j: Vec<f64> = set
            .iter()
            .map(|&j| return_times.iter().map(|&(k, tau_k)| (self.z[(k, j)] - self.z[(k, i)]) * tau_k).sum())
            .collect();
        let max = per_j.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = per_j.iter().copied().fold(f64::INFINITY, f64::min);
        let j_spread = max - min;
        if !(j_spread <= SUBSET_CONSISTENCY_TOL) {
            return Err(Error::Inconsistent { what: "subset formula depends on the chosen j", spread: j_spread });
        }
        Ok(SubsetHitting { tau: per_j[0], return_times, j_spread })
    }
}
