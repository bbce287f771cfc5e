//! Monitored first visits to an arrival subspace `V ⊂ ℂⁿ`.
//!
//! After every application of `Φ` a projective check asks whether the state
//! lies in `V`. Survival is governed by `ℚΦ`, where `ℚ = Q·Q` compresses onto
//! the orthogonal complement of `V`. From it come the hitting probability map
//! `H = Φ(I − ℚΦ)⁻¹` and the mean hitting time map `K = Φ(I − ℚΦ)⁻²`, and the
//! mean hitting time can be read off three ways:
//!
//! * directly, `τ(ρ) = Tr((I − ℚ) K ρ)`;
//! * for `ℚρ_φ = ρ_φ`, from the fundamental map and the return-time block,
//!   `τ = Tr(K₁₁(Z₁₁ ρ_ψ − Z₁₂ ρ_φ))` for any state `ρ_ψ` supported in `V`;
//! * for arbitrary `ρ`, by conditioning on the first step,
//!   `τ = 1 + Tr(K₁₁Z₁₁ρ_ψ) Tr(ℚΦρ) − Tr(K₁₁Z₁₂ ℚΦρ)`.
//!
//! Blocks `T_ij` of a superoperator are taken with respect to the pair
//! `(I − ℚ, ℚ)` and kept at full `n² × n²` size.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float math for builds without std
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::fundamental::{fundamental_map, FundamentalData};
use crate::linalg::{
    self, frobenius, hermitize, identity, kron, spectral_radius, trace, ComplexMatrix, ComplexVector, Factorized,
    Tolerance,
};
use crate::maps::{DensityMatrix, SuperOperator};

/// Default Frobenius tolerance for the support conditions `ℚρ = ρ` and `ℙρ = ρ`.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Survival operators with spectral radius at or above this are rejected.
const CONTRACTION_LIMIT: f64 = 1.0 - 1e-12;

/// Orthogonal projector `P` onto a nontrivial subspace `V`, and `Q = I − P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalSubspace {
    p: ComplexMatrix,
    q: ComplexMatrix,
    rank: usize,
}

impl ArrivalSubspace {
    /// Projector onto `span(vs)`, via Gram–Schmidt with one reorthogonalization pass.
    pub fn from_vectors(vs: &[ComplexVector], tol: &Tolerance) -> Result<Self> {
        let n =
            vs.first().map(|v| v.len()).ok_or_else(|| Error::InvalidArgument("no spanning vectors given".into()))?;
        if n == 0 {
            return Err(Error::Dimension("spanning vectors are empty".into()));
        }
        let mut basis: Vec<ComplexVector> = Vec::new();
        for (k, v) in vs.iter().enumerate() {
            if v.len() != n {
                return Err(Error::Dimension(format!("vector {k} has length {}, expected {n}", v.len())));
            }
            if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("vector {k} has non-finite entries")));
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let overlap = b.dotc(&w);
                    w -= b * overlap;
                }
            }
            let norm = w.norm();
            if norm > tol.threshold(v.norm()) {
                basis.push(w.unscale(norm));
            }
        }
        if basis.is_empty() {
            return Err(Error::InvalidArgument("spanning vectors are all zero".into()));
        }
        let p = basis.iter().fold(ComplexMatrix::zeros(n, n), |acc, b| acc + b * b.adjoint());
        Self::with_rank(p, basis.len())
    }

    /// Projector onto `span{|i⟩ : i ∈ states}` (0-based indices).
    pub fn from_basis_states(n: usize, states: &[usize]) -> Result<Self> {
        let mut p = ComplexMatrix::zeros(n, n);
        for &i in states {
            if i >= n {
                return Err(Error::InvalidArgument(format!("state index {i} out of range for dimension {n}")));
            }
            p[(i, i)] = linalg::re(1.0);
        }
        let rank = (0..n).filter(|i| p[(*i, *i)].re > 0.5).count();
        if rank == 0 {
            return Err(Error::InvalidArgument("empty set of basis states".into()));
        }
        Self::with_rank(p, rank)
    }

    /// Accepts a Hermitian idempotent `P`.
    pub fn from_projector(p: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n || n == 0 {
            return Err(Error::Dimension("projector must be square and non-empty".into()));
        }
        let scale = frobenius(&p).max(1.0);
        if frobenius(&(&p - p.adjoint())) > tol.threshold(scale) || frobenius(&(&p * &p - &p)) > tol.threshold(scale) {
            return Err(Error::InvalidArgument("matrix is not an orthogonal projector".into()));
        }
        let rank = trace(&p).re.round() as usize;
        Self::with_rank(hermitize(&p), rank)
    }

    fn with_rank(p: ComplexMatrix, rank: usize) -> Result<Self> {
        let n = p.nrows();
        if rank == 0 || rank >= n {
            return Err(Error::TrivialSubspace { rank, dim: n });
        }
        let q = identity(n) - &p;
        Ok(Self { p, q, rank })
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.p
    }

    pub fn complement(&self) -> &ComplexMatrix {
        &self.q
    }

    /// `P / rank(P)`: the basis-free state supported in `V`.
    pub fn uniform_state(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.p.unscale(self.rank as f64))
    }

    /// `‖PρP − ρ‖_F`.
    pub fn arrival_residual(&self, rho: &DensityMatrix) -> f64 {
        frobenius(&(&self.p * rho.matrix() * &self.p - rho.matrix()))
    }

    /// `‖QρQ − ρ‖_F`.
    pub fn complement_residual(&self, rho: &DensityMatrix) -> f64 {
        frobenius(&(&self.q * rho.matrix() * &self.q - rho.matrix()))
    }
}

/// Which half of the `(I − ℚ, ℚ)` decomposition a block index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Index 1: `I − ℚ`.
    Arrival,
    /// Index 2: `ℚ`.
    Survival,
}

impl Side {
    /// Maps the conventional block index 1 or 2.
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Side::Arrival),
            2 => Some(Side::Survival),
            _ => None,
        }
    }
}

/// The four blocks of a superoperator, each stored at full size.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub b11: ComplexMatrix,
    pub b12: ComplexMatrix,
    pub b21: ComplexMatrix,
    pub b22: ComplexMatrix,
}

/// `⌈ℙ⌉ = P ⊗ conj(P)`, `⌈ℚ⌉ = Q ⊗ conj(Q)` and `⌈ℝ⌉ = I − ⌈ℙ⌉ − ⌈ℚ⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperProjectors {
    pub pp: ComplexMatrix,
    pub qq: ComplexMatrix,
    pub rr: ComplexMatrix,
    not_qq: ComplexMatrix,
}

impl SuperProjectors {
    pub fn new(s: &ArrivalSubspace) -> Self {
        let pp = kron(&s.p, &s.p.map(|z| z.conj()));
        let qq = kron(&s.q, &s.q.map(|z| z.conj()));
        let m = pp.nrows();
        let not_qq = identity(m) - &qq;
        let rr = &not_qq - &pp;
        Self { pp, qq, rr, not_qq }
    }

    /// `I − ⌈ℚ⌉ = ⌈ℙ⌉ + ⌈ℝ⌉`.
    pub fn not_qq(&self) -> &ComplexMatrix {
        &self.not_qq
    }

    fn side(&self, side: Side) -> &ComplexMatrix {
        match side {
            Side::Arrival => &self.not_qq,
            Side::Survival => &self.qq,
        }
    }

    /// `T_ij` sandwiched between the projectors for `row` and `col`.
    pub fn block(&self, t: &ComplexMatrix, row: Side, col: Side) -> ComplexMatrix {
        self.side(row) * t * self.side(col)
    }

    pub fn blocks(&self, t: &ComplexMatrix) -> Blocks {
        Blocks {
            b11: self.block(t, Side::Arrival, Side::Arrival),
            b12: self.block(t, Side::Arrival, Side::Survival),
            b21: self.block(t, Side::Survival, Side::Arrival),
            b22: self.block(t, Side::Survival, Side::Survival),
        }
    }
}

/// `⌈H⌉`, `⌈K⌉` and diagnostics of the survival operator `⌈ℚ⌉⌈Φ⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingMaps {
    pub h_rep: ComplexMatrix,
    pub k_rep: ComplexMatrix,
    pub survival_spectral_radius: f64,
    /// 1-norm condition number of `I − ⌈ℚ⌉⌈Φ⌉`.
    pub condition_estimate: f64,
}

/// `H = Φ(I − ℚΦ)⁻¹` and `K = Φ(I − ℚΦ)⁻²` by two successive solves.
pub fn hitting_maps(t: &SuperOperator, sp: &SuperProjectors) -> Result<HittingMaps> {
    if sp.qq.nrows() != t.rep().nrows() {
        return Err(Error::Dimension("projectors and map act on different spaces".into()));
    }
    let survival = &sp.qq * t.rep();
    let radius = spectral_radius(&survival);
    if radius >= CONTRACTION_LIMIT {
        return Err(Error::NonConvergent { spectral_radius: radius });
    }
    let m = survival.nrows();
    let lu = Factorized::new(&(identity(m) - &survival))?;
    let resolvent = lu.solve(&identity(m));
    let resolvent_sq = lu.solve(&resolvent);
    Ok(HittingMaps {
        h_rep: t.rep() * resolvent,
        k_rep: t.rep() * resolvent_sq,
        survival_spectral_radius: radius,
        condition_estimate: lu.condition,
    })
}

/// `Tr(vec⁻¹(rep · vec ρ))`.
pub fn trace_of_image(rep: &ComplexMatrix, rho: &DensityMatrix) -> Complex64 {
    trace_of_vector(&(rep * rho.vectorized()), rho.dim())
}

fn trace_of_vector(v: &ComplexVector, n: usize) -> Complex64 {
    (0..n).map(|i| v[i * n + i]).sum()
}

/// Outcome of one step of the monitored evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum FirstStep {
    /// `ℚΦρ = 0`: arrival is certain after one step.
    Absorbed,
    /// `weight = Tr(ℚΦρ)` and `next_state = ℚΦρ / weight`.
    Continue { weight: f64, next_state: DensityMatrix },
}

/// Conditions the monitored evolution on not arriving in the first step.
pub fn condition_first_step(
    t: &SuperOperator,
    sp: &SuperProjectors,
    rho: &DensityMatrix,
    tol: &Tolerance,
) -> Result<FirstStep> {
    check_dim(t.dim(), rho)?;
    let sigma = linalg::unvec(&(&sp.qq * (t.rep() * rho.vectorized())))?;
    if frobenius(&sigma) <= tol.atol {
        return Ok(FirstStep::Absorbed);
    }
    let weight = trace(&sigma).re;
    if !(weight > 0.0) {
        return Err(Error::InvalidDensity(format!(
            "surviving part has non-positive trace {weight:e}; map is not positive"
        )));
    }
    let next_state = DensityMatrix::from_trusted(hermitize(&sigma).unscale(weight));
    Ok(FirstStep::Continue { weight, next_state })
}

fn check_dim(n: usize, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() == n {
        Ok(())
    } else {
        Err(Error::Dimension(format!("state is {0}x{0}, map acts on {n}x{n}", rho.dim())))
    }
}

/// `D = diag(K₁₁, K₂₂)`, `N = K − D`, `L = K − NΦ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DnlMaps {
    pub d_rep: ComplexMatrix,
    pub n_rep: ComplexMatrix,
    pub l_rep: ComplexMatrix,
}

/// Value of the orthogonal-start formula and its two trace terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalMhtf {
    /// `Tr(K₁₁(Z₁₁ρ_ψ − Z₁₂ρ_φ))`.
    pub tau: f64,
    /// `Tr((DZ)₁₁ ρ_ψ)`.
    pub return_term: f64,
    /// `Tr((DZ)₁₂ ρ_φ)`.
    pub cross_term: f64,
}

/// Frobenius residuals of the block identities relating `D`, `N`, `L` and `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockIdentityReport {
    /// `N₁₂ρ_φ = (DZ)₁₁ρ_ψ − (DZ)₁₂ρ_φ + (LZ)₁₂ρ_φ − (LZ)₁₁ρ_ψ`.
    pub upper: f64,
    /// `N₂₁ρ_ψ = (DZ)₂₂ρ_φ − (DZ)₂₁ρ_ψ + (LZ)₂₁ρ_ψ − (LZ)₂₂ρ_φ`.
    pub lower: f64,
    /// `(I − ℚ)L = (I − ℚ)H`.
    pub first_row_l_h: f64,
    /// `‖N₁₁‖ + ‖N₂₂‖`.
    pub n_diagonal: f64,
}

impl BlockIdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.upper.max(self.lower).max(self.first_row_l_h).max(self.n_diagonal)
    }
}

/// Everything needed to answer hitting queries for one `(Φ, V)` pair.
#[derive(Debug, Clone)]
pub struct HittingSolution {
    map: SuperOperator,
    subspace: ArrivalSubspace,
    projectors: SuperProjectors,
    fundamental: FundamentalData,
    maps: HittingMaps,
    tol: Tolerance,
    orthogonality_tol: f64,
}

impl HittingSolution {
    /// Certifies irreducibility, then builds `Z`, `H` and `K`.
    pub fn new(map: SuperOperator, subspace: ArrivalSubspace, tol: &Tolerance) -> Result<Self> {
        let cert = map.invariant_state(tol)?;
        let fundamental = fundamental_map(&map, &cert, tol)?;
        Self::with_fundamental(map, subspace, fundamental, tol)
    }

    /// Reuses a fundamental map already computed for `map`.
    pub fn with_fundamental(
        map: SuperOperator,
        subspace: ArrivalSubspace,
        fundamental: FundamentalData,
        tol: &Tolerance,
    ) -> Result<Self> {
        if subspace.dim() != map.dim() || fundamental.z_rep.nrows() != map.rep().nrows() {
            return Err(Error::Dimension(format!("map on M_{} with subspace of C^{}", map.dim(), subspace.dim())));
        }
        let projectors = SuperProjectors::new(&subspace);
        let maps = hitting_maps(&map, &projectors)?;
        Ok(Self { map, subspace, projectors, fundamental, maps, tol: *tol, orthogonality_tol: ORTHOGONALITY_TOL })
    }

    pub fn with_orthogonality_tol(mut self, tol: f64) -> Self {
        self.orthogonality_tol = tol;
        self
    }

    pub fn map(&self) -> &SuperOperator {
        &self.map
    }

    pub fn subspace(&self) -> &ArrivalSubspace {
        &self.subspace
    }

    pub fn projectors(&self) -> &SuperProjectors {
        &self.projectors
    }

    pub fn fundamental(&self) -> &FundamentalData {
        &self.fundamental
    }

    pub fn h_rep(&self) -> &ComplexMatrix {
        &self.maps.h_rep
    }

    pub fn k_rep(&self) -> &ComplexMatrix {
        &self.maps.k_rep
    }

    pub fn hitting_maps(&self) -> &HittingMaps {
        &self.maps
    }

    pub fn block(&self, t: &ComplexMatrix, row: Side, col: Side) -> ComplexMatrix {
        self.projectors.block(t, row, col)
    }

    /// `⌈ℚ⌉⌈Φ⌉`.
    pub fn survival_rep(&self) -> ComplexMatrix {
        &self.projectors.qq * self.map.rep()
    }

    /// `Tr((I − ℚ) H ρ)`; equals 1 for irreducible maps.
    pub fn hitting_probability(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dim(self.map.dim(), rho)?;
        Ok(trace_of_image(&(self.projectors.not_qq() * &self.maps.h_rep), rho).re)
    }

    /// `Tr((I − ℚ) K ρ)`.
    pub fn mean_hitting_time_direct(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dim(self.map.dim(), rho)?;
        Ok(trace_of_image(&(self.projectors.not_qq() * &self.maps.k_rep), rho).re)
    }

    /// `Tr(H ρ) = Tr((I − ℚΦ)⁻¹ ρ)`, which must agree with the direct route.
    pub fn mean_hitting_time_shortcut(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dim(self.map.dim(), rho)?;
        Ok(trace_of_image(&self.maps.h_rep, rho).re)
    }

    pub fn dnl_maps(&self) -> DnlMaps {
        let k = self.projectors.blocks(&self.maps.k_rep);
        let d_rep = &k.b11 + &k.b22;
        let n_rep = &self.maps.k_rep - &d_rep;
        let l_rep = &self.maps.k_rep - &n_rep * self.map.rep();
        DnlMaps { d_rep, n_rep, l_rep }
    }

    fn require_arrival(&self, rho_psi: &DensityMatrix) -> Result<()> {
        check_dim(self.map.dim(), rho_psi)?;
        let residual = self.subspace.arrival_residual(rho_psi);
        if residual > self.orthogonality_tol {
            return Err(Error::Orthogonality { which: "arrival state (P rho_psi P = rho_psi)", residual });
        }
        Ok(())
    }

    fn require_complement(&self, rho_phi: &DensityMatrix) -> Result<()> {
        check_dim(self.map.dim(), rho_phi)?;
        let residual = self.subspace.complement_residual(rho_phi);
        if residual > self.orthogonality_tol {
            return Err(Error::Orthogonality { which: "initial state (Q rho_phi Q = rho_phi)", residual });
        }
        Ok(())
    }

    /// `K₁₁Z₁₁` and `K₁₁Z₁₂`.
    fn return_time_products(&self) -> (ComplexMatrix, ComplexMatrix) {
        let sp = &self.projectors;
        let k11 = sp.block(&self.maps.k_rep, Side::Arrival, Side::Arrival);
        let z = &self.fundamental.z_rep;
        let z11 = sp.block(z, Side::Arrival, Side::Arrival);
        let z12 = sp.block(z, Side::Arrival, Side::Survival);
        (&k11 * z11, k11 * z12)
    }

    /// Mean hitting time from a state orthogonal to `V`, through `Z` and `K₁₁`.
    pub fn mhtf_orthogonal(&self, rho_phi: &DensityMatrix, rho_psi: &DensityMatrix) -> Result<OrthogonalMhtf> {
        self.require_complement(rho_phi)?;
        self.require_arrival(rho_psi)?;
        let (k11z11, k11z12) = self.return_time_products();
        let v_psi = rho_psi.vectorized();
        let v_phi = rho_phi.vectorized();
        let n = self.map.dim();
        let tau = trace_of_vector(&(&k11z11 * &v_psi - &k11z12 * &v_phi), n).re;

        let d = self.dnl_maps().d_rep;
        let dz = d * &self.fundamental.z_rep;
        let sp = &self.projectors;
        let return_term = trace_of_image(&sp.block(&dz, Side::Arrival, Side::Arrival), rho_psi).re;
        let cross_term = trace_of_image(&sp.block(&dz, Side::Arrival, Side::Survival), rho_phi).re;
        Ok(OrthogonalMhtf { tau, return_term, cross_term })
    }

    /// `Tr((DZ)₁₁ ρ_ψ)`, independent of the state `ρ_ψ` supported in `V`.
    pub fn return_term(&self, rho_psi: &DensityMatrix) -> Result<f64> {
        self.require_arrival(rho_psi)?;
        let (k11z11, _) = self.return_time_products();
        Ok(trace_of_image(&k11z11, rho_psi).re)
    }

    pub fn first_step(&self, rho: &DensityMatrix) -> Result<FirstStep> {
        condition_first_step(&self.map, &self.projectors, rho, &self.tol)
    }

    /// Mean hitting time from an arbitrary state; `rho_psi` defaults to `P / rank P`.
    pub fn mhtf_general(&self, rho: &DensityMatrix, rho_psi: Option<&DensityMatrix>) -> Result<f64> {
        check_dim(self.map.dim(), rho)?;
        let uniform;
        let rho_psi = match rho_psi {
            Some(r) => r,
            None => {
                uniform = self.subspace.uniform_state();
                &uniform
            }
        };
        self.require_arrival(rho_psi)?;
        let sigma = &self.projectors.qq * (self.map.rep() * rho.vectorized());
        let n = self.map.dim();
        if frobenius(&linalg::unvec(&sigma)?) <= self.tol.atol {
            return Ok(1.0);
        }
        let (k11z11, k11z12) = self.return_time_products();
        let weight = trace_of_vector(&sigma, n).re;
        let return_term = trace_of_image(&k11z11, rho_psi).re;
        let cross = trace_of_vector(&(k11z12 * sigma), n).re;
        Ok(1.0 + return_term * weight - cross)
    }

    /// Residuals of the `D`/`N`/`L` block identities for one admissible pair.
    pub fn verify_block_identities(
        &self,
        rho_psi: &DensityMatrix,
        rho_phi: &DensityMatrix,
    ) -> Result<BlockIdentityReport> {
        self.require_arrival(rho_psi)?;
        self.require_complement(rho_phi)?;
        let sp = &self.projectors;
        let DnlMaps { d_rep, n_rep, l_rep } = self.dnl_maps();
        let z = &self.fundamental.z_rep;
        let dz = sp.blocks(&(&d_rep * z));
        let lz = sp.blocks(&(&l_rep * z));
        let nb = sp.blocks(&n_rep);
        let psi = rho_psi.vectorized();
        let phi = rho_phi.vectorized();

        let upper_lhs = &nb.b12 * &phi;
        let upper_rhs = &dz.b11 * &psi - &dz.b12 * &phi + &lz.b12 * &phi - &lz.b11 * &psi;
        let lower_lhs = &nb.b21 * &psi;
        let lower_rhs = &dz.b22 * &phi - &dz.b21 * &psi + &lz.b21 * &psi - &lz.b22 * &phi;
        let first_row = sp.not_qq() * (&l_rep - &self.maps.h_rep);
        Ok(BlockIdentityReport {
            upper: (upper_lhs - upper_rhs).norm(),
            lower: (lower_lhs - lower_rhs).norm(),
            first_row_l_h: frobenius(&first_row),
            n_diagonal: frobenius(&nb.b11) + frobenius(&nb.b22),
        })
    }
}
