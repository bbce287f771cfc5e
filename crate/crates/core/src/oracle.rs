//! Reference values computed without the resolvent: the truncated
//! first-visit series of the monitored evolution, and trajectory sampling for
//! classical chains.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // float math for builds without std
use num_traits::Float as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hitting::SuperProjectors;
use crate::linalg::{spectral_radius, ComplexMatrix, ComplexVector, RealMatrix, Tolerance};
use crate::maps::{validate_column_stochastic, DensityMatrix, SuperOperator};

/// Name of the generator behind [`classical_monte_carlo`].
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Per-trajectory step cap used by [`classical_monte_carlo`].
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// Hard limit on series length in [`tau_series`].
pub const MAX_SERIES_TERMS: usize = 10_000_000;

/// First-visit probabilities `π_r` for `r = 1..=r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstVisitDistribution {
    pub probabilities: Vec<f64>,
    /// Upper bound on `Σ_{r > r_max} π_r`.
    pub tail_bound: f64,
    pub r_max: usize,
    pub spectral_radius: f64,
}

impl FirstVisitDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Truncated `Σ r π_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTime {
    pub tau: f64,
    /// `Σ π_r` over the same terms.
    pub hitting_probability: f64,
    pub terms: usize,
    /// Upper estimate of the truncated part of `Σ r π_r`.
    pub tail_bound: f64,
    pub spectral_radius: f64,
}

struct Monitor {
    survival: ComplexMatrix,
    arrival: ComplexMatrix,
    n: usize,
    radius: f64,
}

impl Monitor {
    fn new(t: &SuperOperator, sp: &SuperProjectors) -> Result<Self> {
        if sp.qq.nrows() != t.rep().nrows() {
            return Err(Error::Dimension("projectors and map act on different spaces".into()));
        }
        let survival = &sp.qq * t.rep();
        let radius = spectral_radius(&survival);
        if !(radius < 1.0) {
            return Err(Error::NonConvergent { spectral_radius: radius });
        }
        Ok(Self { survival, arrival: &sp.pp * t.rep(), n: t.dim(), radius })
    }

    fn trace(&self, v: &ComplexVector) -> f64 {
        (0..self.n).map(|i| v[i * self.n + i].re).sum()
    }

    fn start(&self, rho: &DensityMatrix) -> Result<ComplexVector> {
        if rho.dim() != self.n {
            return Err(Error::Dimension(format!("state is {0}x{0}, map acts on {1}x{1}", rho.dim(), self.n)));
        }
        Ok(rho.vectorized())
    }
}

fn l1(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// `π_r = Tr(ℙΦ(ℚΦ)^{r−1}ρ)` by iterating the surviving part of the state.
pub fn first_visit_series(
    t: &SuperOperator,
    sp: &SuperProjectors,
    rho: &DensityMatrix,
    r_max: usize,
) -> Result<FirstVisitDistribution> {
    if r_max == 0 {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    let monitor = Monitor::new(t, sp)?;
    let mut sigma = monitor.start(rho)?;
    let mut probabilities = Vec::with_capacity(r_max);
    for _ in 0..r_max {
        probabilities.push(monitor.trace(&(&monitor.arrival * &sigma)));
        sigma = &monitor.survival * sigma;
    }
    // The surviving mass Tr(σ) bounds every later arrival, and ‖vec σ‖₁ bounds Tr(σ).
    let tail_bound = l1(&sigma) / (1.0 - monitor.radius);
    Ok(FirstVisitDistribution { probabilities, tail_bound, r_max, spectral_radius: monitor.radius })
}

/// `Σ r π_r`, truncated once the tail estimate drops below `atol / 10`.
///
/// With surviving mass `m = ‖vec σ_{R+1}‖₁` after `R` terms, the remainder
/// `Σ_{r>R} r π_r = R·Tr(σ_{R+1}) + Σ_{k>R} Tr(σ_k)` is estimated by
/// `m (R + 1/(1−s)) / (1−s)` with `s` the spectral radius of `ℚΦ`.
pub fn tau_series(t: &SuperOperator, sp: &SuperProjectors, rho: &DensityMatrix, tol: &Tolerance) -> Result<SeriesTime> {
    let monitor = Monitor::new(t, sp)?;
    let mut sigma = monitor.start(rho)?;
    let gap = 1.0 - monitor.radius;
    let target = tol.atol / 10.0;
    let mut tau = 0.0;
    let mut probability = 0.0;
    for r in 1..=MAX_SERIES_TERMS {
        let p = monitor.trace(&(&monitor.arrival * &sigma));
        tau += r as f64 * p;
        probability += p;
        sigma = &monitor.survival * sigma;
        let tail_bound = l1(&sigma) * (r as f64 + 1.0 / gap) / gap;
        if tail_bound < target {
            return Ok(SeriesTime {
                tau,
                hitting_probability: probability,
                terms: r,
                tail_bound,
                spectral_radius: monitor.radius,
            });
        }
    }
    Err(Error::NonConvergent { spectral_radius: monitor.radius })
}

/// Where classical trajectories start.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// 0-based state index.
    State(usize),
    /// Initial probability distribution.
    Distribution(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Cumulative sums along each column, for inverse-CDF sampling.
struct ColumnSampler {
    cumulative: Vec<Vec<f64>>,
}

impl ColumnSampler {
    fn from_columns(p: &RealMatrix) -> Self {
        let cumulative = p
            .column_iter()
            .map(|col| {
                let mut acc = 0.0;
                col.iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { cumulative }
    }

    fn from_distribution(x: &[f64]) -> Self {
        let mut acc = 0.0;
        Self {
            cumulative: alloc::vec![x
                .iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect()],
        }
    }

    fn sample<R: Rng>(&self, column: usize, rng: &mut R) -> usize {
        let cum = &self.cumulative[column];
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        cum.iter().position(|c| u < *c).unwrap_or_else(|| {
            // round-off at the top: last state with positive probability
            let mut k = cum.len() - 1;
            while k > 0 && cum[k] == cum[k - 1] {
                k -= 1;
            }
            k
        })
    }
}

/// Mean first-passage time into `target` by direct simulation.
///
/// Transitions follow the columns of `p` (`p[(i, j)]` is the probability of
/// `j → i`). The first step is always taken, so a start inside `target`
/// measures the return time.
pub fn classical_monte_carlo(
    p: &RealMatrix,
    start: &Start,
    target: &[usize],
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    classical_monte_carlo_with_cap(p, start, target, trials, seed, DEFAULT_STEP_CAP)
}

pub fn classical_monte_carlo_with_cap(
    p: &RealMatrix,
    start: &Start,
    target: &[usize],
    trials: u64,
    seed: u64,
    step_cap: u64,
) -> Result<MonteCarloEstimate> {
    let tol = Tolerance::default();
    validate_column_stochastic(p, &tol)?;
    let n = p.nrows();
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if target.is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    let mut in_target = alloc::vec![false; n];
    for &k in target {
        *in_target.get_mut(k).ok_or_else(|| Error::InvalidArgument(format!("target state {k} out of range")))? = true;
    }
    let initial = match start {
        Start::State(i) if *i < n => None,
        Start::State(i) => return Err(Error::InvalidArgument(format!("start state {i} out of range"))),
        Start::Distribution(x) => {
            DensityMatrix::diagonal(x, &tol)?;
            if x.len() != n {
                return Err(Error::Dimension(format!("distribution has {} entries, chain has {n}", x.len())));
            }
            Some(ColumnSampler::from_distribution(x))
        }
    };
    let sampler = ColumnSampler::from_columns(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut mean = 0.0;
    let mut m2 = 0.0;
    for trial in 1..=trials {
        let mut state = match (&initial, start) {
            (Some(init), _) => init.sample(0, &mut rng),
            (None, Start::State(i)) => *i,
            (None, Start::Distribution(_)) => unreachable!(),
        };
        let mut steps = 0u64;
        loop {
            state = sampler.sample(state, &mut rng);
            steps += 1;
            if in_target[state] {
                break;
            }
            if steps >= step_cap {
                return Err(Error::StepCapExceeded { cap: step_cap });
            }
        }
        let x = steps as f64;
        let delta = x - mean;
        mean += delta / trial as f64;
        m2 += delta * (x - mean);
    }
    let std_error = if trials > 1 { (m2 / (trials - 1) as f64 / trials as f64).sqrt() } else { 0.0 };
    Ok(MonteCarloEstimate { mean, std_error, trials, seed })
}
