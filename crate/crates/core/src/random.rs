//! Seeded random instances: channels, states, subspaces and Markov chains.
//!
//! All generators draw from ChaCha8 seeded with a 64-bit integer, so a seed
//! fully determines every instance on every platform.

use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen};
#[allow(unused_imports)] // float math for builds without std
use num_traits::Float as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hitting::ArrivalSubspace;
use crate::linalg::{c, hermitize, re, trace, ComplexMatrix, ComplexVector, RealMatrix, Tolerance};
use crate::maps::{DensityMatrix, SuperOperator};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal sample (Box–Muller).
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| c(normal(rng), normal(rng)))
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)))
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { re(1.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `S^{-1/2}` for Hermitian positive definite `S`.
fn inverse_sqrt(s: &ComplexMatrix) -> ComplexMatrix {
    let eig = SymmetricEigen::new(hermitize(s));
    let u = &eig.eigenvectors;
    let d = ComplexMatrix::from_diagonal(&eig.eigenvalues.map(|l| re(1.0 / l.sqrt())));
    u * d * u.adjoint()
}

/// Random CPTP map on `M_n` with `k` Kraus operators `Gᵢ S^{-1/2}`, `S = Σ Gᵢ* Gᵢ`.
pub fn cptp_map<R: Rng>(rng: &mut R, n: usize, k: usize) -> SuperOperator {
    let raw: Vec<ComplexMatrix> = (0..k).map(|_| gaussian_matrix(rng, n, n)).collect();
    let s = raw.iter().fold(ComplexMatrix::zeros(n, n), |acc, g| acc + g.adjoint() * g);
    let norm = inverse_sqrt(&s);
    SuperOperator::from_kraus(raw.into_iter().map(|g| g * &norm).collect()).expect("well-formed Kraus list")
}

/// A random CPTP map whose irreducibility certificate passes.
pub fn irreducible_cptp_map<R: Rng>(rng: &mut R, n: usize, tol: &Tolerance) -> SuperOperator {
    loop {
        let k = rng.random_range(2..=n.max(2));
        let t = cptp_map(rng, n, k);
        if t.invariant_state(tol).map(|c| c.is_certified()).unwrap_or(false) {
            return t;
        }
    }
}

/// Random full-rank density `G G* / Tr(G G*)`.
pub fn density<R: Rng>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, n, n);
    normalized(&(&g * g.adjoint()))
}

pub fn pure_state<R: Rng>(rng: &mut R, n: usize) -> DensityMatrix {
    DensityMatrix::pure(&gaussian_vector(rng, n)).expect("nonzero")
}

/// Random density supported in the range of the projector `p`.
pub fn density_in<R: Rng>(rng: &mut R, p: &ComplexMatrix) -> DensityMatrix {
    let g = gaussian_matrix(rng, p.nrows(), p.nrows());
    normalized(&(p * &g * g.adjoint() * p))
}

fn normalized(m: &ComplexMatrix) -> DensityMatrix {
    let h = hermitize(m);
    let tr = trace(&h).re;
    DensityMatrix::from_trusted(h.unscale(tr))
}

/// Random subspace of dimension `d` spanned by Gaussian vectors.
pub fn subspace<R: Rng>(rng: &mut R, n: usize, d: usize, tol: &Tolerance) -> ArrivalSubspace {
    let vs: Vec<ComplexVector> = (0..d).map(|_| gaussian_vector(rng, n)).collect();
    ArrivalSubspace::from_vectors(&vs, tol).expect("generic vectors are independent")
}

/// Uniform-ish probability vector.
pub fn probability_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    let x = DVector::from_fn(n, |_, _| rng.random::<f64>() + 1e-3);
    let s = x.sum();
    x / s
}

/// Sparse random column-stochastic matrix kept irreducible by a cycle `j → j+1`.
pub fn irreducible_chain<R: Rng>(rng: &mut R, n: usize) -> RealMatrix {
    let mut p = RealMatrix::from_fn(n, n, |_, _| if rng.random::<f64>() < 0.5 { rng.random::<f64>() } else { 0.0 });
    for j in 0..n {
        p[((j + 1) % n, j)] += 0.1 + rng.random::<f64>();
    }
    for mut col in p.column_iter_mut() {
        let s = col.sum();
        col /= s;
    }
    p
}
