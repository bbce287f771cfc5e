//! Small maps with known closed-form hitting data, used by the golden tests
//! and the CLI self-test.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float math for builds without std
use num_traits::Float as _;

use crate::linalg::{identity, re, ComplexMatrix, ComplexVector};
use crate::maps::SuperOperator;

fn real(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, &entries.iter().map(|x| re(*x)).collect::<Vec<_>>())
}

fn real_vector(entries: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(entries.len(), entries.iter().map(|x| re(*x)))
}

/// Kraus pair `L = [[1,1],[0,1]]/√3`, `R = [[1,0],[-1,1]]/√3` of a unital qubit channel.
pub fn qubit_kraus() -> Vec<ComplexMatrix> {
    let s = 1.0 / 3f64.sqrt();
    vec![real(2, 2, &[s, s, 0.0, s]), real(2, 2, &[s, 0.0, -s, s])]
}

pub fn qubit_channel() -> SuperOperator {
    SuperOperator::from_kraus(qubit_kraus()).expect("valid Kraus pair")
}

/// `ψ = (1, 1)/√2`, spans the arrival subspace for [`qubit_channel`].
pub fn qubit_psi() -> ComplexVector {
    real_vector(&[1.0, 1.0]).unscale(2f64.sqrt())
}

/// `φ = (1, -1)/√2`, orthogonal to [`qubit_psi`].
pub fn qubit_phi() -> ComplexVector {
    real_vector(&[1.0, -1.0]).unscale(2f64.sqrt())
}

/// `χ = (0, 1)`, neither in the arrival subspace nor orthogonal to it.
pub fn qubit_chi() -> ComplexVector {
    real_vector(&[0.0, 1.0])
}

/// Four Kraus operators on `M_4` parametrized by `0 < a < 1`, `b = √(1 - a²)`.
pub fn four_level_kraus(a: f64) -> Vec<ComplexMatrix> {
    let b = (1.0 - a * a).sqrt();
    let h = 1.0 / 2f64.sqrt();
    let mut v1 = ComplexMatrix::zeros(4, 4);
    v1[(0, 0)] = re(a);
    v1[(0, 3)] = re(b);
    let mut v2 = ComplexMatrix::zeros(4, 4);
    v2[(1, 0)] = re(-b);
    v2[(1, 3)] = re(a);
    let mut v3 = ComplexMatrix::zeros(4, 4);
    v3[(2, 1)] = re(h);
    v3[(2, 2)] = re(h);
    let mut v4 = ComplexMatrix::zeros(4, 4);
    v4[(3, 1)] = re(h);
    v4[(3, 2)] = re(-h);
    vec![v1, v2, v3, v4]
}

pub fn four_level_channel(a: f64) -> SuperOperator {
    SuperOperator::from_kraus(four_level_kraus(a)).expect("valid Kraus list")
}

/// Basis vectors `e₃, e₄` spanning the arrival subspace for [`four_level_channel`].
pub fn four_level_arrival() -> Vec<ComplexVector> {
    vec![real_vector(&[0.0, 0.0, 1.0, 0.0]), real_vector(&[0.0, 0.0, 0.0, 1.0])]
}

/// `e₁`, orthogonal to the four-level arrival subspace.
pub fn four_level_phi() -> ComplexVector {
    real_vector(&[1.0, 0.0, 0.0, 0.0])
}

/// `(e₁ + e₄)/√2`.
pub fn four_level_chi() -> ComplexVector {
    real_vector(&[1.0, 0.0, 0.0, 1.0]).unscale(2f64.sqrt())
}

/// Transpose map on `M_n`: positive and trace preserving, not completely positive.
pub fn transpose_map(n: usize) -> SuperOperator {
    let mut rep = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            rep[(j * n + i, i * n + j)] = re(1.0);
        }
    }
    SuperOperator::from_raw(rep).expect("square")
}

/// Direct sum of two copies of [`qubit_channel`] on `M_4`; its fixed space is
/// two-dimensional.
pub fn reducible_channel() -> SuperOperator {
    let ops = qubit_kraus();
    let mut kraus = Vec::new();
    for offset in [0, 2] {
        for v in &ops {
            let mut big = ComplexMatrix::zeros(4, 4);
            big.view_mut((offset, offset), (2, 2)).copy_from(v);
            kraus.push(big);
        }
    }
    SuperOperator::from_kraus(kraus).expect("valid Kraus list")
}

/// The map `Ω = |π⟩⟨I|` itself, which is already its own projection.
pub fn replacement_channel(pi: &ComplexMatrix) -> SuperOperator {
    let n = pi.nrows();
    let v = crate::linalg::vec(pi).expect("square");
    let i = crate::linalg::vec(&identity(n)).expect("square");
    SuperOperator::from_raw(&v * i.transpose()).expect("square")
}
