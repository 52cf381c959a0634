#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use vqsvm_core::data::{generate, ClusterSpec};
use vqsvm_core::statevector::normalize;
use vqsvm_core::{Complex64, Dataset, RawVector, SquareMatrix, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_matrix(n_qubits: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    SquareMatrix::from_fn(n_qubits, |_, _| {
        c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
    })
}

pub fn random_hermitian(n_qubits: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let m = random_matrix(n_qubits, rng);
    let h = m.adjoint();
    SquareMatrix::from_fn(n_qubits, |r, col| (m[(r, col)] + h[(r, col)]) * 0.5)
}

pub fn random_raw(n_qubits: usize, rng: &mut ChaCha8Rng) -> RawVector {
    RawVector::new(
        (0..1 << n_qubits)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
    .unwrap()
}

/// Haar-distributed pure state (normalized complex Gaussian vector).
pub fn random_state(n_qubits: usize, rng: &mut ChaCha8Rng) -> StateVector {
    normalize(&random_raw(n_qubits, rng)).unwrap().0
}

/// Plain dense product, independent of the crate's kernels.
pub fn dense_mul(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
    let d = a.dim();
    SquareMatrix::from_fn(a.n_qubits(), |r, col| (0..d).map(|k| a[(r, k)] * b[(k, col)]).sum())
}

pub fn dense_apply(m: &SquareMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.dim()).map(|r| (0..m.dim()).map(|k| m[(r, k)] * v[k]).sum()).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Truncated Taylor series of `exp(a)`.
pub fn dense_exp(a: &SquareMatrix) -> SquareMatrix {
    let mut sum = SquareMatrix::identity(a.n_qubits());
    let mut term = SquareMatrix::identity(a.n_qubits());
    for k in 1..60 {
        term = dense_mul(&term, a).scale(c(1.0 / k as f64, 0.0));
        sum = SquareMatrix::from_fn(a.n_qubits(), |r, col| sum[(r, col)] + term[(r, col)]);
    }
    sum
}

/// Two mirrored clusters, redrawn until the red center direction separates
/// the classes strictly (a separating line through the origin certifies
/// linear separability).
pub fn separable_clusters(n_red: usize, n_blue: usize, seed: u64) -> Dataset {
    for attempt in 0.. {
        let spec = ClusterSpec::new(2.0, n_red, n_blue, seed, seed.wrapping_mul(1000) + attempt);
        let d = generate(&spec).unwrap();
        let (cx, cy) = spec.red_center();
        let separated = d
            .points()
            .iter()
            .zip(d.labels())
            .all(|(p, &l)| (p[0] * cx + p[1] * cy) * l as f64 > 0.0);
        if separated {
            return d;
        }
    }
    unreachable!()
}
