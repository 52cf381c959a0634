//! Dense complex vectors and small dense matrices indexed by qubit basis
//! states.
//!
//! Basis index `q` corresponds to `|n_1 n_2 ... n_N>` with `n_1` the most
//! significant bit. [`StateVector`] is always unit-norm; [`RawVector`] carries
//! arbitrary amplitudes (matrix columns, right-hand sides, unnormalized
//! products).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::math;
use crate::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on `| ||psi|| - 1 |` accepted by [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Anything that exposes `2^N` amplitudes.
pub trait Amplitudes {
    fn n_qubits(&self) -> usize;
    fn amplitudes(&self) -> &[Complex64];

    fn norm(&self) -> f64 {
        norm_of(self.amplitudes())
    }
}

pub(crate) fn norm_of(amps: &[Complex64]) -> f64 {
    math::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>())
}

/// Number of qubits for a register of `len` amplitudes.
pub fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Unnormalized vector of `2^N` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct RawVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl RawVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        Ok(Self { n_qubits, amps })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amps: vec![ZERO; 1 << n_qubits],
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut v = Self::zeros(n_qubits);
        v.amps[index] = ONE;
        v
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * s).collect(),
        }
    }
}

impl Amplitudes for RawVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Unit-norm state of `N` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amps`, rejecting anything whose norm is not 1 within
    /// [`NORM_TOLERANCE`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        let norm = norm_of(&amps);
        if math::abs(norm - 1.0) > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    /// `|q>>` for `q` in `[0, 2^N)`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    /// Haar-random state: a normalized vector of independent complex
    /// Gaussians drawn with `seed`.
    pub fn random(n_qubits: usize, seed: u64) -> Self {
        let mut rng = crate::rng::seeded(seed, 2);
        let mut amps: Vec<Complex64> = (0..1usize << n_qubits)
            .map(|_| {
                let (re, im) = crate::rng::normal_pair(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let n = norm_of(&amps);
        amps.iter_mut().for_each(|a| *a /= n);
        Self { n_qubits, amps }
    }

    /// `|0...0>>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    // Callers guarantee unit norm (unitary images of unit vectors).
    pub(crate) fn from_unit(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn to_raw(&self) -> RawVector {
        RawVector {
            n_qubits: self.n_qubits,
            amps: self.amps.clone(),
        }
    }

    pub fn into_raw(self) -> RawVector {
        RawVector {
            n_qubits: self.n_qubits,
            amps: self.amps,
        }
    }

    /// The same ray multiplied by a global phase `e^{i phi}`.
    pub fn with_phase(&self, phi: f64) -> Self {
        let p = Complex64::from_polar(1.0, phi);
        Self {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * p).collect(),
        }
    }
}

impl Amplitudes for StateVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

fn check_same<A: Amplitudes + ?Sized, B: Amplitudes + ?Sized>(a: &A, b: &B) -> Result<()> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.n_qubits(),
            found: b.n_qubits(),
        });
    }
    Ok(())
}

/// `<a|b> = sum_q conj(a_q) b_q`.
pub fn inner_product<A, B>(a: &A, b: &B) -> Result<Complex64>
where
    A: Amplitudes + ?Sized,
    B: Amplitudes + ?Sized,
{
    check_same(a, b)?;
    Ok(dot(a.amplitudes(), b.amplitudes()))
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Splits `v` into its unit direction and its norm.
pub fn normalize<A: Amplitudes + ?Sized>(v: &A) -> Result<(StateVector, f64)> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let amps = v.amplitudes().iter().map(|a| a / norm).collect();
    Ok((
        StateVector {
            n_qubits: v.n_qubits(),
            amps,
        },
        norm,
    ))
}

/// Square `2^N x 2^N` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl SquareMatrix {
    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut m = Self::zeros(n_qubits);
        for i in 0..m.dim() {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Row-major entries; the length must be `4^N` for some `N >= 1`.
    pub fn from_row_major(entries: Vec<Complex64>) -> Result<Self> {
        let len = entries.len();
        let dim = isqrt(len);
        if dim * dim != len {
            return Err(Error::InvalidLength {
                what: "square matrix entries",
                expected: dim * dim,
                found: len,
            });
        }
        let n_qubits = qubits_for_len(dim)?;
        Ok(Self { n_qubits, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::InvalidLength {
                    what: "matrix row",
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::from_row_major(entries)
    }

    pub fn from_fn(n_qubits: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let dim = 1 << n_qubits;
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { n_qubits, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        let d = self.dim();
        &self.entries[r * d..(r + 1) * d]
    }

    /// Column `q` as the vector `|f_q>`.
    pub fn column(&self, q: usize) -> RawVector {
        let d = self.dim();
        RawVector {
            n_qubits: self.n_qubits,
            amps: (0..d).map(|r| self.entries[r * d + q]).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: rhs.n_qubits,
            });
        }
        let d = self.dim();
        let mut out = Self::zeros(self.n_qubits);
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.entries[k * d..(k + 1) * d];
                let out_row = &mut out.entries[r * d..(r + 1) * d];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        Self::from_fn(self.n_qubits, |r, c| self.entries[c * d + r].conj())
    }

    /// `self ⊗ rhs`; `self` acts on the leading (more significant) qubits.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (da, db) = (self.dim(), rhs.dim());
        Self::from_fn(self.n_qubits + rhs.n_qubits, |r, c| {
            self.entries[(r / db) * da + c / db] * rhs.entries[(r % db) * db + c % db]
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    /// Entrywise `max |a - b|`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U^dagger U - I)_{rc}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.entries[k * d + r].conj() * self.entries[k * d + c];
                }
                if r == c {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.dim() + c]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        let d = self.dim();
        &mut self.entries[r * d + c]
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = math::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Plain matrix-vector product, no normalization.
pub fn apply_matrix<A: Amplitudes + ?Sized>(m: &SquareMatrix, v: &A) -> Result<RawVector> {
    if m.n_qubits != v.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: m.n_qubits,
            found: v.n_qubits(),
        });
    }
    let amps = v.amplitudes();
    let out = (0..m.dim()).map(|r| {
        m.row(r)
            .iter()
            .zip(amps)
            .fold(ZERO, |acc, (a, b)| acc + a * b)
    });
    Ok(RawVector {
        n_qubits: m.n_qubits,
        amps: out.collect(),
    })
}

/// Embeds a `dim x dim` system (row-major `matrix`, right-hand side `rhs`)
/// into the smallest qubit register that holds it.
///
/// The padding block is the identity and the padded right-hand side entries
/// are zero, so the padded solution is the original one followed by zeros.
/// A 1x1 system is padded to one qubit.
pub fn pad_to_power_of_two(
    dim: usize,
    matrix: &[Complex64],
    rhs: &[Complex64],
) -> Result<(SquareMatrix, RawVector)> {
    if dim == 0 {
        return Err(Error::InvalidLength {
            what: "system dimension",
            expected: 1,
            found: 0,
        });
    }
    if matrix.len() != dim * dim {
        return Err(Error::InvalidLength {
            what: "matrix entries",
            expected: dim * dim,
            found: matrix.len(),
        });
    }
    if rhs.len() != dim {
        return Err(Error::InvalidLength {
            what: "right-hand side",
            expected: dim,
            found: rhs.len(),
        });
    }
    let padded = dim.next_power_of_two().max(2);
    let n_qubits = padded.trailing_zeros() as usize;
    let m = SquareMatrix::from_fn(n_qubits, |r, c| {
        if r < dim && c < dim {
            matrix[r * dim + c]
        } else if r == c {
            ONE
        } else {
            ZERO
        }
    });
    let mut v = RawVector::zeros(n_qubits);
    v.amps[..dim].copy_from_slice(rhs);
    Ok((m, v))
}
