//! Pauli strings, their bitmask action on statevectors, and the expansion
//! `F = sum_j c_j Gamma_j` of an arbitrary matrix over all `4^N` strings.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::circuits::apply_circuit;
use crate::statevector::{self, Amplitudes, RawVector, SquareMatrix, StateVector, ONE, ZERO};
use crate::varprep::{self, GdSchedule};
use crate::{Error, Result};

/// Coefficients with magnitude at or below this are dropped by [`expand`].
pub const ZERO_COEFFICIENT: f64 = 1e-14;

/// Largest register the string index is defined for.
pub const MAX_QUBITS: usize = 16;

/// Single-qubit factor. The discriminant is the base-4 digit of the factor in
/// [`PauliString::index`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub fn from_digit(d: usize) -> Self {
        match d & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '0' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An `N`-fold tensor product of `I, X, Y, Z`, factor 1 (leftmost) acting on
/// qubit 1, the most significant bit.
///
/// `index` is the word read as a base-4 number, factor 1 most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    index: usize,
}

impl PauliString {
    pub fn new(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        if index >= 1 << (2 * n_qubits) {
            return Err(Error::InvalidPauli("index out of range"));
        }
        Ok(Self { n_qubits, index })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, index: 0 }
    }

    pub fn from_word(word: &[Pauli]) -> Result<Self> {
        let index = word.iter().fold(0usize, |acc, &p| (acc << 2) | p as usize);
        Self::new(word.len(), index)
    }

    /// All `4^N` strings in index order.
    pub fn all(n_qubits: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n_qubits)).map(move |index| PauliString { n_qubits, index })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Factor acting on qubit `k + 1` (`k` counts from the left, 0-based).
    pub fn factor(&self, k: usize) -> Pauli {
        Pauli::from_digit(self.index >> (2 * (self.n_qubits - 1 - k)))
    }

    pub fn word(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|k| self.factor(k)).collect()
    }

    /// Basis-index bits flipped by the string (positions holding X or Y).
    pub fn x_mask(&self) -> usize {
        self.bit_mask(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Basis-index bits that contribute a sign (positions holding Y or Z).
    pub fn z_mask(&self) -> usize {
        self.bit_mask(|p| matches!(p, Pauli::Y | Pauli::Z))
    }

    fn bit_mask(&self, pick: impl Fn(Pauli) -> bool) -> usize {
        (0..self.n_qubits).fold(0, |mask, bit| {
            if pick(Pauli::from_digit(self.index >> (2 * bit))) {
                mask | 1 << bit
            } else {
                mask
            }
        })
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask() & self.z_mask()).count_ones()
    }

    /// `Gamma |p>> = phase(p) |p ^ x_mask>>`, with
    /// `phase(p) = i^{#Y} (-1)^{popcount(p & z_mask)}`.
    pub fn phase(&self, basis: usize) -> Complex64 {
        phase_of(i_power(self.y_count()), self.z_mask(), basis)
    }

    /// Two strings commute iff they anticommute on an even number of factors.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = (0..self.n_qubits.min(other.n_qubits))
            .filter(|&k| {
                let (a, b) = (self.factor(k), other.factor(k));
                a != Pauli::I && b != Pauli::I && a != b
            })
            .count();
        anti % 2 == 0
    }

    pub fn to_dense(&self) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(self.n_qubits);
        let x = self.x_mask();
        for p in 0..m.dim() {
            m[(p ^ x, p)] = self.phase(p);
        }
        m
    }
}

fn i_power(k: u32) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => -ONE,
        _ => Complex64::new(0.0, -1.0),
    }
}

#[inline]
fn phase_of(base: Complex64, z_mask: usize, basis: usize) -> Complex64 {
    if (basis & z_mask).count_ones() % 2 == 0 {
        base
    } else {
        -base
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n_qubits {
            write!(f, "{}", self.factor(k).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let word = s
            .trim()
            .chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::InvalidPauli("unknown factor"))?;
        if word.is_empty() {
            return Err(Error::InvalidPauli("empty word"));
        }
        Self::from_word(&word)
    }
}

/// Applies `p` to `v` in `O(2^N)` without forming a matrix.
pub fn apply_pauli<A: Amplitudes + ?Sized>(p: &PauliString, v: &A) -> Result<RawVector> {
    if p.n_qubits != v.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: p.n_qubits,
            found: v.n_qubits(),
        });
    }
    let mut out = RawVector::zeros(p.n_qubits);
    accumulate_pauli(p, ONE, v.amplitudes(), out.as_mut_slice());
    Ok(out)
}

/// `out += coeff * Gamma * amps`.
pub(crate) fn accumulate_pauli(
    p: &PauliString,
    coeff: Complex64,
    amps: &[Complex64],
    out: &mut [Complex64],
) {
    let x = p.x_mask();
    let z = p.z_mask();
    let base = coeff * i_power(p.y_count());
    for (i, a) in amps.iter().enumerate() {
        out[i ^ x] += phase_of(base, z, i) * a;
    }
}

/// `sum_j c_j Gamma_j` with distinct strings and no zero coefficients, kept in
/// string-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliExpansion {
    n_qubits: usize,
    terms: Vec<(PauliString, Complex64)>,
}

impl PauliExpansion {
    /// Builds an expansion; repeated strings are summed and exact zeros removed.
    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<usize, Complex64> = BTreeMap::new();
        for (p, c) in terms {
            if p.n_qubits != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    found: p.n_qubits,
                });
            }
            *merged.entry(p.index).or_insert(ZERO) += c;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != ZERO)
            .map(|(index, c)| (PauliString { n_qubits, index }, c))
            .collect();
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(PauliString, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `p`, zero when absent.
    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms
            .binary_search_by_key(&p.index, |(q, _)| q.index)
            .map(|i| self.terms[i].1)
            .unwrap_or(ZERO)
    }
}

/// `c_j = Tr[Gamma_j m] / 2^N` for every string, dropping
/// `|c_j| <= ZERO_COEFFICIENT`.
///
/// `Gamma_j` has one nonzero per column, so each trace is an `O(2^N)` sum
/// `sum_p phase_j(p) m[p][p ^ x_j]`.
pub fn expand(m: &SquareMatrix) -> PauliExpansion {
    let n = m.n_qubits();
    let dim = m.dim();
    let scale = 1.0 / dim as f64;
    let terms = PauliString::all(n)
        .filter_map(|p| {
            let x = p.x_mask();
            let z = p.z_mask();
            let base = i_power(p.y_count());
            let trace = (0..dim).fold(ZERO, |acc, row| acc + phase_of(base, z, row) * m[(row, row ^ x)]);
            let c = trace * scale;
            (c.norm() > ZERO_COEFFICIENT).then_some((p, c))
        })
        .collect();
    PauliExpansion { n_qubits: n, terms }
}

/// Dense `sum_j c_j Gamma_j`.
pub fn reconstruct(e: &PauliExpansion) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(e.n_qubits);
    for (p, c) in &e.terms {
        let x = p.x_mask();
        for col in 0..m.dim() {
            m[(col ^ x, col)] += c * p.phase(col);
        }
    }
    m
}

/// `sum_j c_j Gamma_j v`, one bitmask pass per term.
pub fn apply_expansion<A: Amplitudes + ?Sized>(e: &PauliExpansion, v: &A) -> Result<RawVector> {
    if e.n_qubits != v.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: e.n_qubits,
            found: v.n_qubits(),
        });
    }
    let mut out = RawVector::zeros(e.n_qubits);
    for (p, c) in &e.terms {
        accumulate_pauli(p, *c, v.amplitudes(), out.as_mut_slice());
    }
    Ok(out)
}

/// The NOT-gate layer `U_X^(q)`: `sigma_x` on every qubit whose bit is set in
/// `q`, so that it maps `|0>>` to `|q>>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotMask {
    n_qubits: usize,
    target: usize,
}

impl NotMask {
    pub fn new(n_qubits: usize, target: usize) -> Result<Self> {
        if target >= 1 << n_qubits {
            return Err(Error::InvalidParameter("NOT mask target out of range"));
        }
        Ok(Self { n_qubits, target })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Qubits (1-based, qubit 1 = MSB) that receive a NOT gate.
    pub fn flipped_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|k| self.target >> (self.n_qubits - 1 - k) & 1 == 1)
            .map(|k| k + 1)
            .collect()
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: v.n_qubits(),
            });
        }
        let src = v.amplitudes();
        let amps = (0..src.len()).map(|i| src[i ^ self.target]).collect();
        Ok(StateVector::from_unit(self.n_qubits, amps))
    }
}

/// How the normalized columns `|f_q>/||f_q||` are prepared for
/// [`coefficient_via_circuit`].
#[derive(Clone, Debug, PartialEq)]
pub enum CircuitBackend {
    /// Inject the column state directly.
    Exact,
    /// Train a universal circuit `U_{f_q}` with `U_{f_q}|0>> ~ |f_q>`. Only
    /// defined for `N <= 3`.
    Variational { schedule: GdSchedule, seed: u64 },
}

/// Preparation cost a variational column must reach before it is used.
pub const VARIATIONAL_COLUMN_TOLERANCE: f64 = 1e-6;

/// Evaluates `c_j` as
/// `2^-N sum_q ||f_q|| <<0| U_X^(q) Gamma_j U_{f_q} |0>>`.
///
/// Zero columns contribute nothing. The variational backend trains each
/// column's circuit separately and then rotates away the global phase the
/// fidelity cost cannot see, by aligning with the target column.
pub fn coefficient_via_circuit(
    m: &SquareMatrix,
    j: &PauliString,
    backend: &CircuitBackend,
) -> Result<Complex64> {
    let n = m.n_qubits();
    if j.n_qubits != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.n_qubits,
        });
    }
    if matches!(backend, CircuitBackend::Variational { .. }) && n > 3 {
        return Err(Error::UnsupportedQubits(n));
    }
    let zero = StateVector::zero_state(n);
    let mut sum = ZERO;
    for q in 0..m.dim() {
        let (column, weight) = match statevector::normalize(&m.column(q)) {
            Ok(v) => v,
            Err(Error::ZeroNorm) => continue,
            Err(e) => return Err(e),
        };
        let prepared = match backend {
            CircuitBackend::Exact => column,
            CircuitBackend::Variational { schedule, seed } => {
                let (params, trace) = varprep::train_state_prep(
                    &column,
                    None,
                    schedule,
                    seed.wrapping_add(q as u64),
                )?;
                if trace.final_cost >= VARIATIONAL_COLUMN_TOLERANCE {
                    return Err(Error::NotConverged {
                        cost: trace.final_cost,
                    });
                }
                let state = apply_circuit(&params, &zero)?;
                let overlap = statevector::inner_product(&state, &column)?;
                state.with_phase(overlap.arg())
            }
        };
        let bra = NotMask::new(n, q)?.apply(&zero)?;
        let ket = apply_pauli(j, &prepared)?;
        sum += statevector::inner_product(&bra, &ket)? * weight;
    }
    Ok(sum / m.dim() as f64)
}
