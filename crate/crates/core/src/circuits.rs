//! Parameterized universal circuits on one, two and three qubits.
//!
//! Products are written in operator order: the rightmost factor acts on the
//! state first. Every circuit exists in two forms, a dense [`GateMatrix`]
//! (`u1`, `u2`, `u3`) and a gate-by-gate statevector kernel
//! ([`apply_circuit`]); the two are checked against each other in tests.
//!
//! Flat parameter layouts:
//!
//! * one qubit (3): `theta, phi, phi_z`
//! * two qubits (15): `A(3), B(3), theta_E, theta_F, theta_G, C(3), D(3)`
//! * three qubits (82): `A2(15), A1(3), UA(3), B2(15), B1(3), UC(4), C2(15),
//!   C1(3), UB(3), D2(15), D1(3)`, where the `X2`/`X1` blocks act on qubits
//!   (1,2) and 3, `UA`/`UB` weight `XXZ, YYZ, ZZZ` and `UC` weights
//!   `XXX, YYX, ZZX, IIX`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::math;
use crate::pauli::{self, Pauli, PauliString};
use crate::rng::seeded;
use crate::statevector::{Amplitudes, SquareMatrix, StateVector, ONE, ZERO};
use crate::{Error, Result};

pub const ONE_QUBIT_PARAMS: usize = 3;
pub const TWO_QUBIT_PARAMS: usize = 15;
pub const THREE_QUBIT_PARAMS: usize = 82;

const THREE_HALVES_PI: f64 = 1.5 * PI;

/// Parameter count of the universal circuit on `n_qubits`, if one exists.
pub fn param_count(n_qubits: usize) -> Option<usize> {
    match n_qubits {
        1 => Some(ONE_QUBIT_PARAMS),
        2 => Some(TWO_QUBIT_PARAMS),
        3 => Some(THREE_QUBIT_PARAMS),
        _ => None,
    }
}

/// Angles (radians) of a universal circuit in the layout documented at the
/// module level.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitParams {
    n_qubits: usize,
    theta: Vec<f64>,
}

impl CircuitParams {
    pub fn new(n_qubits: usize, theta: Vec<f64>) -> Result<Self> {
        let expected = param_count(n_qubits).ok_or(Error::UnsupportedQubits(n_qubits))?;
        if theta.len() != expected {
            return Err(Error::InvalidLength {
                what: "circuit parameters",
                expected,
                found: theta.len(),
            });
        }
        Ok(Self { n_qubits, theta })
    }

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        let len = param_count(n_qubits).ok_or(Error::UnsupportedQubits(n_qubits))?;
        Ok(Self {
            n_qubits,
            theta: alloc::vec![0.0; len],
        })
    }

    /// Angles for which the circuit is the identity up to a global phase.
    ///
    /// All-zero angles are not enough beyond one qubit: the fixed
    /// `R(3pi/2, .)` factors leave every two-qubit block equal to
    /// `e^{i pi/4} I ⊗ R(pi/2, 0)`, which `theta_D = -pi/2` cancels.
    pub fn identity(n_qubits: usize) -> Result<Self> {
        let mut p = Self::zeros(n_qubits)?;
        match n_qubits {
            2 => p.theta[12] = -FRAC_PI_2,
            3 => {
                for start in [0, 21, 43, 64] {
                    p.theta[start + 12] = -FRAC_PI_2;
                }
            }
            _ => {}
        }
        Ok(p)
    }

    /// Angles drawn uniformly from `[0, 2 pi)`.
    pub fn random(n_qubits: usize, seed: u64) -> Result<Self> {
        let len = param_count(n_qubits).ok_or(Error::UnsupportedQubits(n_qubits))?;
        let mut rng = seeded(seed, 0);
        let theta = (0..len).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
        Ok(Self { n_qubits, theta })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_theta(self) -> Vec<f64> {
        self.theta
    }
}

/// A dense unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix(SquareMatrix);

impl GateMatrix {
    /// Tolerance of the unitarity invariant.
    pub const UNITARITY_TOLERANCE: f64 = 1e-12;

    pub fn identity(n_qubits: usize) -> Self {
        Self(SquareMatrix::identity(n_qubits))
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Self) -> Result<Self> {
        Ok(Self(self.0.matmul(&rhs.0)?))
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kron(&rhs.0))
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        let out = crate::statevector::apply_matrix(&self.0, v)?;
        Ok(StateVector::from_unit(v.n_qubits(), out.into_vec()))
    }
}

type Gate2 = [[Complex64; 2]; 2];

fn rotation_entries(theta: f64, phi: f64) -> Gate2 {
    let (c, s) = (math::cos(theta / 2.0), math::sin(theta / 2.0));
    let minus_i_s = Complex64::new(0.0, -s);
    [
        [Complex64::new(c, 0.0), minus_i_s * Complex64::from_polar(1.0, -phi)],
        [minus_i_s * Complex64::from_polar(1.0, phi), Complex64::new(c, 0.0)],
    ]
}

// R(theta, phi) R_z(phi_z) in closed form.
fn u1_entries(theta: f64, phi: f64, phi_z: f64) -> Gate2 {
    let (c, s) = (math::cos(theta / 2.0), math::sin(theta / 2.0));
    let minus_i = Complex64::new(0.0, -1.0);
    [
        [
            Complex64::from_polar(c, -phi_z / 2.0),
            minus_i * Complex64::from_polar(s, phi_z / 2.0 - phi),
        ],
        [
            minus_i * Complex64::from_polar(s, -(phi_z / 2.0 - phi)),
            Complex64::from_polar(c, phi_z / 2.0),
        ],
    ]
}

fn gate2_matrix(g: Gate2) -> GateMatrix {
    GateMatrix(SquareMatrix::from_fn(1, |r, c| g[r][c]))
}

/// `R(theta, phi) = exp[-i theta (sigma_x cos phi + sigma_y sin phi) / 2]`.
pub fn rotation(theta: f64, phi: f64) -> GateMatrix {
    gate2_matrix(rotation_entries(theta, phi))
}

/// `R_z(phi_z) = exp[-i sigma_z phi_z / 2]`.
pub fn rotation_z(phi_z: f64) -> GateMatrix {
    gate2_matrix([
        [Complex64::from_polar(1.0, -phi_z / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, phi_z / 2.0)],
    ])
}

/// One-qubit universal circuit `R(theta, phi) R_z(phi_z)`.
pub fn u1(theta: f64, phi: f64, phi_z: f64) -> GateMatrix {
    gate2_matrix(u1_entries(theta, phi, phi_z))
}

/// `U_G = e^{-i pi/4} exp[(i pi/4) sigma_z ⊗ sigma_z] = diag(1, -i, -i, 1)`.
pub fn entangler() -> GateMatrix {
    let mut m = SquareMatrix::zeros(2);
    let minus_i = Complex64::new(0.0, -1.0);
    m[(0, 0)] = ONE;
    m[(1, 1)] = minus_i;
    m[(2, 2)] = minus_i;
    m[(3, 3)] = ONE;
    GateMatrix(m)
}

fn check_len(params: &[f64], expected: usize) -> Result<()> {
    if params.len() != expected {
        return Err(Error::InvalidLength {
            what: "circuit parameters",
            expected,
            found: params.len(),
        });
    }
    Ok(())
}

fn u1_slice(p: &[f64]) -> GateMatrix {
    u1(p[0], p[1], p[2])
}

/// Two-qubit universal circuit (15 parameters).
pub fn u2(params: &[f64]) -> Result<GateMatrix> {
    check_len(params, TWO_QUBIT_PARAMS)?;
    let g = entangler();
    let (theta_e, theta_f, theta_g) = (params[6], params[7], params[8]);
    let factors = [
        u1_slice(&params[0..3]).kron(&u1_slice(&params[3..6])),
        g.clone(),
        rotation(theta_e, 0.0).kron(&rotation(THREE_HALVES_PI, 0.0)),
        g.clone(),
        rotation(theta_f, FRAC_PI_2).kron(&rotation(THREE_HALVES_PI, theta_g)),
        g,
        u1_slice(&params[9..12]).kron(&u1_slice(&params[12..15])),
    ];
    product(factors)
}

fn product(factors: impl IntoIterator<Item = GateMatrix>) -> Result<GateMatrix> {
    let mut it = factors.into_iter();
    let first = it.next().expect("at least one factor");
    it.try_fold(first, |acc, f| acc.then_after(&f))
}

fn three_qubit_string(word: [Pauli; 3]) -> PauliString {
    PauliString::from_word(&word).expect("three-qubit word")
}

/// Generators of the two three-qubit blocks weighted by three angles.
pub fn block_ab_strings() -> [PauliString; 3] {
    use Pauli::*;
    [
        three_qubit_string([X, X, Z]),
        three_qubit_string([Y, Y, Z]),
        three_qubit_string([Z, Z, Z]),
    ]
}

/// Generators of the three-qubit block weighted by four angles.
pub fn block_c_strings() -> [PauliString; 4] {
    use Pauli::*;
    [
        three_qubit_string([X, X, X]),
        three_qubit_string([Y, Y, X]),
        three_qubit_string([Z, Z, X]),
        three_qubit_string([I, I, X]),
    ]
}

/// `exp[i sum_k theta_k Gamma_k]` for mutually commuting strings.
///
/// Each `Gamma_k` squares to the identity, so every factor is
/// `cos theta_k I + i sin theta_k Gamma_k` and commuting factors multiply to
/// the exponential of the sum.
pub fn pauli_exponential(n_qubits: usize, terms: &[(PauliString, f64)]) -> Result<GateMatrix> {
    check_commuting(n_qubits, terms)?;
    let mut acc = SquareMatrix::identity(n_qubits);
    for (p, theta) in terms {
        let (c, s) = (math::cos(*theta), math::sin(*theta));
        let dense = p.to_dense();
        let factor = SquareMatrix::from_fn(n_qubits, |r, col| {
            let diag = if r == col { Complex64::new(c, 0.0) } else { ZERO };
            diag + Complex64::new(0.0, s) * dense[(r, col)]
        });
        acc = acc.matmul(&factor)?;
    }
    Ok(GateMatrix(acc))
}

fn check_commuting(n_qubits: usize, terms: &[(PauliString, f64)]) -> Result<()> {
    for (i, (p, _)) in terms.iter().enumerate() {
        if p.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: p.n_qubits(),
            });
        }
        for (j, (q, _)) in terms.iter().enumerate().skip(i + 1) {
            if !p.commutes_with(q) {
                return Err(Error::NonCommuting {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(())
}

fn weighted<const K: usize>(strings: [PauliString; K], angles: &[f64]) -> [(PauliString, f64); K] {
    core::array::from_fn(|k| (strings[k], angles[k]))
}

/// Three-qubit universal circuit (82 parameters).
pub fn u3(params: &[f64]) -> Result<GateMatrix> {
    check_len(params, THREE_QUBIT_PARAMS)?;
    let layer = |two: &[f64], one: &[f64]| -> Result<GateMatrix> { Ok(u2(two)?.kron(&u1_slice(one))) };
    let factors = [
        layer(&params[0..15], &params[15..18])?,
        pauli_exponential(3, &weighted(block_ab_strings(), &params[18..21]))?,
        layer(&params[21..36], &params[36..39])?,
        pauli_exponential(3, &weighted(block_c_strings(), &params[39..43]))?,
        layer(&params[43..58], &params[58..61])?,
        pauli_exponential(3, &weighted(block_ab_strings(), &params[61..64]))?,
        layer(&params[64..79], &params[79..82])?,
    ];
    product(factors)
}

/// Dense unitary of a universal circuit.
pub fn universal(params: &CircuitParams) -> Result<GateMatrix> {
    match params.n_qubits {
        1 => Ok(u1_slice(&params.theta)),
        2 => u2(&params.theta),
        3 => u3(&params.theta),
        n => Err(Error::UnsupportedQubits(n)),
    }
}

// Statevector kernels. `qubit` counts from the left (0 = MSB).

fn apply_gate2(amps: &mut [Complex64], n_qubits: usize, qubit: usize, g: &Gate2) {
    let bit = 1 << (n_qubits - 1 - qubit);
    for i in 0..amps.len() {
        if i & bit != 0 {
            continue;
        }
        let (a, b) = (amps[i], amps[i | bit]);
        amps[i] = g[0][0] * a + g[0][1] * b;
        amps[i | bit] = g[1][0] * a + g[1][1] * b;
    }
}

fn apply_entangler(amps: &mut [Complex64], n_qubits: usize, first: usize) {
    let hi = 1 << (n_qubits - 1 - first);
    let lo = hi >> 1;
    let minus_i = Complex64::new(0.0, -1.0);
    for (i, a) in amps.iter_mut().enumerate() {
        if (i & hi != 0) != (i & lo != 0) {
            *a *= minus_i;
        }
    }
}

fn apply_pauli_rotation(amps: &mut [Complex64], p: &PauliString, theta: f64) {
    let mut flipped = alloc::vec![ZERO; amps.len()];
    pauli::accumulate_pauli(p, Complex64::new(0.0, math::sin(theta)), amps, &mut flipped);
    let c = math::cos(theta);
    for (a, f) in amps.iter_mut().zip(&flipped) {
        *a = *a * c + f;
    }
}

fn apply_u2_kernel(amps: &mut [Complex64], n_qubits: usize, first: usize, p: &[f64]) {
    let second = first + 1;
    apply_gate2(amps, n_qubits, first, &u1_entries(p[9], p[10], p[11]));
    apply_gate2(amps, n_qubits, second, &u1_entries(p[12], p[13], p[14]));
    apply_entangler(amps, n_qubits, first);
    apply_gate2(amps, n_qubits, first, &rotation_entries(p[7], FRAC_PI_2));
    apply_gate2(amps, n_qubits, second, &rotation_entries(THREE_HALVES_PI, p[8]));
    apply_entangler(amps, n_qubits, first);
    apply_gate2(amps, n_qubits, first, &rotation_entries(p[6], 0.0));
    apply_gate2(amps, n_qubits, second, &rotation_entries(THREE_HALVES_PI, 0.0));
    apply_entangler(amps, n_qubits, first);
    apply_gate2(amps, n_qubits, first, &u1_entries(p[0], p[1], p[2]));
    apply_gate2(amps, n_qubits, second, &u1_entries(p[3], p[4], p[5]));
}

fn apply_u3_kernel(amps: &mut [Complex64], p: &[f64]) {
    let layer = |amps: &mut [Complex64], two: &[f64], one: &[f64]| {
        apply_u2_kernel(amps, 3, 0, two);
        apply_gate2(amps, 3, 2, &u1_entries(one[0], one[1], one[2]));
    };
    let exponential = |amps: &mut [Complex64], strings: &[PauliString], angles: &[f64]| {
        for (s, &t) in strings.iter().zip(angles) {
            apply_pauli_rotation(amps, s, t);
        }
    };
    layer(amps, &p[64..79], &p[79..82]);
    exponential(amps, &block_ab_strings(), &p[61..64]);
    layer(amps, &p[43..58], &p[58..61]);
    exponential(amps, &block_c_strings(), &p[39..43]);
    layer(amps, &p[21..36], &p[36..39]);
    exponential(amps, &block_ab_strings(), &p[18..21]);
    layer(amps, &p[0..15], &p[15..18]);
}

/// Applies the universal circuit to `v` gate by gate, never forming the
/// `2^N x 2^N` unitary.
pub fn apply_circuit(c: &CircuitParams, v: &StateVector) -> Result<StateVector> {
    if c.n_qubits != v.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: c.n_qubits,
            found: v.n_qubits(),
        });
    }
    let mut amps = v.amplitudes().to_vec();
    run_kernel(c.n_qubits, &c.theta, &mut amps);
    Ok(StateVector::from_unit(c.n_qubits, amps))
}

/// `U(theta)|0>>` written into `amps`; used by the training loops, which
/// evaluate it for every finite-difference probe.
pub(crate) fn prepare_into(n_qubits: usize, theta: &[f64], amps: &mut [Complex64]) {
    amps.fill(ZERO);
    amps[0] = ONE;
    run_kernel(n_qubits, theta, amps);
}

fn run_kernel(n_qubits: usize, theta: &[f64], amps: &mut [Complex64]) {
    match n_qubits {
        1 => apply_gate2(amps, 1, 0, &u1_entries(theta[0], theta[1], theta[2])),
        2 => apply_u2_kernel(amps, 2, 0, theta),
        3 => apply_u3_kernel(amps, theta),
        _ => unreachable!("CircuitParams guarantees 1..=3 qubits"),
    }
}
