//! Variational solution of `F |psi_in> = c |psi_out>` over the Pauli
//! expansion of `F`, plus a dense elimination oracle.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::circuits::{self, CircuitParams};
use crate::math;
use crate::pauli::{self, PauliExpansion};
use crate::rng::seeded;
use crate::statevector::{self, dot, norm_of, Amplitudes, RawVector, SquareMatrix, StateVector, ZERO};
use crate::varprep::{self, clamp_cost, GdSchedule, TracePoint, TrainingTrace};
use crate::{Error, Result};

/// `||F psi||` below this is treated as annihilation of the trial state.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// Pivots at or below this magnitude make [`solve_exact`] fail.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// The expansion regrouped by flip pattern: all strings sharing an X/Y mask
/// permute amplitudes identically, so their phases sum into one diagonal.
#[derive(Clone, Debug, PartialEq)]
struct FlipGroups {
    groups: Vec<(usize, Vec<Complex64>)>,
}

impl FlipGroups {
    fn new(e: &PauliExpansion) -> Self {
        let dim = 1 << e.n_qubits();
        let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
        for (p, c) in e.terms() {
            let x = p.x_mask();
            let diag = match groups.iter_mut().find(|(m, _)| *m == x) {
                Some((_, d)) => d,
                None => {
                    groups.push((x, vec![ZERO; dim]));
                    &mut groups.last_mut().unwrap().1
                }
            };
            for (i, d) in diag.iter_mut().enumerate() {
                *d += c * p.phase(i);
            }
        }
        groups.sort_by_key(|(m, _)| *m);
        Self { groups }
    }

    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        for (x, diag) in &self.groups {
            for (i, (d, a)) in diag.iter().zip(v).enumerate() {
                out[i ^ x] += d * a;
            }
        }
    }
}

/// A linear system `F x = y` with `F` held as a Pauli expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProblem {
    expansion: PauliExpansion,
    rhs: RawVector,
    y_norm: f64,
    target: StateVector,
    groups: FlipGroups,
}

impl LinearProblem {
    pub fn new(expansion: PauliExpansion, rhs: RawVector) -> Result<Self> {
        if expansion.n_qubits() != rhs.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: expansion.n_qubits(),
                found: rhs.n_qubits(),
            });
        }
        let (target, y_norm) = statevector::normalize(&rhs)?;
        let groups = FlipGroups::new(&expansion);
        Ok(Self {
            expansion,
            rhs,
            y_norm,
            target,
            groups,
        })
    }

    /// Expands `m` and wraps it with `rhs`.
    pub fn from_matrix(m: &SquareMatrix, rhs: RawVector) -> Result<Self> {
        Self::new(pauli::expand(m), rhs)
    }

    pub fn n_qubits(&self) -> usize {
        self.rhs.n_qubits()
    }

    pub fn expansion(&self) -> &PauliExpansion {
        &self.expansion
    }

    pub fn rhs(&self) -> &RawVector {
        &self.rhs
    }

    pub fn y_norm(&self) -> f64 {
        self.y_norm
    }

    /// `|psi_out> = y / ||y||`.
    pub fn target(&self) -> &StateVector {
        &self.target
    }

    /// `F v` through the expansion.
    pub fn apply<A: Amplitudes + ?Sized>(&self, v: &A) -> Result<RawVector> {
        if v.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                found: v.n_qubits(),
            });
        }
        let mut out = RawVector::zeros(self.n_qubits());
        self.groups.apply_into(v.amplitudes(), out.as_mut_slice());
        Ok(out)
    }

    /// `||F x - y|| / ||y||`.
    pub fn relative_residual(&self, x: &[Complex64]) -> Result<f64> {
        let x = RawVector::new(x.to_vec())?;
        let fx = self.apply(&x)?;
        let diff: Vec<Complex64> = fx
            .amplitudes()
            .iter()
            .zip(self.rhs.amplitudes())
            .map(|(a, b)| a - b)
            .collect();
        Ok(norm_of(&diff) / self.y_norm)
    }

    /// `1 - |<psi_out~|psi_out>|^2` for a trial direction; `None` when the
    /// trial is annihilated by `F`. `v` need not be normalized.
    fn cost_of(&self, v: &[Complex64], scratch: &mut [Complex64]) -> Option<f64> {
        self.groups.apply_into(v, scratch);
        let c = norm_of(scratch);
        if c < DEGENERATE_NORM * norm_of(v) || c == 0.0 {
            return None;
        }
        let overlap = dot(scratch, self.target.amplitudes()) / c;
        Some(clamp_cost(1.0 - overlap.norm_sqr()))
    }
}

/// `F |trial> = c |psi_out~>`; returns the normalized image and `c`.
pub fn forward(problem: &LinearProblem, trial: &StateVector) -> Result<(StateVector, f64)> {
    let image = problem.apply(trial)?;
    let c = image.norm();
    if c < DEGENERATE_NORM {
        return Err(Error::DegenerateTrial);
    }
    let (out, _) = statevector::normalize(&image)?;
    Ok((out, c))
}

/// Fidelity cost of a trial state against the problem's normalized
/// right-hand side.
pub fn cost(problem: &LinearProblem, trial: &StateVector) -> Result<f64> {
    let (out, _) = forward(problem, trial)?;
    varprep::fidelity_cost(&out, problem.target())
}

/// Parameterization of the trial state `|psi_in~>`.
#[derive(Clone, Debug, PartialEq)]
pub enum TrialState {
    /// Angles of a universal circuit applied to `|0>>` (`N <= 3`).
    Circuit(CircuitParams),
    /// Amplitudes updated directly and renormalized after every step. With
    /// `real_only` the imaginary parts stay zero.
    Direct {
        amplitudes: Vec<Complex64>,
        real_only: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialMode {
    Circuit,
    Direct,
}

impl TrialState {
    pub fn random_circuit(n_qubits: usize, seed: u64) -> Result<Self> {
        Ok(Self::Circuit(CircuitParams::random(n_qubits, seed)?))
    }

    /// Uniform entries in `[-1, 1)` (both parts unless `real_only`),
    /// normalized.
    pub fn random_direct(n_qubits: usize, real_only: bool, seed: u64) -> Self {
        let mut rng = seeded(seed, 1);
        let mut amps: Vec<Complex64> = (0..1usize << n_qubits)
            .map(|_| {
                let re = rng.random::<f64>() * 2.0 - 1.0;
                let im = if real_only {
                    0.0
                } else {
                    rng.random::<f64>() * 2.0 - 1.0
                };
                Complex64::new(re, im)
            })
            .collect();
        let n = norm_of(&amps);
        amps.iter_mut().for_each(|a| *a /= n);
        Self::Direct {
            amplitudes: amps,
            real_only,
        }
    }

    pub fn mode(&self) -> TrialMode {
        match self {
            Self::Circuit(_) => TrialMode::Circuit,
            Self::Direct { .. } => TrialMode::Direct,
        }
    }

    pub fn n_qubits(&self) -> Result<usize> {
        match self {
            Self::Circuit(p) => Ok(p.n_qubits()),
            Self::Direct { amplitudes, .. } => statevector::qubits_for_len(amplitudes.len()),
        }
    }

    /// The normalized trial state.
    pub fn realize(&self) -> Result<StateVector> {
        match self {
            Self::Circuit(p) => circuits::apply_circuit(p, &StateVector::zero_state(p.n_qubits())),
            Self::Direct { amplitudes, .. } => {
                let raw = RawVector::new(amplitudes.clone())?;
                Ok(statevector::normalize(&raw)?.0)
            }
        }
    }

    fn to_params(&self) -> Vec<f64> {
        match self {
            Self::Circuit(p) => p.theta().to_vec(),
            Self::Direct {
                amplitudes,
                real_only: true,
            } => amplitudes.iter().map(|a| a.re).collect(),
            Self::Direct {
                amplitudes,
                real_only: false,
            } => amplitudes.iter().flat_map(|a| [a.re, a.im]).collect(),
        }
    }
}

fn amplitudes_from_params(params: &[f64], real_only: bool, out: &mut [Complex64]) {
    if real_only {
        for (o, &p) in out.iter_mut().zip(params) {
            *o = Complex64::new(p, 0.0);
        }
    } else {
        for (o, p) in out.iter_mut().zip(params.chunks_exact(2)) {
            *o = Complex64::new(p[0], p[1]);
        }
    }
}

fn renormalize(params: &mut [f64]) {
    let n = math::sqrt(params.iter().map(|p| p * p).sum::<f64>());
    if n > 0.0 {
        params.iter_mut().for_each(|p| *p /= n);
    }
}

/// Result of a linear solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution {
    /// Recovered unnormalized solution.
    pub x: Vec<Complex64>,
    pub final_cost: f64,
    /// `||F x - y|| / ||y||`.
    pub residual: f64,
    pub trace: TrainingTrace,
    pub converged: bool,
}

impl LinearSolution {
    pub fn steps(&self) -> usize {
        self.trace.steps()
    }
}

/// Minimizes `E = 1 - |<psi_out~|psi_out>|^2` over the trial parameterization
/// by steepest descent, then rescales the found direction.
///
/// The fidelity cost cannot see the scale or phase of the solution. The
/// returned `x = s |psi_in~>` uses `s = <F psi_in~, y> / ||F psi_in~||^2`, the
/// least-squares optimum along that direction, so that
/// `residual^2 = final_cost`.
pub fn solve_variational(
    problem: &LinearProblem,
    trial0: TrialState,
    schedule: &GdSchedule,
) -> Result<LinearSolution> {
    schedule.validate()?;
    let n = problem.n_qubits();
    let trial_n = trial0.n_qubits()?;
    if trial_n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: trial_n,
        });
    }
    let start = trial0.realize()?;
    forward(problem, &start)?;

    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    let mut image = vec![ZERO; dim];
    let trace = match &trial0 {
        TrialState::Circuit(_) => {
            let f = |theta: &[f64]| {
                circuits::prepare_into(n, theta, &mut amps);
                problem.cost_of(&amps, &mut image).unwrap_or(1.0)
            };
            varprep::steepest_descent(trial0.to_params(), schedule, f, |_| {})
        }
        TrialState::Direct { real_only, .. } => {
            let real_only = *real_only;
            let f = |p: &[f64]| {
                amplitudes_from_params(p, real_only, &mut amps);
                problem.cost_of(&amps, &mut image).unwrap_or(1.0)
            };
            varprep::steepest_descent(trial0.to_params(), schedule, f, renormalize)
        }
    };

    let trial = match &trial0 {
        TrialState::Circuit(_) => TrialState::Circuit(CircuitParams::new(n, trace.final_params.clone())?),
        TrialState::Direct { real_only, .. } => {
            let mut a = vec![ZERO; dim];
            amplitudes_from_params(&trace.final_params, *real_only, &mut a);
            TrialState::Direct {
                amplitudes: a,
                real_only: *real_only,
            }
        }
    };
    let direction = trial.realize()?;
    let image = problem.apply(&direction)?;
    let image_norm_sqr = image.norm() * image.norm();
    if image_norm_sqr < DEGENERATE_NORM * DEGENERATE_NORM {
        return Err(Error::DegenerateTrial);
    }
    let scale = statevector::inner_product(&image, problem.rhs())? / image_norm_sqr;
    let x: Vec<Complex64> = direction.amplitudes().iter().map(|a| a * scale).collect();
    let residual = problem.relative_residual(&x)?;
    let final_cost = trace.final_cost;
    let converged = trace.converged;
    Ok(LinearSolution {
        x,
        final_cost,
        residual,
        trace,
        converged,
    })
}

/// Dense Gaussian elimination with partial pivoting on a row-major
/// `dim x dim` system.
pub fn dense_solve(dim: usize, matrix: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    if matrix.len() != dim * dim || rhs.len() != dim {
        return Err(Error::InvalidLength {
            what: "dense system",
            expected: dim * dim,
            found: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    let mut b = rhs.to_vec();
    for k in 0..dim {
        let pivot_row = (k..dim)
            .max_by(|&i, &j| a[i * dim + k].norm().total_cmp(&a[j * dim + k].norm()))
            .unwrap();
        if a[pivot_row * dim + k].norm() <= PIVOT_THRESHOLD {
            return Err(Error::Singular { pivot: k });
        }
        if pivot_row != k {
            for c in 0..dim {
                a.swap(k * dim + c, pivot_row * dim + c);
            }
            b.swap(k, pivot_row);
        }
        let pivot = a[k * dim + k];
        for r in k + 1..dim {
            let factor = a[r * dim + k] / pivot;
            if factor == ZERO {
                continue;
            }
            for c in k..dim {
                let akc = a[k * dim + c];
                a[r * dim + c] -= factor * akc;
            }
            let bk = b[k];
            b[r] -= factor * bk;
        }
    }
    let mut x = vec![ZERO; dim];
    for k in (0..dim).rev() {
        let tail = (k + 1..dim).fold(ZERO, |acc, c| acc + a[k * dim + c] * x[c]);
        x[k] = (b[k] - tail) / a[k * dim + k];
    }
    Ok(x)
}

/// Classical reference solve of `m x = rhs`.
pub fn solve_exact(m: &SquareMatrix, rhs: &RawVector) -> Result<LinearSolution> {
    if m.n_qubits() != rhs.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: m.n_qubits(),
            found: rhs.n_qubits(),
        });
    }
    let x = dense_solve(m.dim(), m.entries(), rhs.amplitudes())?;
    let xv = RawVector::new(x.clone())?;
    let fx = statevector::apply_matrix(m, &xv)?;
    let diff: Vec<Complex64> = fx
        .amplitudes()
        .iter()
        .zip(rhs.amplitudes())
        .map(|(a, b)| a - b)
        .collect();
    let y_norm = rhs.norm();
    if y_norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let residual = norm_of(&diff) / y_norm;
    let final_cost = match (statevector::normalize(&fx), statevector::normalize(rhs)) {
        (Ok((a, _)), Ok((b, _))) => varprep::fidelity_cost(&a, &b)?,
        _ => 1.0,
    };
    Ok(LinearSolution {
        x,
        final_cost,
        residual,
        trace: TrainingTrace {
            points: vec![TracePoint {
                step: 0,
                cost: final_cost,
            }],
            final_params: Vec::new(),
            final_cost,
            converged: true,
        },
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f_example() -> SquareMatrix {
        SquareMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 2.0]]).unwrap()
    }

    #[test]
    fn forward_examples() {
        let trial = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let rhs = RawVector::basis(1, 0);

        let id = LinearProblem::from_matrix(&SquareMatrix::identity(1), rhs.clone()).unwrap();
        let (out, norm) = forward(&id, &trial).unwrap();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!(out.amplitudes().iter().zip(trial.amplitudes()).all(|(a, b)| (a - b).norm() < 1e-15));

        let two = SquareMatrix::identity(1).scale(c(2.0, 0.0));
        let p = LinearProblem::from_matrix(&two, rhs.clone()).unwrap();
        let (_, norm) = forward(&p, &trial).unwrap();
        assert!((norm - 2.0).abs() < 1e-15);

        let p = LinearProblem::from_matrix(&f_example(), rhs).unwrap();
        let (out, norm) = forward(&p, &StateVector::basis(1, 0)).unwrap();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!((out.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn forward_degenerate_trial() {
        let m = SquareMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let p = LinearProblem::from_matrix(&m, RawVector::basis(1, 0)).unwrap();
        assert_eq!(
            forward(&p, &StateVector::basis(1, 1)),
            Err(Error::DegenerateTrial)
        );
    }

    #[test]
    fn zero_rhs_is_rejected() {
        assert_eq!(
            LinearProblem::from_matrix(&SquareMatrix::identity(1), RawVector::zeros(1)),
            Err(Error::ZeroNorm)
        );
    }

    #[test]
    fn grouped_apply_matches_term_by_term() {
        let m = SquareMatrix::from_fn(3, |r, col| c((r * 3 + col) as f64 * 0.1 - 1.0, (r as f64 - col as f64) * 0.3));
        let p = LinearProblem::from_matrix(&m, RawVector::basis(3, 0)).unwrap();
        let v = RawVector::new((0..8).map(|k| c(k as f64, 1.0 - k as f64)).collect()).unwrap();
        let a = p.apply(&v).unwrap();
        let b = pauli::apply_expansion(p.expansion(), &v).unwrap();
        let d = statevector::apply_matrix(&m, &v).unwrap();
        for ((x, y), z) in a.amplitudes().iter().zip(b.amplitudes()).zip(d.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
            assert!((x - z).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_system_converges_at_step_zero() {
        let p = LinearProblem::from_matrix(&SquareMatrix::identity(1), RawVector::basis(1, 0)).unwrap();
        let trial = TrialState::Direct {
            amplitudes: vec![c(1.0, 0.0), ZERO],
            real_only: true,
        };
        let sol = solve_variational(&p, trial, &GdSchedule::new(0.01, 0.0)).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.steps(), 0);
        assert!((sol.x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sol.x[1].norm() < 1e-15);
    }

    #[test]
    fn exact_examples() {
        let y = RawVector::from_real(&[0.3, -2.0]).unwrap();
        let sol = solve_exact(&SquareMatrix::identity(1), &y).unwrap();
        assert_eq!(sol.x, y.amplitudes());

        let sol = solve_exact(&f_example(), &RawVector::from_real(&[0.0, 1.0]).unwrap()).unwrap();
        assert!((sol.x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sol.x[1].norm() < 1e-15);
        assert!(sol.residual < 1e-15);
    }

    #[test]
    fn singular_matrix_names_pivot() {
        let m = SquareMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(
            solve_exact(&m, &RawVector::basis(1, 0)).unwrap_err(),
            Error::Singular { pivot: 1 }
        );
    }

    #[test]
    fn direct_mode_solves_small_system() {
        let p = LinearProblem::from_matrix(&f_example(), RawVector::from_real(&[0.0, 1.0]).unwrap()).unwrap();
        let trial = TrialState::random_direct(1, true, 3);
        let schedule = GdSchedule::new(0.1, 0.0).with_max_steps(20_000).with_cost_tolerance(1e-10);
        let sol = solve_variational(&p, trial, &schedule).unwrap();
        assert!(sol.residual < 1e-3, "residual {}", sol.residual);
        assert!((sol.x[0] - c(1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn residual_squared_equals_cost_at_recovered_scale() {
        let p = LinearProblem::from_matrix(&f_example(), RawVector::from_real(&[0.4, 1.0]).unwrap()).unwrap();
        let trial = TrialState::random_direct(1, true, 9);
        let schedule = GdSchedule::new(0.05, 0.0).with_max_steps(5);
        let sol = solve_variational(&p, trial, &schedule).unwrap();
        assert!((sol.residual * sol.residual - sol.final_cost).abs() < 1e-12);
        assert!(sol.residual * sol.residual <= 2.0 * sol.final_cost + 1e-6);
    }
}
