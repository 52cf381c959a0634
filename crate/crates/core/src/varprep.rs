//! Variational state preparation: train the angles of a universal circuit so
//! that `U(theta)|0>>` matches a target state, and compose two such circuits
//! into a state-to-state map (the q-FPGA).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circuits::{self, CircuitParams, GateMatrix};
use crate::math;
use crate::statevector::{self, dot, Amplitudes, StateVector};
use crate::{Error, Result};

/// Smallest step-over-step cost change that keeps a descent running.
pub const STALL_THRESHOLD: f64 = 1e-12;

/// Steepest-descent settings. The learning rate at step `t` is
/// `xi1 * exp(-xi2 * t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdSchedule {
    pub xi1: f64,
    pub xi2: f64,
    pub max_steps: usize,
    pub cost_tolerance: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
}

impl GdSchedule {
    pub const DEFAULT_MAX_STEPS: usize = 50_000;
    pub const DEFAULT_COST_TOLERANCE: f64 = 1e-6;
    pub const DEFAULT_FD_STEP: f64 = 1e-5;

    pub fn new(xi1: f64, xi2: f64) -> Self {
        Self {
            xi1,
            xi2,
            max_steps: Self::DEFAULT_MAX_STEPS,
            cost_tolerance: Self::DEFAULT_COST_TOLERANCE,
            fd_step: Self::DEFAULT_FD_STEP,
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_cost_tolerance(mut self, tol: f64) -> Self {
        self.cost_tolerance = tol;
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi1 >= 0.0 && self.xi1.is_finite()) {
            return Err(Error::InvalidParameter("xi1 must be finite and non-negative"));
        }
        if !(self.xi2 >= 0.0 && self.xi2.is_finite()) {
            return Err(Error::InvalidParameter("xi2 must be finite and non-negative"));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::InvalidParameter("fd_step must be positive"));
        }
        if !(self.cost_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("cost_tolerance must be non-negative"));
        }
        Ok(())
    }

    pub fn learning_rate(&self, t: usize) -> f64 {
        self.xi1 * math::exp(-self.xi2 * t as f64)
    }
}

/// `xi1 = 0.5`, `xi2 = 5e-4`: reaches the default cost tolerance on random
/// targets at one to three qubits within a few hundred steps.
impl Default for GdSchedule {
    fn default() -> Self {
        Self::new(0.5, 5e-4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub cost: f64,
}

/// Cost after every step of a descent (step 0 is the starting point).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingTrace {
    pub points: Vec<TracePoint>,
    pub final_params: Vec<f64>,
    pub final_cost: f64,
    pub converged: bool,
}

impl TrainingTrace {
    /// Number of descent steps taken.
    pub fn steps(&self) -> usize {
        self.points.last().map_or(0, |p| p.step)
    }
}

/// `1 - |<candidate|target>|^2`, clamped to `[0, 1]`.
pub fn fidelity_cost(candidate: &StateVector, target: &StateVector) -> Result<f64> {
    let overlap = statevector::inner_product(candidate, target)?;
    Ok(clamp_cost(1.0 - overlap.norm_sqr()))
}

pub(crate) fn clamp_cost(c: f64) -> f64 {
    c.clamp(0.0, 1.0)
}

/// Steepest descent `x <- x - eta_t * grad` with a central finite-difference
/// gradient, shared by every trainer in the crate.
///
/// `project` runs after each update (renormalization for direct amplitude
/// parameterizations). Stops when the cost drops below the tolerance, when it
/// changes by less than [`STALL_THRESHOLD`] in one step, or after
/// `max_steps` steps.
pub fn steepest_descent<F, P>(
    mut x: Vec<f64>,
    schedule: &GdSchedule,
    mut cost: F,
    mut project: P,
) -> TrainingTrace
where
    F: FnMut(&[f64]) -> f64,
    P: FnMut(&mut [f64]),
{
    let h = schedule.fd_step;
    let mut current = cost(&x);
    let mut points = vec![TracePoint {
        step: 0,
        cost: current,
    }];
    let mut converged = current < schedule.cost_tolerance;
    let mut grad = vec![0.0; x.len()];
    let mut t = 0;
    while !converged && t < schedule.max_steps {
        for k in 0..x.len() {
            let orig = x[k];
            x[k] = orig + h;
            let plus = cost(&x);
            x[k] = orig - h;
            let minus = cost(&x);
            x[k] = orig;
            grad[k] = (plus - minus) / (2.0 * h);
        }
        let eta = schedule.learning_rate(t);
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi -= eta * g;
        }
        project(&mut x);
        t += 1;
        let next = cost(&x);
        points.push(TracePoint { step: t, cost: next });
        converged = next < schedule.cost_tolerance;
        let stalled = math::abs(next - current) < STALL_THRESHOLD;
        current = next;
        if stalled {
            break;
        }
    }
    TrainingTrace {
        points,
        final_params: x,
        final_cost: current,
        converged,
    }
}

/// Trains a universal circuit on `target.n_qubits()` qubits so that
/// `U(theta)|0>>` matches `target` up to a global phase.
///
/// Starts from `init`, or from angles drawn uniformly from `[0, 2 pi)` with
/// `seed` when `init` is `None`. Non-convergence is reported through
/// [`TrainingTrace::converged`], not as an error.
pub fn train_state_prep(
    target: &StateVector,
    init: Option<CircuitParams>,
    schedule: &GdSchedule,
    seed: u64,
) -> Result<(CircuitParams, TrainingTrace)> {
    schedule.validate()?;
    let n = target.n_qubits();
    if circuits::param_count(n).is_none() {
        return Err(Error::UnsupportedQubits(n));
    }
    let init = match init {
        Some(p) if p.n_qubits() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n_qubits(),
            })
        }
        Some(p) => p,
        None => CircuitParams::random(n, seed)?,
    };
    let target_amps = target.amplitudes();
    let mut scratch = vec![Complex64::new(0.0, 0.0); target_amps.len()];
    let cost = |theta: &[f64]| {
        circuits::prepare_into(n, theta, &mut scratch);
        clamp_cost(1.0 - dot(&scratch, target_amps).norm_sqr())
    };
    let trace = steepest_descent(init.into_theta(), schedule, cost, |_| {});
    let params = CircuitParams::new(n, trace.final_params.clone())?;
    Ok((params, trace))
}

/// A trained state-to-state map `U_ini-fin = U_fin U_ini^dagger`.
#[derive(Clone, Debug, PartialEq)]
pub struct QfpgaCircuit {
    pub unitary: GateMatrix,
    pub initial_params: CircuitParams,
    pub final_params: CircuitParams,
    pub initial_trace: TrainingTrace,
    pub final_trace: TrainingTrace,
    /// `|<psi_final| U_ini-fin |psi_initial>|^2`.
    pub fidelity: f64,
}

impl QfpgaCircuit {
    pub fn converged(&self) -> bool {
        self.initial_trace.converged && self.final_trace.converged
    }
}

/// Trains `U_ini` and `U_fin` and composes them, reporting non-convergence of
/// either preparation as [`Error::QfpgaNotConverged`].
pub fn qfpga_compose(
    psi_initial: &StateVector,
    psi_final: &StateVector,
    schedule: &GdSchedule,
    seed: u64,
) -> Result<QfpgaCircuit> {
    let circuit = qfpga_compose_unchecked(psi_initial, psi_final, schedule, seed)?;
    if !circuit.converged() {
        return Err(Error::QfpgaNotConverged {
            initial_cost: circuit.initial_trace.final_cost,
            final_cost: circuit.final_trace.final_cost,
        });
    }
    Ok(circuit)
}

/// Like [`qfpga_compose`] but returns the composed circuit whether or not the
/// preparations converged. The result is unitary either way.
pub fn qfpga_compose_unchecked(
    psi_initial: &StateVector,
    psi_final: &StateVector,
    schedule: &GdSchedule,
    seed: u64,
) -> Result<QfpgaCircuit> {
    if psi_initial.n_qubits() != psi_final.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: psi_initial.n_qubits(),
            found: psi_final.n_qubits(),
        });
    }
    let (initial_params, initial_trace) = train_state_prep(psi_initial, None, schedule, seed)?;
    let (final_params, final_trace) =
        train_state_prep(psi_final, None, schedule, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let u_ini = circuits::universal(&initial_params)?;
    let u_fin = circuits::universal(&final_params)?;
    let unitary = u_fin.then_after(&u_ini.adjoint())?;
    let mapped = unitary.apply(psi_initial)?;
    let fidelity = statevector::inner_product(psi_final, &mapped)?.norm_sqr();
    Ok(QfpgaCircuit {
        unitary,
        initial_params,
        final_params,
        initial_trace,
        final_trace,
        fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_3;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fidelity_cost_examples() {
        let a = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!(fidelity_cost(&a, &a).unwrap() < 1e-15);
        let b = StateVector::new(vec![c(0.8, 0.0), c(0.0, -0.6)]).unwrap();
        assert!((fidelity_cost(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity_cost(&a, &a.with_phase(FRAC_PI_3)).unwrap() < 1e-15);
        assert!(fidelity_cost(&a, &StateVector::zero_state(2)).is_err());
    }

    #[test]
    fn learning_rate_decays() {
        let s = GdSchedule::new(0.005, 0.005);
        assert_eq!(s.learning_rate(0), 0.005);
        let mut prev = f64::INFINITY;
        for t in 0..2000 {
            let eta = s.learning_rate(t);
            assert!(eta > 0.0 && eta <= prev);
            prev = eta;
        }
    }

    #[test]
    fn identity_init_on_zero_target_converges_immediately() {
        let target = StateVector::zero_state(2);
        let init = CircuitParams::identity(2).unwrap();
        let (_, trace) = train_state_prep(&target, Some(init), &GdSchedule::new(0.005, 0.005), 0).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.steps(), 0);
        assert!(trace.final_cost < 1e-15);
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let target = StateVector::basis(2, 3);
        let init = CircuitParams::random(2, 4).unwrap();
        let schedule = GdSchedule::new(0.0, 0.0).with_max_steps(10);
        let (params, trace) = train_state_prep(&target, Some(init.clone()), &schedule, 0).unwrap();
        assert_eq!(params, init);
        let first = trace.points[0].cost;
        assert!(trace.points.iter().all(|p| p.cost == first));
    }

    #[test]
    fn four_qubits_unsupported() {
        let target = StateVector::zero_state(4);
        assert_eq!(
            train_state_prep(&target, None, &GdSchedule::new(0.1, 0.0), 0).unwrap_err(),
            Error::UnsupportedQubits(4)
        );
    }

    #[test]
    fn prepares_one_against_closed_form() {
        let target = StateVector::basis(1, 1);
        let (params, trace) = train_state_prep(&target, None, &GdSchedule::default(), 3).unwrap();
        assert!(trace.converged);
        assert!(trace.final_cost < 1e-3);
        // R(theta, phi)|0> has weight cos^2(theta/2) on |0>, so theta = pi mod 2 pi.
        let half = math::cos(params.theta()[0] / 2.0);
        assert!(half * half < 1e-3);
    }

    #[test]
    fn traces_stay_in_unit_interval() {
        let target = StateVector::new(vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)]).unwrap();
        let (_, trace) = train_state_prep(&target, None, &GdSchedule::default(), 9).unwrap();
        assert!(trace.converged);
        assert!(trace.points.iter().all(|p| (0.0..=1.0).contains(&p.cost)));
    }

    #[test]
    fn qfpga_maps_zero_to_one() {
        let q = qfpga_compose(
            &StateVector::basis(1, 0),
            &StateVector::basis(1, 1),
            &GdSchedule::default(),
            5,
        )
        .unwrap();
        assert!(q.fidelity > 0.999);
        assert!(q.unitary.matrix().unitarity_defect() < 1e-12);
    }

    #[test]
    fn qfpga_identical_states() {
        let psi = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let q = qfpga_compose(&psi, &psi, &GdSchedule::default(), 6).unwrap();
        assert!(q.fidelity >= 1.0 - 1e-6);
    }

    #[test]
    fn qfpga_reports_both_costs() {
        let schedule = GdSchedule::default().with_max_steps(0);
        let err = qfpga_compose(&StateVector::basis(2, 0), &StateVector::basis(2, 3), &schedule, 1).unwrap_err();
        assert!(matches!(err, Error::QfpgaNotConverged { .. }));
        let q = qfpga_compose_unchecked(&StateVector::basis(2, 0), &StateVector::basis(2, 3), &schedule, 1).unwrap();
        assert!(q.unitary.matrix().unitarity_defect() < 1e-12);
    }

    #[test]
    fn max_steps_zero_only_records_start() {
        let target = StateVector::basis(1, 1);
        let schedule = GdSchedule::new(0.1, 0.0).with_max_steps(0);
        let (_, trace) = train_state_prep(&target, None, &schedule, 1).unwrap();
        assert_eq!(trace.points.len(), 1);
        assert!(!trace.converged);
    }
}
