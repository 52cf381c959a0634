//! Statevector simulation kernels and variational algorithms for a quantum
//! least-squares support vector machine.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of its inputs; file formats and the command-line front end live in the
//! `vqsvm-cli` crate.
//!
//! Basis convention used throughout: index `q` in `[0, 2^N)` is the binary
//! number `n_1 n_2 ... n_N` with qubit 1 as the most significant bit.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod circuits;
pub mod data;
mod error;
pub mod linsolve;
mod math;
mod rng;
pub mod pauli;
pub mod statevector;
pub mod svm;
pub mod varprep;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use circuits::{CircuitParams, GateMatrix};
pub use linsolve::{LinearProblem, LinearSolution, TrialState};
pub use pauli::{Pauli, PauliExpansion, PauliString};
pub use statevector::{Amplitudes, RawVector, SquareMatrix, StateVector};
pub use svm::{Dataset, SvmModel, SvmProblem};
pub use varprep::{GdSchedule, TrainingTrace};
