//! Subcommand implementations. Each writes its files atomically and prints a
//! short summary to stdout.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

use vqsvm_core::data::generate;
use vqsvm_core::linsolve::{self, LinearProblem, LinearSolution, TrialState};
use vqsvm_core::pauli::{self, CircuitBackend, PauliString};
use vqsvm_core::statevector::normalize;
use vqsvm_core::svm::{self, normal_angle_degrees, SvmMethod};
use vqsvm_core::varprep::{self, train_state_prep};
use vqsvm_core::{CircuitParams, Dataset, GdSchedule, StateVector, SvmModel};

use crate::args::*;
use crate::exit::{NotConverged, VerificationFailed};
use crate::formats::{self, GeneratorConfig, ModelFile, SolutionFile, SolveMode};

/// Largest per-coefficient disagreement `decompose --verify-circuit` accepts.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

/// Largest register `decompose --verify-circuit` checks.
pub const VERIFY_MAX_QUBITS: usize = 2;

pub fn run(cmd: &Command) -> anyhow::Result<()> {
    match cmd {
        Command::Decompose(a) => decompose(a),
        Command::PrepareState(a) => prepare_state(a),
        Command::SolveLinear(a) => solve_linear(a),
        Command::Svm(a) => svm(a),
        Command::Qfpga(a) => qfpga(a),
        Command::GenerateData(a) => generate_data(a),
    }
}

fn schedule(args: &ScheduleArgs, base: GdSchedule) -> anyhow::Result<GdSchedule> {
    let s = GdSchedule {
        xi1: args.xi1.unwrap_or(base.xi1),
        xi2: args.xi2.unwrap_or(base.xi2),
        max_steps: args.max_steps.unwrap_or(base.max_steps),
        cost_tolerance: args.cost_tolerance.unwrap_or(base.cost_tolerance),
        fd_step: args.fd_step.unwrap_or(base.fd_step),
    };
    s.validate()?;
    Ok(s)
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn read_matrix(path: &Path) -> anyhow::Result<vqsvm_core::SquareMatrix> {
    Ok(formats::parse_matrix(&formats::read_text(path)?, &name(path))?)
}

fn load_state(src: &StateSource, n_qubits: Option<usize>) -> anyhow::Result<StateVector> {
    let need_n = || n_qubits.context("--n-qubits is required for basis: and random: states");
    let state = match src {
        StateSource::File(path) => {
            let raw = formats::parse_vector(&formats::read_text(path)?, &name(path))?;
            normalize(&raw).with_context(|| format!("normalizing {}", path.display()))?.0
        }
        StateSource::Basis(k) => {
            let n = need_n()?;
            if n > formats::MAX_FILE_QUBITS || *k >= 1 << n {
                bail!("basis index {k} out of range for {n} qubits");
            }
            StateVector::basis(n, *k)
        }
        StateSource::Random(seed) => {
            let n = need_n()?;
            if n > formats::MAX_FILE_QUBITS {
                bail!("{n} qubits is too many");
            }
            StateVector::random(n, *seed)
        }
    };
    if let Some(n) = n_qubits {
        if n != vqsvm_core::Amplitudes::n_qubits(&state) {
            bail!(
                "state has {} qubits but --n-qubits is {n}",
                vqsvm_core::Amplitudes::n_qubits(&state)
            );
        }
    }
    Ok(state)
}

fn decompose(a: &DecomposeArgs) -> anyhow::Result<()> {
    let m = read_matrix(&a.matrix)?;
    let e = pauli::expand(&m);
    formats::write_atomic(&a.out, formats::format_expansion(&e).as_bytes())?;
    println!("wrote {} terms to {}", e.len(), a.out.display());
    if !a.verify_circuit {
        return Ok(());
    }
    let n = m.n_qubits();
    if n > VERIFY_MAX_QUBITS {
        eprintln!("circuit verification covers at most {VERIFY_MAX_QUBITS} qubits; skipped for {n}");
        return Ok(());
    }
    let mut worst: f64 = 0.0;
    let mut worst_string = PauliString::identity(n);
    for p in PauliString::all(n) {
        let via = pauli::coefficient_via_circuit(&m, &p, &CircuitBackend::Exact)?;
        let diff = (via - e.coefficient(&p)).norm();
        if diff > worst {
            worst = diff;
            worst_string = p;
        }
    }
    println!("circuit verification: max discrepancy {worst:e} (at {worst_string})");
    if worst > VERIFY_TOLERANCE {
        return Err(VerificationFailed(format!(
            "coefficient of {worst_string} differs by {worst:e} > {VERIFY_TOLERANCE:e}"
        ))
        .into());
    }
    Ok(())
}

fn prepare_state(a: &PrepareStateArgs) -> anyhow::Result<()> {
    let target = load_state(&a.target, a.n_qubits)?;
    let n = vqsvm_core::Amplitudes::n_qubits(&target);
    let sched = schedule(&a.schedule, GdSchedule::default())?;
    let init = match &a.init {
        InitSource::Random => None,
        InitSource::Identity => Some(CircuitParams::identity(n)?),
        InitSource::File(path) => Some(formats::parse_params(&formats::read_text(path)?, &name(path))?),
    };
    let (params, trace) = train_state_prep(&target, init, &sched, a.seed)?;
    if let Some(path) = &a.out {
        formats::write_atomic(path, formats::format_params(&params).as_bytes())?;
    }
    if let Some(path) = &a.trace {
        formats::write_atomic(path, formats::format_trace(&trace).as_bytes())?;
    }
    println!(
        "final cost {:e} after {} steps (converged: {})",
        trace.final_cost,
        trace.steps(),
        trace.converged
    );
    if !trace.converged {
        return Err(NotConverged(format!(
            "cost {:e} did not reach {:e} within {} steps",
            trace.final_cost, sched.cost_tolerance, sched.max_steps
        ))
        .into());
    }
    Ok(())
}

fn solve_linear(a: &SolveLinearArgs) -> anyhow::Result<()> {
    let m = read_matrix(&a.matrix)?;
    let rhs = formats::parse_vector(&formats::read_text(&a.rhs)?, &name(&a.rhs))?;
    let n = m.n_qubits();
    if vqsvm_core::Amplitudes::n_qubits(&rhs) != n {
        bail!(
            "matrix has {n} qubits but right-hand side has {}",
            vqsvm_core::Amplitudes::n_qubits(&rhs)
        );
    }
    let sched = schedule(&a.schedule, GdSchedule::default())?;
    let solution = match a.mode {
        SolveMode::Exact => linsolve::solve_exact(&m, &rhs)?,
        SolveMode::Direct | SolveMode::Circuit => {
            let problem = LinearProblem::from_matrix(&m, rhs)?;
            let trial = match a.mode {
                SolveMode::Circuit => TrialState::random_circuit(n, a.seed)?,
                _ => TrialState::random_direct(n, a.real_only, a.seed),
            };
            linsolve::solve_variational(&problem, trial, &sched)?
        }
    };
    if let Some(path) = &a.out {
        let doc = SolutionFile::new(n, a.mode, &solution);
        formats::write_atomic(path, formats::to_json(&doc).as_bytes())?;
    }
    if let Some(path) = &a.trace {
        formats::write_atomic(path, formats::format_trace(&solution.trace).as_bytes())?;
    }
    println!(
        "{} solve: residual {:e}, cost {:e}, {} steps (converged: {})",
        a.mode,
        solution.residual,
        solution.final_cost,
        solution.steps(),
        solution.converged
    );
    if !solution.converged {
        return Err(NotConverged(format!(
            "cost {:e} did not reach {:e}",
            solution.final_cost, sched.cost_tolerance
        ))
        .into());
    }
    Ok(())
}

fn bounding_range(d: &Dataset) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in d.points().iter().flatten() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}

#[derive(Serialize)]
struct SvmSummary {
    n_points: usize,
    gamma: f64,
    exact_accuracy: Option<f64>,
    variational_accuracy: Option<f64>,
    normal_angle_degrees: Option<f64>,
    variational_final_cost: Option<f64>,
    variational_steps: Option<usize>,
    variational_converged: Option<bool>,
}

fn write_model(dir: &Path, label: &str, d: &Dataset, m: &SvmModel, gamma: f64, range: (f64, f64)) -> anyhow::Result<f64> {
    let path = dir.join(format!("{label}_model.json"));
    formats::write_atomic(&path, formats::to_json(&ModelFile::new(m, gamma)).as_bytes())?;
    if d.dim() == 2 {
        match svm::hyperplane_line_2d(m, range) {
            Ok(line) => formats::write_atomic(&dir.join(format!("{label}_line.csv")), formats::format_line(&line).as_bytes())?,
            Err(e) => eprintln!("{label}: no line written ({e})"),
        }
    }
    Ok(m.accuracy(d)?)
}

fn svm(a: &SvmArgs) -> anyhow::Result<()> {
    let d = match (&a.dataset, &a.generator) {
        (Some(path), _) => formats::parse_dataset(&formats::read_text(path)?, &name(path))?,
        (None, Some(path)) => {
            let cfg: GeneratorConfig = formats::parse_json(&formats::read_text(path)?, &name(path))?;
            generate(&cfg.spec())?
        }
        (None, None) => unreachable!("clap requires one data source"),
    };
    let sched = schedule(&a.schedule, GdSchedule::new(0.001, 0.0005))?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    formats::write_atomic(&a.out.join("dataset.csv"), formats::format_dataset(&d).as_bytes())?;
    let (lo, hi) = bounding_range(&d);
    let range = (a.range_min.unwrap_or(lo), a.range_max.unwrap_or(hi));

    let mut summary = SvmSummary {
        n_points: d.len(),
        gamma: a.gamma,
        exact_accuracy: None,
        variational_accuracy: None,
        normal_angle_degrees: None,
        variational_final_cost: None,
        variational_steps: None,
        variational_converged: None,
    };
    let mut report = String::new();
    let mut exact_failure = None;
    let mut exact_model = None;
    if a.method != SvmMethodArg::Variational {
        match svm::train(&d, a.gamma, &SvmMethod::Exact) {
            Ok((m, sol)) => {
                let acc = write_model(&a.out, "exact", &d, &m, a.gamma, range)?;
                let _ = writeln!(report, "exact: training accuracy {acc:.4}, residual {:e}", sol.residual);
                summary.exact_accuracy = Some(acc);
                exact_model = Some(m);
            }
            Err(e) => {
                eprintln!("exact solve failed: {e}");
                exact_failure = Some(e);
            }
        }
    }
    let mut variational: Option<LinearSolution> = None;
    if a.method != SvmMethodArg::Exact {
        let method = SvmMethod::Variational {
            schedule: sched,
            seed: a.seed,
        };
        let (m, sol) = svm::train(&d, a.gamma, &method)?;
        let acc = write_model(&a.out, "variational", &d, &m, a.gamma, range)?;
        formats::write_atomic(&a.out.join("variational_trace.csv"), formats::format_trace(&sol.trace).as_bytes())?;
        let _ = writeln!(
            report,
            "variational: training accuracy {acc:.4}, cost {:e}, {} steps (converged: {})",
            sol.final_cost,
            sol.steps(),
            sol.converged
        );
        summary.variational_accuracy = Some(acc);
        summary.variational_final_cost = Some(sol.final_cost);
        summary.variational_steps = Some(sol.steps());
        summary.variational_converged = Some(sol.converged);
        if let Some(e) = &exact_model {
            let angle = normal_angle_degrees(&e.omega, &m.omega);
            let _ = writeln!(report, "angle between normals: {angle:.4} degrees");
            summary.normal_angle_degrees = Some(angle);
        }
        variational = Some(sol);
    }
    formats::write_atomic(&a.out.join("summary.json"), formats::to_json(&summary).as_bytes())?;
    print!("{report}");

    if let Some(e) = exact_failure {
        return Err(anyhow::Error::new(e).context("exact solve failed"));
    }
    if let Some(sol) = variational.filter(|s| !s.converged) {
        return Err(NotConverged(format!(
            "variational cost {:e} did not reach {:e}",
            sol.final_cost, sched.cost_tolerance
        ))
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct QfpgaReport {
    n_qubits: usize,
    fidelity: f64,
    initial_cost: f64,
    final_cost: f64,
    initial_steps: usize,
    final_steps: usize,
    converged: bool,
}

fn qfpga(a: &QfpgaArgs) -> anyhow::Result<()> {
    let initial = load_state(&a.initial, a.n_qubits)?;
    let fin = load_state(&a.final_state, a.n_qubits)?;
    let sched = schedule(&a.schedule, GdSchedule::default())?;
    let q = varprep::qfpga_compose_unchecked(&initial, &fin, &sched, a.seed)?;
    formats::write_atomic(&a.out, formats::format_matrix(q.unitary.matrix()).as_bytes())?;
    let report = QfpgaReport {
        n_qubits: q.unitary.n_qubits(),
        fidelity: q.fidelity,
        initial_cost: q.initial_trace.final_cost,
        final_cost: q.final_trace.final_cost,
        initial_steps: q.initial_trace.steps(),
        final_steps: q.final_trace.steps(),
        converged: q.converged(),
    };
    if let Some(path) = &a.report {
        formats::write_atomic(path, formats::to_json(&report).as_bytes())?;
    }
    println!(
        "fidelity {:.9}; preparation costs {:e} (initial), {:e} (final)",
        q.fidelity, report.initial_cost, report.final_cost
    );
    if !q.converged() {
        return Err(NotConverged(format!(
            "preparations did not converge: initial cost {:e}, final cost {:e}",
            report.initial_cost, report.final_cost
        ))
        .into());
    }
    Ok(())
}

fn generate_data(a: &GenerateDataArgs) -> anyhow::Result<()> {
    let cfg = GeneratorConfig {
        r: a.r,
        n_red: a.n_red,
        n_blue: a.n_blue,
        theta_seed: a.theta_seed,
        point_seed: a.point_seed,
        spread: a.spread,
    };
    let d = generate(&cfg.spec())?;
    formats::write_atomic(&a.out, formats::format_dataset(&d).as_bytes())?;
    println!("wrote {} points to {}", d.len(), a.out.display());
    Ok(())
}
