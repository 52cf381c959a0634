//! Least-squares soft-margin SVM with a linear kernel.
//!
//! Training solves the bordered system
//!
//! ```text
//! [ 0   1ᵀ          ] [ω0]   [0]
//! [ 1   K + I/γ     ] [α ] = [y]
//! ```
//!
//! with `K_ij = x_i · x_j`, then sets `ω = Σ α_j x_j`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linsolve::{self, LinearProblem, LinearSolution, TrialState};
use crate::math;
use crate::statevector::{pad_to_power_of_two, RawVector, SquareMatrix};
use crate::varprep::GdSchedule;
use crate::{Error, Result};

/// Labelled points in `R^D`. Labels are `+1` or `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    labels: Vec<i8>,
}

impl Dataset {
    /// Checks shape and labels only. [`Dataset::validate_for_training`]
    /// additionally requires two points and both classes.
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDataset("no points"));
        }
        if points.len() != labels.len() {
            return Err(Error::InvalidDataset("point and label counts differ"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidDataset("zero-dimensional points"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidDataset("inconsistent point dimension"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite coordinate"));
        }
        if labels.iter().any(|&l| l != 1 && l != -1) {
            return Err(Error::InvalidDataset("labels must be +1 or -1"));
        }
        Ok(Self { points, labels })
    }

    pub fn validate_for_training(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::InvalidDataset("need at least two points"));
        }
        if !self.labels.contains(&1) || !self.labels.contains(&-1) {
            return Err(Error::InvalidDataset("both labels must be present"));
        }
        Ok(())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Same points with every label negated.
    pub fn flipped(&self) -> Self {
        Self {
            points: self.points.clone(),
            labels: self.labels.iter().map(|l| -l).collect(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The bordered `(M+1) x (M+1)` system for a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmProblem {
    pub n_points: usize,
    pub gamma: f64,
    /// `M x M`, row-major.
    pub kernel: Vec<f64>,
    /// `(M+1) x (M+1)`, row-major.
    pub f: Vec<f64>,
    /// `(0, y_1, ..., y_M)`.
    pub rhs: Vec<f64>,
}

impl SvmProblem {
    pub fn dim(&self) -> usize {
        self.n_points + 1
    }

    /// `F` and `rhs` embedded in the smallest qubit register.
    pub fn padded(&self) -> Result<(SquareMatrix, RawVector)> {
        let to_c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        pad_to_power_of_two(self.dim(), &to_c(&self.f), &to_c(&self.rhs))
    }
}

pub fn build_problem(d: &Dataset, gamma: f64) -> Result<SvmProblem> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidGamma(gamma));
    }
    let m = d.len();
    let mut kernel = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let k = dot(&d.points[i], &d.points[j]);
            kernel[i * m + j] = k;
            kernel[j * m + i] = k;
        }
    }
    let n = m + 1;
    let mut f = vec![0.0; n * n];
    for i in 0..m {
        f[i + 1] = 1.0;
        f[(i + 1) * n] = 1.0;
        for j in 0..m {
            f[(i + 1) * n + j + 1] = kernel[i * m + j] + if i == j { 1.0 / gamma } else { 0.0 };
        }
    }
    let mut rhs = vec![0.0; n];
    for (r, &l) in rhs[1..].iter_mut().zip(&d.labels) {
        *r = l as f64;
    }
    Ok(SvmProblem {
        n_points: m,
        gamma,
        kernel,
        f,
        rhs,
    })
}

/// Trained hyperplane `ω · x + ω0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub omega0: f64,
    pub alpha: Vec<f64>,
    pub omega: Vec<f64>,
}

impl SvmModel {
    /// Builds the model from `(ω0, α_1..α_M)`, recomputing `ω`.
    pub fn from_solution(d: &Dataset, omega0: f64, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != d.len() {
            return Err(Error::DimensionMismatch {
                expected: d.len(),
                found: alpha.len(),
            });
        }
        let mut omega = vec![0.0; d.dim()];
        for (a, x) in alpha.iter().zip(&d.points) {
            for (o, xi) in omega.iter_mut().zip(x) {
                *o += a * xi;
            }
        }
        Ok(Self {
            omega0,
            alpha,
            omega,
        })
    }

    /// `ω · x + ω0`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.omega.len() {
            return Err(Error::DimensionMismatch {
                expected: self.omega.len(),
                found: x.len(),
            });
        }
        Ok(dot(&self.omega, x) + self.omega0)
    }

    /// Fraction of `d` classified with its own label.
    pub fn accuracy(&self, d: &Dataset) -> Result<f64> {
        let mut hits = 0;
        for (x, &y) in d.points.iter().zip(&d.labels) {
            if classify(self, x)? == y {
                hits += 1;
            }
        }
        Ok(hits as f64 / d.len() as f64)
    }
}

/// Which solver [`train`] uses.
#[derive(Clone, Debug, PartialEq)]
pub enum SvmMethod {
    Exact,
    /// Direct-mode variational solve with real amplitudes, starting from a
    /// random trial state drawn with `seed`.
    Variational { schedule: GdSchedule, seed: u64 },
}

/// Solves the bordered system (padded to a power of two) and unpacks
/// `(ω0, α)`, discarding the padding.
pub fn train(d: &Dataset, gamma: f64, method: &SvmMethod) -> Result<(SvmModel, LinearSolution)> {
    let problem = build_problem(d, gamma)?;
    let (f, rhs) = problem.padded()?;
    let solution = match method {
        SvmMethod::Exact => linsolve::solve_exact(&f, &rhs)?,
        SvmMethod::Variational { schedule, seed } => {
            let lp = LinearProblem::from_matrix(&f, rhs)?;
            let trial = TrialState::random_direct(f.n_qubits(), true, *seed);
            linsolve::solve_variational(&lp, trial, schedule)?
        }
    };
    let omega0 = solution.x[0].re;
    let alpha = solution.x[1..=d.len()].iter().map(|a| a.re).collect();
    let model = SvmModel::from_solution(d, omega0, alpha)?;
    Ok((model, solution))
}

/// `sgn(ω · x + ω0)`, with a zero score mapped to `+1`.
pub fn classify(m: &SvmModel, x: &[f64]) -> Result<i8> {
    Ok(if m.score(x)? >= 0.0 { 1 } else { -1 })
}

/// Stationarity residuals of the soft-margin Lagrangian at a model, with
/// `β_j = α_j y_j` and `ξ_j = β_j / γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktReport {
    /// `||ω - Σ β_j y_j x_j||`
    pub omega: f64,
    /// `|Σ β_j y_j|`
    pub bias: f64,
    /// `max_j |γ ξ_j - β_j|`
    pub slack: f64,
    /// `max_j |(ω · x_j + ω0) y_j - (1 - ξ_j)|`
    pub margin: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.omega.max(self.bias).max(self.slack).max(self.margin)
    }
}

pub fn kkt_check(d: &Dataset, gamma: f64, m: &SvmModel) -> Result<KktReport> {
    if m.alpha.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            found: m.alpha.len(),
        });
    }
    if m.omega.len() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: m.omega.len(),
        });
    }
    let beta: Vec<f64> = m.alpha.iter().zip(&d.labels).map(|(a, &y)| a * y as f64).collect();
    let xi: Vec<f64> = beta.iter().map(|b| b / gamma).collect();

    let mut sum = vec![0.0; d.dim()];
    for ((b, &y), x) in beta.iter().zip(&d.labels).zip(&d.points) {
        for (s, xk) in sum.iter_mut().zip(x) {
            *s += b * y as f64 * xk;
        }
    }
    let omega = math::sqrt(m.omega.iter().zip(&sum).map(|(a, b)| (a - b) * (a - b)).sum());
    let bias = math::abs(beta.iter().zip(&d.labels).map(|(b, &y)| b * y as f64).sum());
    let slack = xi
        .iter()
        .zip(&beta)
        .map(|(x, b)| math::abs(gamma * x - b))
        .fold(0.0, f64::max);
    let mut margin: f64 = 0.0;
    for ((x, &y), s) in d.points.iter().zip(&d.labels).zip(&xi) {
        let r = m.score(x)? * y as f64 - (1.0 - s);
        margin = margin.max(math::abs(r));
    }
    Ok(KktReport {
        omega,
        bias,
        slack,
        margin,
    })
}

/// Endpoints of the line `ω · x + ω0 = 0` inside the square
/// `[lo, hi] x [lo, hi]` (2-D models only).
///
/// Lines closer to horizontal are parameterized by `x`, steeper ones by `y`.
pub fn hyperplane_line_2d(m: &SvmModel, range: (f64, f64)) -> Result<[(f64, f64); 2]> {
    if m.omega.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.omega.len(),
        });
    }
    let (wx, wy) = (m.omega[0], m.omega[1]);
    if wx == 0.0 && wy == 0.0 {
        return Err(Error::NoHyperplane);
    }
    let (lo, hi) = range;
    Ok(if math::abs(wy) >= math::abs(wx) {
        let y = |x: f64| -(m.omega0 + wx * x) / wy;
        [(lo, y(lo)), (hi, y(hi))]
    } else {
        let x = |y: f64| -(m.omega0 + wy * y) / wx;
        [(x(lo), lo), (x(hi), hi)]
    })
}

/// Angle in degrees between two normal vectors.
pub fn normal_angle_degrees(a: &[f64], b: &[f64]) -> f64 {
    let na = math::sqrt(dot(a, a));
    let nb = math::sqrt(dot(b, b));
    if na == 0.0 || nb == 0.0 {
        return 180.0;
    }
    let cos = (dot(a, b) / (na * nb)).clamp(-1.0, 1.0);
    math::acos(cos).to_degrees()
}
