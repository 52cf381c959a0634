//! On-disk formats: plain-text matrices, vectors, Pauli expansions and circuit
//! angles; CSV traces, datasets and line endpoints; JSON models, solutions
//! and generator configs.
//!
//! Text formats start with a header line `N <n_qubits>`. Blank lines and
//! lines starting with `#` are ignored. Floats are written in Rust's shortest
//! round-trip form, so write-then-read is exact.

use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use vqsvm_core::data::{ClusterSpec, Spread};
use vqsvm_core::linsolve::LinearSolution;
use vqsvm_core::pauli::{PauliExpansion, PauliString};
use vqsvm_core::statevector::{Amplitudes, RawVector};
use vqsvm_core::{CircuitParams, Complex64, Dataset, SquareMatrix, SvmModel, TrainingTrace};

/// Largest register accepted in matrix and vector files.
pub const MAX_FILE_QUBITS: usize = 12;

/// A malformed input, located by source name and 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{source_name}:{line}: {message}")]
pub struct ParseError {
    pub source_name: String,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Self {
            source_name: source_name.to_owned(),
            line,
            message: message.into(),
        }
    }
}

pub type ParseResult<T> = Result<T, ParseError>;

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let inner = || -> io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
        }
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    inner().with_context(|| format!("writing {}", path.display()))
}

/// Shortest round-trip form, with `-0` written as `0`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_owned()
    } else {
        x.to_string()
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses `re`, `imj`, or `re+imj` / `re-imj` (exponents allowed).
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix('j') else {
        return parse_finite(token).map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (parse_finite(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_finite(s)?,
    };
    Some(Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{}j", format_f64(z.re), format_f64(z.im.abs()))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

/// Consumes the `N <n>` header.
fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    name: &str,
    max_qubits: usize,
) -> ParseResult<usize> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| ParseError::new(name, 1, "missing header \"N <n_qubits>\""))?;
    let mut parts = line.split_whitespace();
    let n = match (parts.next(), parts.next(), parts.next()) {
        (Some("N"), Some(n), None) => n.parse::<usize>().ok(),
        _ => None,
    }
    .ok_or_else(|| ParseError::new(name, no, format!("expected header \"N <n_qubits>\", found {line:?}")))?;
    if n == 0 || n > max_qubits {
        return Err(ParseError::new(
            name,
            no,
            format!("qubit count {n} outside 1..={max_qubits}"),
        ));
    }
    Ok(n)
}

fn parse_row(no: usize, line: &str, name: &str) -> ParseResult<Vec<Complex64>> {
    line.split_whitespace()
        .map(|t| parse_complex(t).ok_or_else(|| ParseError::new(name, no, format!("bad complex entry {t:?}"))))
        .collect()
}

pub fn parse_matrix(text: &str, name: &str) -> ParseResult<SquareMatrix> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines, name, MAX_FILE_QUBITS)?;
    let dim = 1usize << n;
    let mut entries = Vec::with_capacity(dim * dim);
    let mut rows = 0;
    for (no, line) in lines {
        if rows == dim {
            return Err(ParseError::new(name, no, format!("more than {dim} rows")));
        }
        let row = parse_row(no, line, name)?;
        if row.len() != dim {
            return Err(ParseError::new(
                name,
                no,
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        entries.extend(row);
        rows += 1;
    }
    if rows != dim {
        return Err(ParseError::new(
            name,
            last_line(text),
            format!("expected {dim} rows, found {rows}"),
        ));
    }
    Ok(SquareMatrix::from_row_major(entries).expect("dimension checked"))
}

pub fn format_matrix(m: &SquareMatrix) -> String {
    let mut out = format!("N {}\n", m.n_qubits());
    for r in 0..m.dim() {
        let row: Vec<String> = m.row(r).iter().map(|&z| format_complex(z)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Vectors use the matrix header followed by `2^N` entries, one per line.
pub fn parse_vector(text: &str, name: &str) -> ParseResult<RawVector> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines, name, MAX_FILE_QUBITS)?;
    let dim = 1usize << n;
    let mut amps = Vec::with_capacity(dim);
    for (no, line) in lines {
        let row = parse_row(no, line, name)?;
        if row.len() != 1 {
            return Err(ParseError::new(name, no, format!("expected 1 entry, found {}", row.len())));
        }
        if amps.len() == dim {
            return Err(ParseError::new(name, no, format!("more than {dim} entries")));
        }
        amps.push(row[0]);
    }
    if amps.len() != dim {
        return Err(ParseError::new(
            name,
            last_line(text),
            format!("expected {dim} entries, found {}", amps.len()),
        ));
    }
    Ok(RawVector::new(amps).expect("length checked"))
}

pub fn format_vector<A: Amplitudes + ?Sized>(v: &A) -> String {
    let mut out = format!("N {}\n", v.n_qubits());
    for &z in v.amplitudes() {
        out.push_str(&format_complex(z));
        out.push('\n');
    }
    out
}

/// One `<word> <re> <im>` line per nonzero term.
pub fn format_expansion(e: &PauliExpansion) -> String {
    let mut out = format!("N {}\n", e.n_qubits());
    for (p, c) in e.terms() {
        let _ = writeln!(out, "{p} {} {}", format_f64(c.re), format_f64(c.im));
    }
    out
}

pub fn parse_expansion(text: &str, name: &str) -> ParseResult<PauliExpansion> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines, name, vqsvm_core::pauli::MAX_QUBITS)?;
    let mut terms = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [word, re, im] = parts[..] else {
            return Err(ParseError::new(name, no, "expected \"<word> <re> <im>\""));
        };
        let p: PauliString = word
            .parse()
            .map_err(|_| ParseError::new(name, no, format!("bad Pauli word {word:?}")))?;
        if p.n_qubits() != n {
            return Err(ParseError::new(
                name,
                no,
                format!("word {word:?} has {} factors, header says {n}", p.n_qubits()),
            ));
        }
        let (re, im) = parse_finite(re)
            .zip(parse_finite(im))
            .ok_or_else(|| ParseError::new(name, no, "bad coefficient"))?;
        terms.push((p, Complex64::new(re, im)));
    }
    PauliExpansion::from_terms(n, terms).map_err(|e| ParseError::new(name, last_line(text), e.to_string()))
}

pub fn format_params(p: &CircuitParams) -> String {
    let mut out = format!("N {}\n", p.n_qubits());
    for &t in p.theta() {
        out.push_str(&format_f64(t));
        out.push('\n');
    }
    out
}

pub fn parse_params(text: &str, name: &str) -> ParseResult<CircuitParams> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines, name, 3)?;
    let mut theta = Vec::new();
    for (no, line) in lines {
        theta.push(parse_finite(line).ok_or_else(|| ParseError::new(name, no, format!("bad angle {line:?}")))?);
    }
    CircuitParams::new(n, theta).map_err(|e| ParseError::new(name, last_line(text), e.to_string()))
}

/// `step,cost` CSV.
pub fn format_trace(t: &TrainingTrace) -> String {
    let mut out = String::from("step,cost\n");
    for p in &t.points {
        let _ = writeln!(out, "{},{}", p.step, format_f64(p.cost));
    }
    out
}

/// `x1,...,xD,label` CSV.
pub fn format_dataset(d: &Dataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=d.dim()).map(|k| format!("x{k}")).collect();
    header.push("label".into());
    w.write_record(&header).expect("in-memory write");
    for (p, l) in d.points().iter().zip(d.labels()) {
        let mut rec: Vec<String> = p.iter().map(|&v| format_f64(v)).collect();
        rec.push(l.to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii output")
}

pub fn parse_dataset(text: &str, name: &str) -> ParseResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| ParseError::new(name, 1, e.to_string()))?
        .clone();
    let dim = header.len().saturating_sub(1);
    let header_ok = dim >= 1
        && header.get(dim) == Some("label")
        && (0..dim).all(|k| header.get(k) == Some(format!("x{}", k + 1).as_str()));
    if !header_ok {
        return Err(ParseError::new(name, 1, "expected header \"x1,...,xD,label\""));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ParseError::new(name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != dim + 1 {
            return Err(ParseError::new(
                name,
                line,
                format!("expected {} fields, found {}", dim + 1, record.len()),
            ));
        }
        let point = (0..dim)
            .map(|k| {
                let field = &record[k];
                parse_finite(field).ok_or_else(|| ParseError::new(name, line, format!("bad coordinate {field:?}")))
            })
            .collect::<ParseResult<Vec<f64>>>()?;
        let label = match &record[dim] {
            "1" | "+1" => 1,
            "-1" => -1,
            other => {
                return Err(ParseError::new(
                    name,
                    line,
                    format!("label must be +1 or -1, found {other:?}"),
                ))
            }
        };
        points.push(point);
        labels.push(label);
    }
    Dataset::new(points, labels).map_err(|e| ParseError::new(name, last_line(text), e.to_string()))
}

/// Endpoints of a 2-D separating line, `x,y` CSV.
pub fn format_line(endpoints: &[(f64, f64); 2]) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in endpoints {
        let _ = writeln!(out, "{},{}", format_f64(*x), format_f64(*y));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub omega0: f64,
    pub alpha: Vec<f64>,
    pub omega: Vec<f64>,
    pub gamma: f64,
    pub n_points: usize,
}

impl ModelFile {
    pub fn new(m: &SvmModel, gamma: f64) -> Self {
        Self {
            omega0: m.omega0,
            alpha: m.alpha.clone(),
            omega: m.omega.clone(),
            gamma,
            n_points: m.alpha.len(),
        }
    }

    pub fn model(&self) -> SvmModel {
        SvmModel {
            omega0: self.omega0,
            alpha: self.alpha.clone(),
            omega: self.omega.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Exact,
    Direct,
    Circuit,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Direct => "direct",
            Self::Circuit => "circuit",
        })
    }
}

/// Linear-solve result. `x` holds `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub n_qubits: usize,
    pub mode: SolveMode,
    pub x: Vec<[f64; 2]>,
    pub residual: f64,
    pub final_cost: f64,
    pub steps: usize,
    pub converged: bool,
}

impl SolutionFile {
    pub fn new(n_qubits: usize, mode: SolveMode, s: &LinearSolution) -> Self {
        Self {
            n_qubits,
            mode,
            x: s.x.iter().map(|z| [z.re, z.im]).collect(),
            residual: s.residual,
            final_cost: s.final_cost,
            steps: s.steps(),
            converged: s.converged,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpreadName {
    /// Per-axis variance r.
    #[default]
    Variance,
    /// Per-axis standard deviation r.
    Stddev,
}

impl From<SpreadName> for Spread {
    fn from(s: SpreadName) -> Self {
        match s {
            SpreadName::Variance => Spread::Variance,
            SpreadName::Stddev => Spread::StdDev,
        }
    }
}

/// Cluster-generator settings as stored in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub r: f64,
    pub n_red: usize,
    pub n_blue: usize,
    pub theta_seed: u64,
    pub point_seed: u64,
    #[serde(default)]
    pub spread: SpreadName,
}

impl GeneratorConfig {
    pub fn spec(&self) -> ClusterSpec {
        ClusterSpec {
            spread: self.spread.into(),
            ..ClusterSpec::new(self.r, self.n_red, self.n_blue, self.theta_seed, self.point_seed)
        }
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, name: &str) -> ParseResult<T> {
    serde_json::from_str(text).map_err(|e| ParseError::new(name, e.line(), e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use vqsvm_core::pauli::expand;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_tokens() {
        assert_eq!(parse_complex("1"), Some(c(1.0, 0.0)));
        assert_eq!(parse_complex("-2.5"), Some(c(-2.5, 0.0)));
        assert_eq!(parse_complex("1+2j"), Some(c(1.0, 2.0)));
        assert_eq!(parse_complex("1-2j"), Some(c(1.0, -2.0)));
        assert_eq!(parse_complex("-1e-3+4E+2j"), Some(c(-1e-3, 400.0)));
        assert_eq!(parse_complex("3j"), Some(c(0.0, 3.0)));
        assert_eq!(parse_complex("-j"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("j"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("1e5"), Some(c(1e5, 0.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("1+2"), None);
        assert_eq!(parse_complex("nan"), None);
        assert_eq!(parse_complex("1+infj"), None);
    }

    #[test]
    fn complex_round_trip() {
        for z in [c(0.1, -0.2), c(-0.0, -0.0), c(1e-300, 7e22), c(-3.0, 0.5)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z + c(0.0, 0.0)));
        }
        assert_eq!(format_complex(c(-0.0, -0.0)), "0+0j");
    }

    #[test]
    fn matrix_round_trip() {
        let m = SquareMatrix::from_fn(2, |r, col| c(r as f64 * 0.1, -(col as f64) / 3.0));
        assert_eq!(parse_matrix(&format_matrix(&m), "m").unwrap(), m);
    }

    #[test]
    fn matrix_errors_name_lines() {
        let err = parse_matrix("N 1\n1 0\n0\n", "m.txt").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.to_string().starts_with("m.txt:3:"));
        assert_eq!(parse_matrix("N 1\n1 x\n0 1\n", "m").unwrap_err().line, 2);
        assert_eq!(parse_matrix("Q 1\n", "m").unwrap_err().line, 1);
        assert_eq!(parse_matrix("N 1\n1 0\n", "m").unwrap_err().line, 2);
        assert_eq!(parse_matrix("", "m").unwrap_err().line, 1);
        assert!(parse_matrix("N 0\n", "m").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let m = parse_matrix("# sigma_x\nN 1\n\n0 1\n1 0\n", "m").unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn vector_round_trip() {
        let v = RawVector::new(vec![c(1.0, -1.0), c(0.0, 2.5)]).unwrap();
        assert_eq!(parse_vector(&format_vector(&v), "v").unwrap(), v);
        assert!(parse_vector("N 1\n1\n", "v").is_err());
        assert!(parse_vector("N 1\n1 2\n3\n", "v").is_err());
    }

    #[test]
    fn sigma_x_expansion() {
        let m = parse_matrix("N 1\n0 1\n1 0\n", "m").unwrap();
        assert_eq!(format_expansion(&expand(&m)), "N 1\nX 1 0\n");
    }

    #[test]
    fn expansion_round_trip() {
        let m = SquareMatrix::from_fn(2, |r, col| c((r * 4 + col) as f64 / 7.0, r as f64 - col as f64));
        let e = expand(&m);
        assert_eq!(parse_expansion(&format_expansion(&e), "e").unwrap(), e);
        assert_eq!(parse_expansion("N 2\nXQ 1 0\n", "e").unwrap_err().line, 2);
        assert_eq!(parse_expansion("N 2\nX 1 0\n", "e").unwrap_err().line, 2);
    }

    #[test]
    fn params_round_trip() {
        let p = CircuitParams::random(2, 3).unwrap();
        assert_eq!(parse_params(&format_params(&p), "p").unwrap(), p);
        assert!(parse_params("N 1\n0\n0\n", "p").is_err());
        assert!(parse_params("N 4\n", "p").is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let d = Dataset::new(vec![vec![0.1, -1.0 / 3.0], vec![2e-9, 5.0]], vec![1, -1]).unwrap();
        let text = format_dataset(&d);
        assert!(text.starts_with("x1,x2,label\n"));
        assert_eq!(parse_dataset(&text, "d").unwrap(), d);
    }

    #[test]
    fn dataset_errors_name_lines() {
        let err = parse_dataset("x1,x2,label\n1,2,1\n3,4,0\n", "d.csv").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("label"));
        let err = parse_dataset("x1,x2,label\n1,2,1\n3,-1\n", "d.csv").unwrap_err();
        assert_eq!(err.line, 3);
        let err = parse_dataset("x1,x2,label\n1,zz,1\n", "d.csv").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(parse_dataset("a,b\n1,1\n", "d").unwrap_err().line, 1);
    }

    #[test]
    fn generator_config_defaults_to_variance() {
        let g: GeneratorConfig =
            parse_json(r#"{"r": 2, "n_red": 31, "n_blue": 32, "theta_seed": 1, "point_seed": 2}"#, "g").unwrap();
        assert_eq!(g.spread, SpreadName::Variance);
        assert_eq!(g.spec().n_red, 31);
        assert!(parse_json::<GeneratorConfig>(r#"{"r": 2}"#, "g").is_err());
    }

    #[test]
    fn line_csv() {
        assert_eq!(format_line(&[(0.0, -2.0), (0.5, 2.0)]), "x,y\n0,-2\n0.5,2\n");
    }
}
