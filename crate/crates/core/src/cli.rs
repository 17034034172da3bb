//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 usage or
//! configuration error, 3 partial certification (output still written).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::dirac::{
    lagrange_residual, solve_ivp, trace_wronskian, BoundaryConditions, Coefficients, DiracProblem,
};
use crate::error::Error;
use crate::funcspec::{FunctionSpec, SampleTable};
use crate::presets::Preset;
use crate::qcore::{dq_at, jackson_cumulative, make_lattice, Depth, LatticeFn, QParam};
use crate::sampling::{
    forward_transform, reconstruction_report, series_at_eigenvalue, transform_samples,
    ReconstructionReport, Signal, SignalSpec,
};
use crate::spectrum::{gram_matrix, linear_scan_end, norm_sq_boundary, scan_eigenvalues, Spectrum};
use crate::sum::CompensatedSum;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Lattice depth in a config: `"auto"` or a fixed `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepthSetting {
    #[default]
    Auto,
    Fixed(usize),
}

impl From<DepthSetting> for Depth {
    fn from(d: DepthSetting) -> Self {
        match d {
            DepthSetting::Auto => Depth::Auto,
            DepthSetting::Fixed(k) => Depth::Fixed(k),
        }
    }
}

impl Serialize for DepthSetting {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DepthSetting::Auto => s.serialize_str("auto"),
            DepthSetting::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for DepthSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct DepthVisitor;
        impl Visitor<'_> for DepthVisitor {
            type Value = DepthSetting;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a non-negative integer")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<DepthSetting, E> {
                usize::try_from(v)
                    .map(DepthSetting::Fixed)
                    .map_err(|_| E::custom("depth too large"))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<DepthSetting, E> {
                u64::try_from(v)
                    .map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
                    .and_then(|v| self.visit_u64(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<DepthSetting, E> {
                if v == "auto" {
                    Ok(DepthSetting::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(DepthVisitor)
    }
}

/// An expression string or `{"table": "path.csv"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Expr(String),
    Table { table: PathBuf },
}

impl FunctionSource {
    fn resolve(&self, field: &str, base: &Path) -> Result<FunctionSpec, String> {
        match self {
            FunctionSource::Expr(text) => {
                FunctionSpec::parse(text).map_err(|e| format!("{field}: {e}"))
            }
            FunctionSource::Table { table } => {
                let path = base.join(table);
                SampleTable::from_csv_path(&path)
                    .map(FunctionSpec::Samples)
                    .map_err(|e| format!("{field}: {e}"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub k11: f64,
    pub k12: f64,
    pub k21: f64,
    pub k22: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub q: f64,
    pub a: f64,
    #[serde(default)]
    pub depth: DepthSetting,
    pub bc: BcConfig,
    pub p: FunctionSource,
    pub r: FunctionSource,
}

impl ProblemConfig {
    /// Builds the problem; table paths are taken relative to `base`.
    pub fn build(&self, base: &Path) -> Result<DiracProblem, String> {
        let q = QParam::new(self.q).map_err(|e| format!("q: {e}"))?;
        let lattice =
            make_lattice(self.a, q, self.depth.into()).map_err(|e| format!("a/depth: {e}"))?;
        let bc = BoundaryConditions::new(self.bc.k11, self.bc.k12, self.bc.k21, self.bc.k22)
            .map_err(|e| format!("bc: {e}"))?;
        let coeffs = Coefficients {
            p: self.p.resolve("p", base)?,
            r: self.r.resolve("r", base)?,
        };
        DiracProblem::new(Arc::new(lattice), coeffs, bc).map_err(|e| format!("p/r: {e}"))
    }

    pub fn from_preset(preset: Preset, q: QParam) -> Self {
        let bc = preset.bc();
        let depth = match preset.depth(q) {
            Depth::Fixed(k) => DepthSetting::Fixed(k),
            Depth::Auto => DepthSetting::Auto,
        };
        Self {
            q: q.value(),
            a: preset.a(),
            depth,
            bc: BcConfig {
                k11: bc.k11,
                k12: bc.k12,
                k21: bc.k21,
                k22: bc.k22,
            },
            p: FunctionSource::Expr("0".into()),
            r: FunctionSource::Expr("0".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub f1: FunctionSource,
    pub f2: FunctionSource,
}

impl SignalConfig {
    pub fn build(&self, base: &Path) -> Result<SignalSpec, String> {
        Ok(SignalSpec::new(
            self.f1.resolve("f1", base)?,
            self.f2.resolve("f2", base)?,
        ))
    }
}

/// Reads JSON and reports failures with the path of the offending field.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        format!("{}: field `{field}`: {}", path.display(), e.inner())
    })
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_problem(path: &Path) -> Result<DiracProblem, String> {
    let cfg: ProblemConfig = read_json(path)?;
    cfg.build(&base_dir(path))
        .map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_signal(path: &Path, prob: &DiracProblem) -> Result<Signal, String> {
    let cfg: SignalConfig = read_json(path)?;
    let spec = cfg
        .build(&base_dir(path))
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Signal::from_spec(&spec, prob.lattice()).map_err(|e| format!("{}: {e}", path.display()))
}

/// `min:max:steps` with `steps` points, both ends included.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{text}`: expected min:max:steps"));
    }
    let min: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("grid `{text}`: bad min"))?;
    let max: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("grid `{text}`: bad max"))?;
    let steps: i64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("grid `{text}`: bad steps"))?;
    if !min.is_finite() || !max.is_finite() {
        return Err(format!("grid `{text}`: bounds must be finite"));
    }
    if steps < 1 {
        return Err(format!("grid `{text}`: steps must be at least 1"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let n = steps as usize;
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                max
            } else {
                min + (max - min) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// Seventeen significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

#[derive(Debug, Parser)]
#[command(
    name = "qdirac",
    version,
    about = "Spectra, transforms and sampling reconstruction for q-Dirac systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues and norming constants as CSV.
    Eigen {
        config: PathBuf,
        /// Eigenvalues per sign.
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The transform F(lambda) on a real grid.
    Transform {
        config: PathBuf,
        signal: PathBuf,
        /// min:max:steps
        #[arg(long = "lambda-grid", allow_hyphen_values = true)]
        lambda_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated sampling series against the direct transform.
    Reconstruct {
        config: PathBuf,
        signal: PathBuf,
        /// Largest |n| used in the series.
        #[arg(long)]
        order: usize,
        /// min:max:steps
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the invariant checks against a config.
    Verify { config: PathBuf },
    /// Writes and runs one of the three worked examples under ./example-N/.
    Example {
        which: u32,
        #[arg(long, default_value_t = crate::presets::DEFAULT_Q)]
        q: f64,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Eigen { config, count, out } => cmd_eigen(&config, count, out.as_deref()),
        Command::Transform {
            config,
            signal,
            lambda_grid,
            out,
        } => cmd_transform(&config, &signal, &lambda_grid, out.as_deref()),
        Command::Reconstruct {
            config,
            signal,
            order,
            grid,
            out,
        } => cmd_reconstruct(&config, &signal, order, &grid, out.as_deref()),
        Command::Verify { config } => cmd_verify(&config),
        Command::Example { which, q } => cmd_example(which, q, Path::new(".")),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILED
        }
    }
}

fn open_out(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn note_shortfalls(spec: &Spectrum) {
    for s in &spec.shortfalls {
        let side = if s.sign > 0 { "positive" } else { "negative" };
        eprintln!(
            "note: {} of {} {side} eigenvalues certified: {}",
            s.certified, spec.requested, s.reason
        );
    }
}

fn write_eigen_csv(spec: &Spectrum, w: impl Write) -> Result<(), Failure> {
    let mut rows: Vec<_> = spec.eigenvalues.iter().collect();
    rows.sort_by_key(|e| e.n);
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["n", "lambda", "omega_prime", "norm_sq", "condition"])?;
    for e in rows {
        csv.write_record([
            e.n.to_string(),
            fmt_float(e.lambda),
            fmt_float(e.omega_prime),
            fmt_float(e.norm_sq),
            fmt_float(e.condition()),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn cmd_eigen(config: &Path, count: usize, out: Option<&Path>) -> CmdResult {
    if count == 0 {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    let prob = load_problem(config).map_err(Failure::Usage)?;
    let spec = scan_eigenvalues(&prob, count)?;
    write_eigen_csv(&spec, open_out(out)?)?;
    if spec.is_complete() {
        Ok(EXIT_OK)
    } else {
        note_shortfalls(&spec);
        Ok(EXIT_PARTIAL)
    }
}

fn cmd_transform(config: &Path, signal: &Path, grid: &str, out: Option<&Path>) -> CmdResult {
    let grid = parse_grid(grid).map_err(Failure::Usage)?;
    let prob = load_problem(config).map_err(Failure::Usage)?;
    let sig = load_signal(signal, &prob).map_err(Failure::Usage)?;
    let values = grid
        .par_iter()
        .map(|&l| forward_transform(&prob, &sig, Complex64::new(l, 0.0)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut csv = csv::Writer::from_writer(open_out(out)?);
    csv.write_record(["lambda_re", "lambda_im", "F_re", "F_im"])?;
    for (l, f) in grid.iter().zip(values) {
        csv.write_record([
            fmt_float(*l),
            fmt_float(0.0),
            fmt_float(f.re),
            fmt_float(f.im),
        ])?;
    }
    csv.flush()?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ReconstructSummary {
    #[serde(rename = "N")]
    order: usize,
    requested_n: usize,
    sup_err: f64,
    certified_n: usize,
}

fn write_report_csv(report: &ReconstructionReport, w: impl Write) -> Result<(), Failure> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "lambda",
        "F_true_re",
        "F_true_im",
        "F_rec_re",
        "F_rec_im",
        "abs_err",
    ])?;
    for i in 0..report.grid.len() {
        csv.write_record([
            fmt_float(report.grid[i].re),
            fmt_float(report.f_true[i].re),
            fmt_float(report.f_true[i].im),
            fmt_float(report.f_rec[i].re),
            fmt_float(report.f_rec[i].im),
            fmt_float(report.abs_err[i]),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Runs the sampling report with the largest certified order up to
/// `order`; returns the summary and whether the order had to be cut.
fn run_reconstruction(
    prob: &DiracProblem,
    sig: &Signal,
    spec: &Spectrum,
    grid: &[f64],
    order: usize,
) -> Result<(ReconstructionReport, ReconstructSummary), Failure> {
    let certified = spec.symmetric_order();
    let used = order.min(certified);
    let grid: Vec<Complex64> = grid.iter().map(|&l| Complex64::new(l, 0.0)).collect();
    let report = reconstruction_report(prob, sig, spec, &grid, used)?;
    let summary = ReconstructSummary {
        order: used,
        requested_n: order,
        sup_err: report.sup_err,
        certified_n: certified,
    };
    Ok((report, summary))
}

fn write_summary(summary: &ReconstructSummary, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Failure::Failed(e.to_string()))?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn cmd_reconstruct(
    config: &Path,
    signal: &Path,
    order: usize,
    grid: &str,
    out: Option<&Path>,
) -> CmdResult {
    let grid = parse_grid(grid).map_err(Failure::Usage)?;
    let prob = load_problem(config).map_err(Failure::Usage)?;
    let sig = load_signal(signal, &prob).map_err(Failure::Usage)?;
    let spec = scan_eigenvalues(&prob, order.max(1))?;
    let (report, summary) = run_reconstruction(&prob, &sig, &spec, &grid, order)?;
    write_report_csv(&report, open_out(out)?)?;
    write_summary(&summary, out.map(|p| p.with_extension("json")).as_deref())?;
    if summary.order < order {
        note_shortfalls(&spec);
        eprintln!(
            "note: series truncated at N = {} instead of {order}",
            summary.order
        );
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

/// Outcome of one invariant group.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e}, tolerance {tol:.0e}"),
    }
}

fn polynomial(lat: &Arc<crate::qcore::QLattice>, coeffs: &[f64]) -> LatticeFn {
    LatticeFn::from_fn(lat, |x| {
        let v = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        Complex64::new(v, 0.0)
    })
}

fn verify_qcalculus(prob: &DiracProblem) -> Result<f64, Error> {
    let lat = prob.lattice();
    let depth = lat.depth() as isize;
    let one_minus_q = 1.0 - lat.q().value();
    let polys: [&[f64]; 3] = [
        &[1.0, -2.0, 0.5],
        &[0.3, 1.0, 0.0, -0.25],
        &[-1.0, 0.0, 2.0, 0.0, 0.125],
    ];
    let mut worst: f64 = 0.0;
    for (i, pf) in polys.iter().enumerate() {
        let f = polynomial(lat, pf);
        let g = polynomial(lat, polys[(i + 1) % polys.len()]);
        // D_q of the running integral returns the integrand
        let cum = jackson_cumulative(&f);
        let fmax = f.interior().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..depth {
            worst = worst.max((dq_at(&cum, k)? - f.get(k)?).norm() / fmax.max(f64::MIN_POSITIVE));
        }
        // product rule D_q(fg)(x) = f(x) D_q g(x) + g(qx) D_q f(x)
        let fg = f.zip_with(&g, |a, b| a * b)?;
        for k in 0..depth {
            let (df, dg) = (dq_at(&f, k)?, dq_at(&g, k)?);
            let lhs = dq_at(&fg, k)?;
            let rhs = f.get(k)? * dg + g.get(k + 1)? * df;
            // magnitude of the differenced samples over the step
            let h = lat.x(k) * one_minus_q;
            let scale = (f.get(k)?.norm() + f.get(k + 1)?.norm())
                * (g.get(k)?.norm() + g.get(k + 1)?.norm())
                / h;
            worst = worst.max((lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE));
        }
        // summation by parts over x_0 .. x_{K-1}
        let mut lhs = CompensatedSum::new();
        let mut mag = 0.0;
        for k in 0..depth {
            let h = lat.x(k) * one_minus_q;
            let a = h * (f.get(k)? * dq_at(&g, k)?).re;
            let b = h * (g.get(k + 1)? * dq_at(&f, k)?).re;
            lhs.add(a);
            lhs.add(b);
            mag += a.abs() + b.abs();
        }
        let rhs = (f.get(0)? * g.get(0)? - f.get(depth)? * g.get(depth)?).re;
        worst = worst.max((lhs.value() - rhs).abs() / mag.max(rhs.abs()).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

fn verify_wronskian(prob: &DiracProblem) -> Result<f64, Error> {
    let bc = prob.bc();
    let other = prob.with_bc(BoundaryConditions::new(-bc.k12, bc.k11, bc.k21, bc.k22)?);
    let lam = Complex64::new(1.3 * linear_scan_end(prob), 0.0);
    let y = solve_ivp(prob, lam)?;
    let z = solve_ivp(&other, lam)?;
    let w0 = trace_wronskian(&y, &z, 0)?;
    let mut worst: f64 = 0.0;
    for k in 1..=prob.lattice().depth() as isize {
        worst = worst.max((trace_wronskian(&y, &z, k)? - w0).norm() / w0.norm());
    }
    Ok(worst)
}

/// Runs every invariant group against `prob`.
pub fn verify_problem(prob: &DiracProblem) -> Result<Vec<CheckResult>, Error> {
    let mut results = Vec::new();
    results.push(check(
        "q-calculus identities",
        verify_qcalculus(prob)?,
        1e-11,
    ));

    let l0 = linear_scan_end(prob);
    let t1 = solve_ivp(prob, Complex64::new(0.7 * l0, 0.0))?;
    let t2 = solve_ivp(prob, Complex64::new(-2.3 * l0, 0.0))?;
    let lagrange = lagrange_residual(&t1, &t2)?.max(lagrange_residual(&t1, &t1)?);
    results.push(check("Lagrange identity", lagrange, 1e-10));
    results.push(check("Wronskian constancy", verify_wronskian(prob)?, 1e-10));

    let spec = scan_eigenvalues(prob, 6)?;
    let gram = gram_matrix(&spec)?;
    let mut ortho: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                ortho = ortho.max(v.abs());
            }
        }
    }
    let mut ortho_check = check("orthogonality", ortho, 1e-9);
    ortho_check.detail = format!("{} eigenvalues, {}", spec.len(), ortho_check.detail);
    results.push(ortho_check);

    let mut compared = 0;
    let mut norm_worst: f64 = 0.0;
    let mut norm_failure = None;
    for ev in &spec.eigenvalues {
        match norm_sq_boundary(prob, ev) {
            Ok(b) => {
                compared += 1;
                norm_worst = norm_worst.max((b - ev.norm_sq).abs() / ev.norm_sq);
            }
            Err(Error::Cancellation { .. }) => {}
            Err(e) => norm_failure = Some(format!("n = {}: {e}", ev.n)),
        }
    }
    let mut norm_check = check("norm cross-check", norm_worst, 1e-8);
    if compared == 0 {
        norm_check.passed = false;
        norm_check.detail = "no eigenvalue with a certified boundary formula".into();
    } else {
        norm_check.detail = format!("{compared} compared, {}", norm_check.detail);
    }
    if let Some(msg) = norm_failure {
        norm_check.passed = false;
        norm_check.detail = msg;
    }
    results.push(norm_check);

    let order = spec.symmetric_order().min(6);
    let signal = Signal::from_spec(
        &SignalSpec::new(FunctionSpec::parse("x^2")?, FunctionSpec::constant(1.0)),
        prob.lattice(),
    )?;
    let samples = transform_samples(&signal, &spec)?;
    let mut node_worst: f64 = 0.0;
    for ev in spec
        .eigenvalues
        .iter()
        .filter(|e| e.n.unsigned_abs() as usize <= order)
    {
        let (series, direct) = series_at_eigenvalue(&samples, &spec, prob, &signal, ev, order)?;
        node_worst = node_worst.max((series - direct).norm() / direct.norm().max(1.0));
    }
    results.push(check("node exactness", node_worst, 1e-10));
    Ok(results)
}

fn cmd_verify(config: &Path) -> CmdResult {
    let prob = load_problem(config).map_err(Failure::Usage)?;
    let results = verify_problem(&prob)?;
    let mut all = true;
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all &= r.passed;
    }
    Ok(if all { EXIT_OK } else { EXIT_FAILED })
}

/// Materialises preset `which` under `root/example-N/` and runs it.
fn cmd_example(which: u32, q: f64, root: &Path) -> CmdResult {
    let preset = Preset::from_index(which).map_err(|e| Failure::Usage(e.to_string()))?;
    let qp = QParam::new(q).map_err(|e| Failure::Usage(format!("--q: {e}")))?;
    let dir = root.join(format!("example-{which}"));
    fs::create_dir_all(&dir)?;

    let config = ProblemConfig::from_preset(preset, qp);
    let signal = SignalConfig {
        f1: FunctionSource::Expr("x^2".into()),
        f2: FunctionSource::Expr("1".into()),
    };
    fs::write(dir.join("config.json"), pretty_json(&config))?;
    fs::write(dir.join("signal.json"), pretty_json(&signal))?;

    let prob = config.build(&dir).map_err(Failure::Failed)?;
    let sig = Signal::from_spec(
        &signal.build(&dir).map_err(Failure::Failed)?,
        prob.lattice(),
    )?;
    let order = 8;
    let spec = scan_eigenvalues(&prob, order)?;
    write_eigen_csv(&spec, fs::File::create(dir.join("eigen.csv"))?)?;

    let edge = spec
        .get(3)
        .map(|e| e.lambda)
        .unwrap_or_else(|| 3.0 * linear_scan_end(&prob));
    let grid = parse_grid(&format!("{}:{}:101", -edge, edge)).map_err(Failure::Failed)?;

    let mut csv = csv::Writer::from_path(dir.join("omega.csv"))?;
    csv.write_record(["lambda", "omega", "closed_form", "abs_diff"])?;
    for &l in &grid {
        let w = crate::dirac::char_fn(&prob, Complex64::new(l, 0.0))?
            .omega
            .re;
        let (c, _) = preset.omega_closed_form_unguarded(l, qp);
        csv.write_record([
            fmt_float(l),
            fmt_float(w),
            fmt_float(c),
            fmt_float((w - c).abs()),
        ])?;
    }
    csv.flush()?;

    let (report, summary) = run_reconstruction(&prob, &sig, &spec, &grid, order)?;
    write_report_csv(&report, fs::File::create(dir.join("reconstruct.csv"))?)?;
    write_summary(&summary, Some(&dir.join("reconstruct.json")))?;

    println!(
        "example {which}: {} eigenvalues, N = {}, sup_err = {:.3e}, outputs in {}",
        spec.len(),
        summary.order,
        summary.sup_err,
        dir.display()
    );
    if spec.is_complete() && summary.order == order {
        Ok(EXIT_OK)
    } else {
        note_shortfalls(&spec);
        Ok(EXIT_PARTIAL)
    }
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("config serialises") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:0:1").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1:-2").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:2").is_err());
        let g = parse_grid("0:1:11").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        let s = fmt_float(0.1);
        let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn depth_setting_serde() {
        let auto: DepthSetting = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(auto, DepthSetting::Auto);
        let fixed: DepthSetting = serde_json::from_str("12").unwrap();
        assert_eq!(fixed, DepthSetting::Fixed(12));
        assert!(serde_json::from_str::<DepthSetting>("\"deep\"").is_err());
        assert!(serde_json::from_str::<DepthSetting>("-3").is_err());
        assert_eq!(serde_json::to_string(&DepthSetting::Fixed(7)).unwrap(), "7");
    }

    #[test]
    fn preset_config_round_trip() {
        let q = QParam::new(0.5).unwrap();
        let cfg = ProblemConfig::from_preset(Preset::Three, q);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ProblemConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(back.build(Path::new(".")).is_ok());
    }

    #[test]
    fn empty_bc_rejected() {
        let mut cfg = ProblemConfig::from_preset(Preset::One, QParam::new(0.5).unwrap());
        cfg.bc.k11 = 0.0;
        cfg.bc.k12 = 0.0;
        let err = cfg.build(Path::new(".")).unwrap_err();
        assert!(err.starts_with("bc:"), "{err}");
    }
}
