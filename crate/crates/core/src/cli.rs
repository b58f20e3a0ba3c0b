//! Command-line front end.
//!
//! Exit codes: 0 success, 1 IO/parse/usage, 2 QR rank failure,
//! 3 non-admissible or defective, 4 non-realizable, 5 verification failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::io::{complex_rows_of, rows_of, Document, FileError};
use crate::linalg::{
    is_lower_block_triangular, max_abs, prefix_rank_flags, symplectic_residual, RealMatrix,
};
use crate::qsys::{
    cascade_realize, default_frequency_grid, verify_transfer_equivalence, CascadeOptions,
    CascadeRealization, VerificationReport,
};
use crate::realjordan::{
    admissible_basis_search, SearchOptions, DEFAULT_MAX_ATTEMPTS, DEFAULT_ZERO_TOL,
};
use crate::sympqr::symplectic_qr;
use crate::sympschur::symplectic_schur;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_RANK: i32 = 2;
pub const EXIT_NOT_ADMISSIBLE: i32 = 3;
pub const EXIT_NOT_REALIZABLE: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "sympcascade",
    version,
    about = "Symplectic QR/Schur decompositions and pure cascade realization"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Relative rank tolerance for the skew-Gram prefix tests (default 1e-10 * dim).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Relative threshold for hard-zeroing structural zeros.
    #[arg(long, global = true, default_value_t = DEFAULT_ZERO_TOL)]
    pub zero_tol: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Budget of basis-search attempts.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    pub max_attempts: usize,
    /// Matrix file pinning the real Jordan basis.
    #[arg(long, global = true)]
    pub basis_override: Option<PathBuf>,
    /// Verification frequencies as `re:im` pairs separated by commas.
    #[arg(long, global = true, value_parser = parse_freqs)]
    pub freqs: Option<FreqList>,
    /// Tolerance for the physical realizability residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub realizability_tol: f64,
    /// Tolerance for the transfer-function deviation.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub verify_tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ensemble {
    /// Independent standard normal entries.
    Gaussian,
    /// Diagonal with standard normal entries.
    Diagonal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symplectic QR decomposition V = S Y of a matrix file.
    Sqr { matrix: PathBuf },
    /// Symplectic Schur decomposition A = S⁻¹ U S of a matrix file.
    Schur { matrix: PathBuf },
    /// Pure cascade realization of a system file.
    Realize {
        system: PathBuf,
        /// Also write the cascade as a system document.
        #[arg(long)]
        cascade_out: Option<PathBuf>,
    },
    /// Compares the transfer functions of two system files.
    Verify {
        original: PathBuf,
        candidate: PathBuf,
    },
    /// Admissibility rate of random matrices.
    Survey {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Ensemble::Gaussian)]
        ensemble: Ensemble,
    },
}

/// Comma-separated `re:im` frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqList(pub Vec<Complex64>);

fn parse_freqs(text: &str) -> Result<FreqList, String> {
    text.split(',')
        .map(|item| {
            let (re, im) = item
                .split_once(':')
                .ok_or_else(|| format!("frequency `{item}` is not of the form re:im"))?;
            let re: f64 = re.trim().parse().map_err(|e| format!("`{re}`: {e}"))?;
            let im: f64 = im.trim().parse().map_err(|e| format!("`{im}`: {e}"))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(format!("frequency `{item}` is not finite"));
            }
            Ok(Complex64::new(re, im))
        })
        .collect::<Result<_, _>>()
        .map(FreqList)
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub rank_tol: Option<f64>,
    pub zero_tol: f64,
    pub realizability_tol: f64,
    pub verify_tol: f64,
    pub max_attempts: usize,
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub exit_code: i32,
    pub error: Option<String>,
    pub residuals: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub outputs: BTreeMap<String, Value>,
    pub wall_time_s: f64,
}

impl RunReport {
    fn new(command: &str, global: &GlobalOpts) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            seed: global.seed,
            tolerances: Tolerances {
                rank_tol: global.tol,
                zero_tol: global.zero_tol,
                realizability_tol: global.realizability_tol,
                verify_tol: global.verify_tol,
                max_attempts: global.max_attempts,
            },
            exit_code: EXIT_OK,
            error: None,
            residuals: BTreeMap::new(),
            flags: BTreeMap::new(),
            outputs: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    fn fail(&mut self, code: i32, message: String) {
        self.exit_code = code;
        self.error = Some(message);
    }

    fn matrix(&mut self, name: &str, m: &RealMatrix) {
        self.outputs.insert(name.to_string(), json!(rows_of(m)));
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        for input in &self.inputs {
            out += &format!("input: {} (sha256 {})\n", input.path, input.sha256);
        }
        out += &format!("seed: {}\n", self.seed);
        out += &format!(
            "status: {}\n",
            match &self.error {
                None => "ok".to_string(),
                Some(e) => format!("error (exit {}): {e}", self.exit_code),
            }
        );
        for (k, v) in &self.residuals {
            out += &format!("residual {k}: {v:.3e}\n");
        }
        for (k, v) in &self.flags {
            out += &format!("flag {k}: {v}\n");
        }
        for (k, v) in &self.outputs {
            out += &format!("{k}:\n{}", render_value(v));
        }
        out += &format!("wall time: {:.3} s\n", self.wall_time_s);
        out
    }
}

fn fmt_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e5).contains(&a) {
        format!("{x:>12.4}")
    } else {
        format!("{x:>12.4e}")
    }
}

fn render_value(v: &Value) -> String {
    let as_row = |row: &Value| -> Option<String> {
        let cells = row.as_array()?;
        let mut line = String::from("  ");
        for cell in cells {
            match cell {
                Value::Number(x) => line += &fmt_number(x.as_f64()?),
                Value::Array(pair) if pair.len() == 2 => {
                    let (re, im) = (pair[0].as_f64()?, pair[1].as_f64()?);
                    line += &format!("{}{}i", fmt_number(re), fmt_signed(im));
                }
                _ => return None,
            }
            line.push(' ');
        }
        Some(line.trim_end().to_string() + "\n")
    };
    if let Some(rows) = v.as_array() {
        if !rows.is_empty() && rows.iter().all(Value::is_array) {
            let rendered: Option<String> = rows.iter().map(as_row).collect();
            if let Some(text) = rendered {
                return text;
            }
        }
    }
    if v.as_array()
        .is_some_and(|xs| xs.iter().all(|x| !x.is_array() && !x.is_object()))
    {
        return format!("  {v}\n");
    }
    let mut text = serde_json::to_string_pretty(v).unwrap_or_default();
    text = text.lines().map(|l| format!("  {l}\n")).collect();
    text
}

fn fmt_signed(x: f64) -> String {
    let s = fmt_number(x.abs());
    let s = s.trim_start();
    if x < 0.0 {
        format!(" - {s}")
    } else {
        format!(" + {s}")
    }
}

/// Maps library errors to the stable exit-code contract.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::RankDeficientPrefix(_) | Error::SingularInput => EXIT_RANK,
        Error::NotAdmissible { .. }
        | Error::DefectiveMatrix { .. }
        | Error::EigenSolverFailed
        | Error::TriangularizationResidual { .. } => EXIT_NOT_ADMISSIBLE,
        Error::NotRealizable(_) => EXIT_NOT_REALIZABLE,
        Error::VerificationFailed(_) => EXIT_VERIFICATION,
        _ => EXIT_IO,
    }
}

fn file_error_code(err: &FileError) -> i32 {
    match err {
        FileError::Model(e) => exit_code_for(e),
        _ => EXIT_IO,
    }
}

impl GlobalOpts {
    fn search_options(&self) -> SearchOptions {
        SearchOptions {
            max_attempts: self.max_attempts,
            seed: self.seed,
            rank_tol: self.tol,
            zero_tol: self.zero_tol,
            ..SearchOptions::default()
        }
    }
}

fn load(path: &Path, report: &mut RunReport) -> Result<Document, FileError> {
    let (doc, bytes) = Document::load(path)?;
    report.inputs.push(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    });
    Ok(doc)
}

/// Parses `args` (including the program name) and runs the command,
/// writing the report to `stdout` or `--output`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let report = execute(&cli);
    if let Some(e) = &report.error {
        let _ = writeln!(stderr, "error: {e}");
    }
    let rendered = match cli.global.format {
        Format::Text => report.render_text(),
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    match &cli.global.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
        }
        None => {
            let _ = stdout.write_all(rendered.as_bytes());
        }
    }
    report.exit_code
}

/// Runs the parsed command and returns its report.
pub fn execute(cli: &Cli) -> RunReport {
    let start = Instant::now();
    let g = &cli.global;
    let mut report = match &cli.command {
        Command::Sqr { matrix } => {
            let mut r = RunReport::new("sqr", g);
            cmd_sqr(matrix, g, &mut r);
            r
        }
        Command::Schur { matrix } => {
            let mut r = RunReport::new("schur", g);
            cmd_schur(matrix, g, &mut r);
            r
        }
        Command::Realize {
            system,
            cascade_out,
        } => {
            let mut r = RunReport::new("realize", g);
            cmd_realize(system, cascade_out.as_deref(), g, &mut r);
            r
        }
        Command::Verify {
            original,
            candidate,
        } => {
            let mut r = RunReport::new("verify", g);
            cmd_verify(original, candidate, g, &mut r);
            r
        }
        Command::Survey {
            n,
            trials,
            ensemble,
        } => {
            let mut r = RunReport::new("survey", g);
            cmd_survey(*n as usize, *trials as usize, *ensemble, g, &mut r);
            r
        }
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    report
}

fn cmd_sqr(path: &Path, g: &GlobalOpts, report: &mut RunReport) {
    let v = match load(path, report).and_then(Document::into_matrix) {
        Ok(v) => v,
        Err(e) => return report.fail(file_error_code(&e), e.to_string()),
    };
    let tol = g
        .tol
        .unwrap_or_else(|| crate::linalg::default_rank_tol(v.nrows()));
    if let Ok(flags) = prefix_rank_flags(&v, tol) {
        report
            .outputs
            .insert("prefix_full_rank".into(), json!(flags));
    }
    match symplectic_qr(&v, tol) {
        Ok(qr) => {
            let sy = &qr.s * &qr.y;
            let scale = v.norm().max(f64::MIN_POSITIVE);
            report
                .residuals
                .insert("reconstruction".into(), (&v - sy).norm() / scale);
            if let Ok(res) = symplectic_residual(&qr.s) {
                report.residuals.insert("symplectic".into(), res);
            }
            report.matrix("S", &qr.s);
            report.matrix("Y", &qr.y);
            report.outputs.insert("mu".into(), json!(qr.mus));
            report.outputs.insert("alpha".into(), json!(qr.alphas));
        }
        Err(e) => {
            if let Error::RankDeficientPrefix(k) = e {
                report.outputs.insert("failing_prefix".into(), json!(k));
            }
            report.fail(exit_code_for(&e), e.to_string());
        }
    }
}

fn cmd_schur(path: &Path, g: &GlobalOpts, report: &mut RunReport) {
    let a = match load(path, report).and_then(Document::into_matrix) {
        Ok(a) => a,
        Err(e) => return report.fail(file_error_code(&e), e.to_string()),
    };
    let mut opts = g.search_options();
    if let Some(vpath) = &g.basis_override {
        match load(vpath, report).and_then(Document::into_matrix) {
            Ok(v) => opts.basis_override = Some(v),
            Err(e) => return report.fail(file_error_code(&e), e.to_string()),
        }
    }
    match symplectic_schur(&a, &opts) {
        Ok(r) => {
            let s_inv = crate::linalg::symplectic_inverse(&r.s);
            let scale = max_abs(&a).max(f64::MIN_POSITIVE);
            report.residuals.insert(
                "similarity".into(),
                max_abs(&(&r.s * &a * s_inv - &r.u)) / scale,
            );
            if let Ok(res) = symplectic_residual(&r.s) {
                report.residuals.insert("symplectic".into(), res);
            }
            report.flags.insert(
                "lower_block_triangular".into(),
                is_lower_block_triangular(&r.u),
            );
            report.matrix("S", &r.s);
            report.matrix("U", &r.u);
            report.matrix("V", &r.jordan.v);
            report.matrix("J", &r.jordan.j);
            report.matrix("S1", &r.s1);
            report.matrix("Y", &r.y);
            report.outputs.insert("attempts".into(), json!(r.attempts));
        }
        Err(e) => report.fail(exit_code_for(&e), e.to_string()),
    }
}

fn cascade_outputs(casc: &CascadeRealization, report: &mut RunReport) {
    let subsystems: Vec<Value> = casc
        .subsystems
        .iter()
        .map(|s| {
            json!({
                "S": complex_rows_of(&s.scattering),
                "K": complex_rows_of(&s.coupling),
                "R": rows_of(&s.hamiltonian),
                "qp_coefficient": s.qp_coefficient(),
            })
        })
        .collect();
    report
        .outputs
        .insert("subsystems".into(), json!(subsystems));
    report.matrix("T", &casc.transform);
    report.matrix("A_transformed", &casc.transformed.a);
    report.matrix("B_transformed", &casc.transformed.b);
    report.matrix("C_transformed", &casc.transformed.c);
    report.matrix("D_transformed", &casc.transformed.d);
    report.flags.insert(
        "lower_block_triangular".into(),
        is_lower_block_triangular(&casc.transformed.a),
    );
    if let Ok(res) = symplectic_residual(&casc.transform) {
        report.residuals.insert("symplectic".into(), res);
    }
}

fn verification_outputs(v: &VerificationReport, report: &mut RunReport) {
    report.outputs.insert("verification".into(), json!(v));
    report
        .residuals
        .insert("max_transfer_deviation".into(), v.max_deviation);
    report.flags.insert("verification_pass".into(), v.pass);
}

fn cmd_realize(path: &Path, cascade_out: Option<&Path>, g: &GlobalOpts, report: &mut RunReport) {
    let system = match load(path, report)
        .and_then(Document::into_system)
        .and_then(|s| s.to_quadrature())
    {
        Ok(s) => s,
        Err(e) => return report.fail(file_error_code(&e), e.to_string()),
    };
    let mut search = g.search_options();
    if let Some(vpath) = &g.basis_override {
        match load(vpath, report).and_then(Document::into_matrix) {
            Ok(v) => search.basis_override = Some(v),
            Err(e) => return report.fail(file_error_code(&e), e.to_string()),
        }
    }
    let opts = CascadeOptions {
        search,
        realizability_tol: g.realizability_tol,
        verify_tol: g.verify_tol,
        freqs: g.freqs.as_ref().map(|f| f.0.clone()),
    };
    let realizability = crate::qsys::check_physical_realizability(&system, g.realizability_tol);
    report
        .outputs
        .insert("realizability".into(), json!(realizability));
    report
        .flags
        .insert("realizable".into(), realizability.passes());
    match cascade_realize(&system, &opts) {
        Ok(casc) => {
            cascade_outputs(&casc, report);
            verification_outputs(&casc.verification, report);
            if let Some(out) = cascade_out {
                if let Err(e) = std::fs::write(out, Document::cascade(&casc).to_json_pretty()) {
                    report.fail(EXIT_IO, format!("cannot write {}: {e}", out.display()));
                }
            }
        }
        Err(e) => report.fail(exit_code_for(&e), e.to_string()),
    }
}

fn cmd_verify(original: &Path, candidate: &Path, g: &GlobalOpts, report: &mut RunReport) {
    let mut load_system = |p: &Path| {
        load(p, report)
            .and_then(Document::into_system)
            .and_then(|s| s.to_quadrature())
    };
    let (g0, g1) = match (load_system(original), load_system(candidate)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return report.fail(file_error_code(&e), e.to_string()),
    };
    let freqs = g
        .freqs
        .as_ref()
        .map(|f| f.0.clone())
        .unwrap_or_else(|| default_frequency_grid(&g0.a));
    match verify_transfer_equivalence(&g0, &g1, &freqs, g.verify_tol) {
        Ok(v) => {
            verification_outputs(&v, report);
            if !v.pass {
                report.fail(
                    EXIT_VERIFICATION,
                    Error::VerificationFailed(v.max_deviation).to_string(),
                );
            }
        }
        Err(e) => report.fail(exit_code_for(&e), e.to_string()),
    }
}

/// Draws `trials` random `2n x 2n` matrices and runs the basis search on
/// each.
pub fn survey(n: usize, trials: usize, ensemble: Ensemble, opts: &SearchOptions) -> SurveyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dim = 2 * n;
    let mut successes = 0;
    let mut attempts = BTreeMap::new();
    let mut failures = BTreeMap::new();
    for _ in 0..trials {
        let a = match ensemble {
            Ensemble::Gaussian => {
                RealMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng))
            }
            Ensemble::Diagonal => {
                let d: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
            }
        };
        match admissible_basis_search(&a, opts) {
            Ok((_, r)) => {
                successes += 1;
                *attempts.entry(r.attempts).or_insert(0) += 1;
            }
            Err(e) => {
                let kind = match e {
                    Error::NotAdmissible { .. } => "not_admissible",
                    Error::DefectiveMatrix { .. } => "defective",
                    _ => "other",
                };
                *failures.entry(kind.to_string()).or_insert(0) += 1;
            }
        }
    }
    SurveyResult {
        n,
        trials,
        successes,
        success_fraction: successes as f64 / trials.max(1) as f64,
        attempts_histogram: attempts,
        failures,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurveyResult {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_fraction: f64,
    /// Attempts used by successful searches.
    pub attempts_histogram: BTreeMap<usize, usize>,
    pub failures: BTreeMap<String, usize>,
}

fn cmd_survey(n: usize, trials: usize, ensemble: Ensemble, g: &GlobalOpts, report: &mut RunReport) {
    let result = survey(n, trials, ensemble, &g.search_options());
    report
        .residuals
        .insert("success_fraction".into(), result.success_fraction);
    report.outputs.insert("survey".into(), json!(result));
}
