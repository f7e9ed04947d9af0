//! The `qes` command-line front end.
//!
//! Exit codes: 0 success, 1 no physical result / verification or case
//! failure, 2 invalid parameters or input, 3 convergence failure.
//!
//! A `--config FILE` holds `key = value` lines named after the flags
//! (`ell-range = 0:2`, `tol = fd=1e-4`); flags given on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::QesError;
use crate::matrices::{build_f, build_p, build_q, BandedMatrix};
use crate::model::{AnsatzParams, OscillatorSpec, QesSolution, Sector};
use crate::niven::{consistency_check, energy_from_zeros, polynomial_from_zeros, solve_niven, NivenOptions};
use crate::oracle::{self, OracleConfig};
use crate::spectra::{solve_n1, solve_ngt1, MultistartConfig, SpectralResult, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_RESULT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "qes", version, about = "Quasi-exact levels of the O(N) quartic oscillator")]
pub struct Cli {
    /// output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// write results here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// seed for every random start
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value file mirroring flag names
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// tolerance override, repeatable: imag, cluster, revalidate, newton, ode, fd, niven, consistency
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    F,
    P,
    Q,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// quasi-exact levels for one (N, l, m) sector
    Solve(SolveArgs),
    /// zeros of the polynomial factor from the Niven equations
    Niven(NivenArgs),
    /// re-check stored records with the numerical oracles
    Verify(VerifyArgs),
    /// solve over a grid of (l, m) and write one file per case
    Sweep(SweepArgs),
    /// print F, P or Q
    Matrix(MatrixArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SolveArgs {
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// required for N = 1, solved for N > 1
    #[arg(long)]
    beta: Option<f64>,
    /// attach oracle verdicts
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct NivenArgs {
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    starts: Option<usize>,
    /// restrict starts and iterates to the real line
    #[arg(long)]
    real_only: bool,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    /// JSON-lines or CSV records
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[arg(long)]
    dim: Option<u32>,
    /// inclusive, `a:b`
    #[arg(long)]
    ell_range: Option<String>,
    /// inclusive, `a:b`
    #[arg(long)]
    degree_range: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// only for N = 1
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct MatrixArgs {
    #[arg(long, value_enum, ignore_case = true)]
    kind: Option<Kind>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    energy: Option<f64>,
}

/// One solution (or rejected candidate) in a self-contained form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dim: u32,
    pub ell: u32,
    pub degree: u32,
    pub alpha: f64,
    pub beta: f64,
    pub energy: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda4: f64,
    pub coefficients: Vec<f64>,
    pub physical: bool,
    /// scaled recurrence residual; `|Im E|` for complex candidates
    pub residual: f64,
    pub oracle_verdict: String,
    pub branch_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_integral: Option<f64>,
}

/// Column order of the CSV form.
pub const CSV_COLUMNS: [&str; 19] = [
    "dim",
    "ell",
    "degree",
    "alpha",
    "beta",
    "energy",
    "lambda1",
    "lambda2",
    "lambda4",
    "coefficients",
    "physical",
    "residual",
    "oracle_verdict",
    "branch_id",
    "reject_reason",
    "ode_residual",
    "matched_index",
    "match_error",
    "norm_integral",
];

/// Shortest round-trip text, switching to exponent form for tiny or huge values.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt_num(v: &Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_field<T: Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRecord {
    fn csv_fields(&self) -> Vec<String> {
        let coefficients = self.coefficients.iter().map(|&c| num(c)).collect::<Vec<_>>().join(";");
        vec![
            self.dim.to_string(),
            self.ell.to_string(),
            self.degree.to_string(),
            num(self.alpha),
            num(self.beta),
            num(self.energy),
            num(self.lambda1),
            num(self.lambda2),
            num(self.lambda4),
            coefficients,
            self.physical.to_string(),
            num(self.residual),
            self.oracle_verdict.clone(),
            self.branch_id.to_string(),
            opt_field(&self.reject_reason),
            opt_num(&self.ode_residual),
            opt_field(&self.matched_index),
            opt_num(&self.match_error),
            opt_num(&self.norm_integral),
        ]
    }

    fn from_csv(header: &csv::StringRecord, row: &csv::StringRecord) -> anyhow::Result<Self> {
        let get = |name: &str| -> Option<&str> {
            header.iter().position(|h| h == name).and_then(|i| row.get(i)).map(str::trim)
        };
        fn parse<T: FromStr>(name: &str, s: Option<&str>) -> anyhow::Result<T>
        where
            T::Err: Display,
        {
            let s = s.ok_or_else(|| anyhow!("missing column {name}"))?;
            s.parse().map_err(|e| anyhow!("column {name}: {e}"))
        }
        fn parse_opt<T: FromStr>(name: &str, s: Option<&str>) -> anyhow::Result<Option<T>>
        where
            T::Err: Display,
        {
            match s {
                None | Some("") => Ok(None),
                some => parse(name, some).map(Some),
            }
        }
        let coefficients = match get("coefficients") {
            None => return Err(anyhow!("missing column coefficients")),
            Some("") => Vec::new(),
            Some(s) => s.split(';').map(|c| parse("coefficients", Some(c))).collect::<anyhow::Result<_>>()?,
        };
        Ok(ResultRecord {
            dim: parse("dim", get("dim"))?,
            ell: parse("ell", get("ell"))?,
            degree: parse("degree", get("degree"))?,
            alpha: parse("alpha", get("alpha"))?,
            beta: parse("beta", get("beta"))?,
            energy: parse("energy", get("energy"))?,
            lambda1: parse("lambda1", get("lambda1"))?,
            lambda2: parse("lambda2", get("lambda2"))?,
            lambda4: parse("lambda4", get("lambda4"))?,
            coefficients,
            physical: parse("physical", get("physical"))?,
            residual: parse("residual", get("residual"))?,
            oracle_verdict: get("oracle_verdict").unwrap_or("unverified").to_string(),
            branch_id: parse("branch_id", get("branch_id"))?,
            reject_reason: get("reject_reason").filter(|s| !s.is_empty()).map(str::to_string),
            ode_residual: parse_opt("ode_residual", get("ode_residual"))?,
            matched_index: parse_opt("matched_index", get("matched_index"))?,
            match_error: parse_opt("match_error", get("match_error"))?,
            norm_integral: parse_opt("norm_integral", get("norm_integral"))?,
        })
    }
}

/// One converged zero configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NivenRecord {
    pub dim: u32,
    pub ell: u32,
    pub degree: u32,
    pub alpha: f64,
    pub beta: f64,
    pub configuration_id: usize,
    /// `[re, im]` pairs
    pub zeros: Vec<[f64; 2]>,
    pub residual_norm: f64,
    pub energy: f64,
    pub energy_imag: f64,
    pub consistency_residual: f64,
    /// `pass` or `fail`
    pub consistency: String,
}

const NIVEN_COLUMNS: [&str; 12] = [
    "dim",
    "ell",
    "degree",
    "alpha",
    "beta",
    "configuration_id",
    "zeros",
    "residual_norm",
    "energy",
    "energy_imag",
    "consistency_residual",
    "consistency",
];

impl NivenRecord {
    fn csv_fields(&self) -> Vec<String> {
        let zeros = self.zeros.iter().map(|z| format!("{}:{}", num(z[0]), num(z[1]))).collect::<Vec<_>>().join(";");
        vec![
            self.dim.to_string(),
            self.ell.to_string(),
            self.degree.to_string(),
            num(self.alpha),
            num(self.beta),
            self.configuration_id.to_string(),
            zeros,
            num(self.residual_norm),
            num(self.energy),
            num(self.energy_imag),
            num(self.consistency_residual),
            self.consistency.clone(),
        ]
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

impl Failure {
    fn usage(msg: impl Display) -> Self {
        Failure { code: EXIT_INVALID, error: anyhow!("{msg}") }
    }
}

impl From<QesError> for Failure {
    fn from(e: QesError) -> Self {
        let code = match e {
            QesError::Convergence(_) => EXIT_CONVERGENCE,
            _ => EXIT_INVALID,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_INVALID, error }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_INVALID, error: e.into() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Default)]
struct ConfigFile {
    values: BTreeMap<String, String>,
    tol: Vec<String>,
}

impl ConfigFile {
    fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = ConfigFile::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            let value = value.trim().to_string();
            if key == "tol" {
                cfg.tol.push(value);
            } else {
                cfg.values.insert(key, value);
            }
        }
        Ok(cfg)
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse().map_err(|e| Failure::usage(format!("config {key} = {v}: {e}"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> CliResult<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

#[derive(Debug, Clone, Copy)]
struct Tols {
    spectra: Tolerances,
    ode: f64,
    fd: f64,
    niven: f64,
    consistency: f64,
}

impl Default for Tols {
    fn default() -> Self {
        let oracle = OracleConfig::default();
        Tols {
            spectra: Tolerances::default(),
            ode: oracle.ode_tol,
            fd: oracle.fd_tol,
            niven: NivenOptions::default().tol,
            consistency: DEFAULT_CONSISTENCY_TOL,
        }
    }
}

impl Tols {
    fn apply(&mut self, spec: &str) -> CliResult<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--tol expects name=value, got {spec}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Failure::usage(format!("--tol {spec}: {e}")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Failure::usage(format!("--tol {spec}: must be positive")));
        }
        let slot = match name.trim() {
            "imag" => &mut self.spectra.imag,
            "cluster" => &mut self.spectra.cluster,
            "revalidate" => &mut self.spectra.revalidate,
            "newton" => &mut self.spectra.newton,
            "ode" => &mut self.ode,
            "fd" => &mut self.fd,
            "niven" => &mut self.niven,
            "consistency" => &mut self.consistency,
            other => return Err(Failure::usage(format!("unknown tolerance {other}"))),
        };
        *slot = value;
        Ok(())
    }
}

struct Settings {
    format: Format,
    output: Option<PathBuf>,
    seed: u64,
    tols: Tols,
    /// overrides in the order applied, for the sweep manifest
    tol_specs: Vec<String>,
    config: ConfigFile,
}

impl Settings {
    fn resolve(cli: &Cli) -> CliResult<Self> {
        let config = match &cli.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let format = match cli.format {
            Some(f) => f,
            None => match config.values.get("format") {
                Some(v) => Format::from_str(v, true).map_err(Failure::usage)?,
                None => Format::Json,
            },
        };
        let output = cli.output.clone().or_else(|| config.values.get("output").map(PathBuf::from));
        let seed = match cli.seed {
            Some(s) => s,
            None => config.get("seed")?.unwrap_or(DEFAULT_SEED),
        };
        let mut tols = Tols::default();
        let tol_specs: Vec<String> = config.tol.iter().chain(cli.tol.iter()).cloned().collect();
        for spec in &tol_specs {
            tols.apply(spec)?;
        }
        Ok(Settings { format, output, seed, tols, tol_specs, config })
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key),
        }
    }

    fn need<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<T>
    where
        T::Err: Display,
    {
        self.pick(flag, key)?.ok_or_else(|| Failure::usage(format!("--{key} is required")))
    }

    fn sink(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn oracle_config(&self, grid_points: Option<usize>, rmax: Option<f64>) -> CliResult<OracleConfig> {
        let mut cfg = OracleConfig { ode_tol: self.tols.ode, fd_tol: self.tols.fd, ..OracleConfig::default() };
        if let Some(points) = self.pick(grid_points, "grid-points")? {
            cfg.points = points;
        }
        cfg.r_max = self.pick(rmax, "rmax")?;
        Ok(cfg)
    }
}

fn finite(name: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::usage(format!("--{name} must be finite")))
    }
}

/// Entry point for the binary: parses `std::env::args` and returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn execute(cli: Cli) -> CliResult<i32> {
    let settings = Settings::resolve(&cli)?;
    match &cli.command {
        Command::Solve(args) => cmd_solve(args, &settings),
        Command::Niven(args) => cmd_niven(args, &settings),
        Command::Verify(args) => cmd_verify(args, &settings),
        Command::Sweep(args) => cmd_sweep(args, &settings),
        Command::Matrix(args) => cmd_matrix(args, &settings),
    }
}

fn lambdas(sector: Sector, alpha: f64, beta: f64) -> (f64, f64, f64) {
    (sector.quantized_lambda1(beta), alpha * beta, beta * beta / 2.0)
}

fn record(sector: Sector, alpha: f64, sol: &QesSolution, branch_id: usize) -> ResultRecord {
    let (lambda1, lambda2, lambda4) = lambdas(sector, alpha, sol.beta);
    ResultRecord {
        dim: sector.dim,
        ell: sector.ell,
        degree: sector.degree,
        alpha,
        beta: sol.beta,
        energy: sol.energy,
        lambda1,
        lambda2,
        lambda4,
        coefficients: sol.coeffs.clone(),
        physical: sol.physical,
        residual: sol.residual,
        oracle_verdict: "unverified".into(),
        branch_id,
        reject_reason: None,
        ode_residual: None,
        matched_index: None,
        match_error: None,
        norm_integral: None,
    }
}

/// Physical solutions by energy, then rejected candidates.
pub fn records_from(result: &SpectralResult) -> Vec<ResultRecord> {
    let sector = result.sector;
    let alpha = result.alpha;
    let mut out: Vec<ResultRecord> = result.solutions.iter().map(|s| record(sector, alpha, s, 0)).collect();
    for rej in &result.rejected {
        let mut rec = match &rej.candidate {
            Some(sol) => record(sector, alpha, &QesSolution { physical: false, ..sol.clone() }, 0),
            None => {
                let sol = QesSolution {
                    energy: rej.energy.re,
                    coeffs: Vec::new(),
                    beta: rej.beta,
                    physical: false,
                    residual: rej.energy.im.abs(),
                };
                record(sector, alpha, &sol, 0)
            }
        };
        rec.reject_reason = Some(rej.reason.as_str().to_string());
        out.push(rec);
    }
    for (i, rec) in out.iter_mut().enumerate() {
        rec.branch_id = i;
    }
    out
}

fn solve_sector(dim: u32, ell: u32, degree: u32, alpha: f64, beta: Option<f64>, settings: &Settings) -> CliResult<Vec<ResultRecord>> {
    let sector = Sector::new(dim, ell, degree)?;
    let alpha = finite("alpha", alpha)?;
    let result = if sector.is_half_line() {
        let beta = beta.ok_or_else(|| Failure::usage("--beta is required for N = 1"))?;
        let params = AnsatzParams::new(alpha, finite("beta", beta)?)?;
        solve_n1(degree, &params, &settings.tols.spectra)?
    } else {
        if beta.is_some() {
            return Err(Failure::usage("--beta may not be given for N > 1; it is solved for"));
        }
        if alpha == 0.0 {
            return Err(QesError::Degenerate("alpha = 0 (lambda2 = 0) is excluded".into()).into());
        }
        if degree == 0 {
            // constant Φ needs α = 0 when N + 2l > 1
            return Ok(Vec::new());
        }
        let cfg = MultistartConfig { seed: settings.seed, tol: settings.tols.spectra, ..MultistartConfig::default() };
        solve_ngt1(sector, alpha, &cfg)?
    };
    Ok(records_from(&result))
}

/// Runs the oracles on one record and fills its oracle fields.
fn attach_oracle(rec: &mut ResultRecord, cfg: &OracleConfig) -> CliResult<()> {
    let sector = Sector::new(rec.dim, rec.ell, rec.degree)?;
    let well_formed = rec.coefficients.len() == rec.degree as usize + 1;
    if rec.physical && !well_formed {
        return Err(Failure::usage(format!(
            "record {}: {} coefficients for degree {}",
            rec.branch_id,
            rec.coefficients.len(),
            rec.degree
        )));
    }
    let spec = OscillatorSpec::new(sector, rec.lambda1, rec.lambda2, rec.lambda4);
    let spec = match spec {
        Ok(spec) if well_formed => spec,
        Ok(_) => {
            rec.oracle_verdict = oracle::Verdict::Unmatched.as_str().into();
            return Ok(());
        }
        Err(e) if rec.physical => return Err(e.into()),
        Err(_) => {
            rec.oracle_verdict = oracle::Verdict::Unmatched.as_str().into();
            return Ok(());
        }
    };
    let params = AnsatzParams { alpha: rec.alpha, beta: rec.beta };
    let sol = QesSolution {
        energy: rec.energy,
        coeffs: rec.coefficients.clone(),
        beta: rec.beta,
        physical: rec.physical,
        residual: rec.residual,
    };
    let report = oracle::verify(&spec, &params, &sol, cfg)?;
    rec.oracle_verdict = report.verdict.as_str().into();
    rec.ode_residual = report.grid.map(|_| report.ode_residual_max);
    rec.matched_index = report.matched_index;
    rec.match_error = report.match_error;
    rec.norm_integral = report.norm_integral;
    Ok(())
}

fn write_records<W: Write>(out: W, format: Format, records: &[ResultRecord]) -> CliResult<()> {
    match format {
        Format::Json => {
            let mut out = out;
            for rec in records {
                let value = serde_json::to_value(rec).context("serializing record")?;
                writeln!(out, "{value}")?;
            }
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS).context("writing csv")?;
            for rec in records {
                w.write_record(rec.csv_fields()).context("writing csv")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses JSON-lines or CSV records; the format is sniffed from the first byte.
pub fn read_records(text: &str) -> anyhow::Result<Vec<ResultRecord>> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if trimmed.starts_with('{') {
        return text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| serde_json::from_str(l).with_context(|| format!("line {}", n + 1)))
            .collect();
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().context("csv header")?.clone();
    reader
        .records()
        .enumerate()
        .map(|(n, row)| {
            let row = row.with_context(|| format!("csv row {}", n + 1))?;
            ResultRecord::from_csv(&header, &row).with_context(|| format!("csv row {}", n + 1))
        })
        .collect()
}

fn cmd_solve(args: &SolveArgs, settings: &Settings) -> CliResult<i32> {
    let dim = settings.need(args.dim, "dim")?;
    let ell = settings.need(args.ell, "ell")?;
    let degree = settings.need(args.degree, "degree")?;
    let alpha = settings.need(args.alpha, "alpha")?;
    let beta = settings.pick(args.beta, "beta")?;
    let mut records = solve_sector(dim, ell, degree, alpha, beta, settings)?;
    if args.verify || settings.config.flag("verify")? {
        let cfg = settings.oracle_config(args.grid_points, args.rmax)?;
        for rec in records.iter_mut() {
            attach_oracle(rec, &cfg)?;
        }
    }
    write_records(settings.sink()?, settings.format, &records)?;
    Ok(if records.iter().any(|r| r.physical) { EXIT_OK } else { EXIT_NO_RESULT })
}

fn cmd_niven(args: &NivenArgs, settings: &Settings) -> CliResult<i32> {
    let dim = settings.need(args.dim, "dim")?;
    let ell = settings.need(args.ell, "ell")?;
    let degree = settings.need(args.degree, "degree")?;
    let alpha = finite("alpha", settings.need(args.alpha, "alpha")?)?;
    let beta = finite("beta", settings.need(args.beta, "beta")?)?;
    let sector = Sector::new(dim, ell, degree)?;
    let defaults = NivenOptions::default();
    let opts = NivenOptions {
        starts: settings.pick(args.starts, "starts")?.unwrap_or(defaults.starts),
        seed: settings.seed,
        real_only: args.real_only || settings.config.flag("real-only")?,
        tol: settings.tols.niven,
        ..defaults
    };
    let outcome = solve_niven(alpha, beta, sector, &opts)?;
    let mut records = Vec::new();
    for (id, conf) in outcome.configurations.iter().enumerate() {
        let poly = polynomial_from_zeros(&conf.zeros);
        let energy = energy_from_zeros(&conf.zeros, alpha, beta);
        let check = consistency_check(&poly.coeffs, alpha, beta, energy, sector)?;
        records.push(NivenRecord {
            dim,
            ell,
            degree,
            alpha,
            beta,
            configuration_id: id,
            zeros: conf.zeros.iter().map(|z| [z.re, z.im]).collect(),
            residual_norm: conf.residual_norm,
            energy: energy.re,
            energy_imag: energy.im,
            consistency_residual: check.scaled_residual,
            consistency: if check.passes(settings.tols.consistency) { "pass" } else { "fail" }.into(),
        });
    }
    let mut out = settings.sink()?;
    match settings.format {
        Format::Json => {
            for rec in &records {
                writeln!(out, "{}", serde_json::to_value(rec).context("serializing record")?)?;
            }
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(NIVEN_COLUMNS).context("writing csv")?;
            for rec in &records {
                w.write_record(rec.csv_fields()).context("writing csv")?;
            }
            w.flush()?;
        }
    }
    if records.is_empty() {
        eprintln!("no configuration converged ({} starts, {} singular)", outcome.attempted, outcome.singular);
        return Ok(EXIT_NO_RESULT);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, settings: &Settings) -> CliResult<i32> {
    let input: PathBuf = settings.need(args.input.clone(), "input")?;
    let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
    let mut records = read_records(&text).with_context(|| format!("parsing {}", input.display()))?;
    if records.is_empty() {
        eprintln!("warning: {} holds no records", input.display());
    }
    let cfg = settings.oracle_config(args.grid_points, args.rmax)?;
    for rec in records.iter_mut() {
        attach_oracle(rec, &cfg)?;
    }
    write_records(settings.sink()?, settings.format, &records)?;
    let all_confirmed = records
        .iter()
        .filter(|r| r.physical)
        .all(|r| r.oracle_verdict == oracle::Verdict::Confirmed.as_str());
    Ok(if all_confirmed { EXIT_OK } else { EXIT_NO_RESULT })
}

fn parse_range(key: &str, s: &str) -> CliResult<(u32, u32)> {
    let bad = || Failure::usage(format!("--{key} expects a:b with a <= b, got {s}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestCase {
    pub dim: u32,
    pub ell: u32,
    pub degree: u32,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `completed` or `failed`
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub records: usize,
    pub physical: usize,
    pub rejected: usize,
    pub output: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub command: String,
    pub cases: Vec<ManifestCase>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn cmd_sweep(args: &SweepArgs, settings: &Settings) -> CliResult<i32> {
    let dim = settings.need(args.dim, "dim")?;
    let ell_spec: String = settings.need(args.ell_range.clone(), "ell-range")?;
    let degree_spec: String = settings.need(args.degree_range.clone(), "degree-range")?;
    let ells = parse_range("ell-range", &ell_spec)?;
    let degrees = parse_range("degree-range", &degree_spec)?;
    let alpha = finite("alpha", settings.need(args.alpha, "alpha")?)?;
    let beta = settings.pick(args.beta, "beta")?;
    let out: PathBuf = settings.need(args.out.clone(), "out")?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let ext = match settings.format {
        Format::Json => "jsonl",
        Format::Csv => "csv",
    };
    let mut cases = Vec::new();
    let mut failed = 0;
    for ell in ells.0..=ells.1 {
        for degree in degrees.0..=degrees.1 {
            let name = format!("case_l{ell}_m{degree}.{ext}");
            let mut case = ManifestCase {
                dim,
                ell,
                degree,
                alpha,
                beta,
                status: "completed".into(),
                error: None,
                records: 0,
                physical: 0,
                rejected: 0,
                output: name.clone(),
            };
            let records = match solve_sector(dim, ell, degree, alpha, beta, settings) {
                Ok(records) => records,
                Err(f) => {
                    failed += 1;
                    case.status = "failed".into();
                    case.error = Some(format!("{:#}", f.error));
                    Vec::new()
                }
            };
            case.records = records.len();
            case.physical = records.iter().filter(|r| r.physical).count();
            case.rejected = case.records - case.physical;
            let file = fs::File::create(out.join(&name)).with_context(|| format!("creating {name}"))?;
            write_records(BufWriter::new(file), settings.format, &records)?;
            cases.push(case);
        }
    }

    let mut command = format!(
        "qes sweep --dim {dim} --ell-range {}:{} --degree-range {}:{} --alpha {alpha}",
        ells.0, ells.1, degrees.0, degrees.1
    );
    if let Some(beta) = beta {
        command.push_str(&format!(" --beta {beta}"));
    }
    command.push_str(&format!(" --seed {} --format {}", settings.seed, if ext == "csv" { "csv" } else { "json" }));
    for spec in &settings.tol_specs {
        command.push_str(&format!(" --tol {spec}"));
    }
    let manifest = Manifest { version: env!("CARGO_PKG_VERSION").into(), seed: settings.seed, command, cases };
    let value = serde_json::to_value(&manifest).context("serializing manifest")?;
    let text = serde_json::to_string_pretty(&value).context("serializing manifest")?;
    fs::write(out.join(MANIFEST_NAME), text + "\n")?;
    if failed > 0 {
        eprintln!("{failed} case(s) failed; see {}", out.join(MANIFEST_NAME).display());
        return Ok(EXIT_NO_RESULT);
    }
    Ok(EXIT_OK)
}

fn fmt_entry(x: f64) -> String {
    // + 0.0 folds -0 into 0
    format!("{:.16e}", x + 0.0)
}

fn cmd_matrix(args: &MatrixArgs, settings: &Settings) -> CliResult<i32> {
    let kind = match args.kind {
        Some(k) => k,
        None => {
            let v: String = settings.need(None, "kind")?;
            Kind::from_str(&v, true).map_err(Failure::usage)?
        }
    };
    let degree = settings.need(args.degree, "degree")?;
    let alpha = finite("alpha", settings.need(args.alpha, "alpha")?)?;
    // β enters only through rows s >= 2
    let beta_used = match kind {
        Kind::F | Kind::P => degree >= 1,
        Kind::Q => degree >= 2,
    };
    let beta = match settings.pick(args.beta, "beta")? {
        Some(b) => finite("beta", b)?,
        None if beta_used => return Err(Failure::usage(format!("--beta is required for {kind:?} with m = {degree}"))),
        None => 0.0,
    };
    let matrix: BandedMatrix = match kind {
        Kind::P => build_p(degree, alpha, beta),
        Kind::F | Kind::Q => {
            let dim = settings.need(args.dim, "dim")?;
            let ell = settings.pick(args.ell, "ell")?.unwrap_or(0);
            let energy = settings
                .pick(args.energy, "energy")?
                .ok_or_else(|| Failure::usage(format!("--energy is required for {kind:?}")))?;
            let energy = finite("energy", energy)?;
            let sector = Sector::new(dim, ell, degree)?;
            if kind == Kind::F {
                build_f(sector, alpha, beta, energy)
            } else {
                build_q(sector, alpha, beta, energy)?
            }
        }
    };
    let mut out = settings.sink()?;
    let rows = matrix.to_rows();
    match settings.format {
        Format::Json => {
            let body = rows
                .iter()
                .map(|r| format!("[{}]", r.iter().map(|&x| fmt_entry(x)).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(
                out,
                "{{\"cols\":{},\"entries\":[{}],\"kind\":\"{:?}\",\"rows\":{}}}",
                matrix.cols(),
                body,
                kind,
                matrix.rows()
            )?;
        }
        Format::Csv => {
            for r in &rows {
                writeln!(out, "{}", r.iter().map(|&x| fmt_entry(x)).collect::<Vec<_>>().join(","))?;
            }
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}
