//! Command-line front end: argument parsing, configuration, job fan-out and
//! report output.

pub mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::certificate::{constant_premise_audits, dominance_check, BoundCertificate, Mode};
use crate::error::{Error, Result};
use crate::hecke::{decompose, verify_trace_identity, DecomposeOptions, DecompositionReport};
use crate::repcount::{r_brute, r_closed_form, r_theta, rep_polynomial, BRUTE_MAX_N, BRUTE_MAX_S};
use crate::singular::{check_theorem1, Theorem1Report};
use report::{rational_string, to_csv, to_json_string, write_atomic};

pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_N_MAX: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "sumsq",
    version,
    about = "Sums of squares, the singular series, and theta-power eigenform decompositions"
)]
pub struct Cli {
    /// Working precision in bits for floating computations.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Number of q-expansion coefficients for the modular-forms work.
    #[arg(long, global = true)]
    pub trunc: Option<usize>,
    /// Relative tolerance for floating verdicts.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file, or directory when a command emits one report per weight.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent jobs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// key=value file supplying defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// r_s(n) by every applicable method, with an agreement column.
    Rs {
        s: u32,
        /// A single n, a range a..b, or a comma-separated list of either.
        n: String,
        /// Require the brute-force count (fails outside its guard).
        #[arg(long)]
        brute: bool,
    },
    /// Exact check of |r_2k(n) - rho_2k(n)| <= C_k d(n) n^((k-1)/2).
    Theorem1 {
        k: u32,
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Eigenform decomposition of theta^2k on Gamma0(4).
    Decompose { k: u32 },
    /// Decomposition and coefficient positivity over a grid of even weights.
    Positivity {
        /// Even weights: a..b, a list, or both.
        k: String,
    },
    /// Analytic bound certificate over a grid of even weights >= 40.
    Certificate {
        k: String,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
    },
    /// Fast end-to-end consistency checks.
    Selftest,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Settings after merging flags, config file and defaults (flags win).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub truncation: Option<usize>,
    pub tolerance: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n_max: Option<u64>,
    pub mode: Option<Mode>,
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("config line {}: expected key=value", i + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::invalid(format!("config: bad value {v:?} for {key}")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<RunConfig> {
        let file = match &cli.config {
            Some(path) => parse_config(&fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        const KEYS: [&str; 8] = [
            "precision",
            "trunc",
            "tol",
            "format",
            "out",
            "jobs",
            "n_max",
            "mode",
        ];
        if let Some(key) = file.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::invalid(format!("config: unknown key {key:?}")));
        }
        let format = match (&cli.format, file.get("format")) {
            (Some(f), _) => *f,
            (None, Some(v)) => Format::from_str(v, true)
                .map_err(|_| Error::invalid(format!("config: bad format {v:?}")))?,
            (None, None) => Format::Json,
        };
        let (cmd_n_max, cmd_mode) = match &cli.command {
            Command::Theorem1 { n_max, .. } => (*n_max, None),
            Command::Certificate { mode, .. } => (None, *mode),
            _ => (None, None),
        };
        let config = RunConfig {
            precision_bits: cli
                .precision
                .or(config_value(&file, "precision")?)
                .unwrap_or(DEFAULT_PRECISION),
            truncation: cli.trunc.or(config_value(&file, "trunc")?),
            tolerance: cli
                .tol
                .or(config_value(&file, "tol")?)
                .unwrap_or(DEFAULT_TOLERANCE),
            format,
            out: cli.out.clone().or(config_value(&file, "out")?),
            jobs: cli.jobs.or(config_value(&file, "jobs")?),
            n_max: cmd_n_max.or(config_value(&file, "n_max")?),
            mode: cmd_mode.or(config_value(&file, "mode")?),
        };
        if config.precision_bits < 64 {
            return Err(Error::invalid(format!(
                "precision must be >= 64 bits, got {}",
                config.precision_bits
            )));
        }
        if !(config.tolerance > 0.0) {
            return Err(Error::invalid(format!(
                "tolerance must be positive, got {}",
                config.tolerance
            )));
        }
        if config.jobs == Some(0) {
            return Err(Error::invalid("jobs must be >= 1"));
        }
        Ok(config)
    }

    fn decompose_options(&self) -> DecomposeOptions {
        DecomposeOptions {
            truncation: self.truncation,
            precision: self.precision_bits,
            tolerance: self.tolerance,
            max_precision: self.precision_bits.max(1024),
        }
    }
}

/// Expands `"a..b"`, `"a"` and comma-separated mixtures into a sorted list.
/// With `even_only`, ranges keep only even values and explicit odd values are rejected.
pub fn parse_grid(spec: &str, even_only: bool) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::invalid(format!("cannot parse {part:?} as a number or a..b range"));
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(Error::invalid(format!("empty range {part:?}")));
            }
            out.extend((a..=b).filter(|v| !even_only || v % 2 == 0));
        } else {
            let v: u64 = part.parse().map_err(|_| bad())?;
            if even_only && v % 2 == 1 {
                return Err(Error::invalid(format!("weight {v} is odd")));
            }
            out.push(v);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::invalid(format!("no values in {spec:?}")));
    }
    Ok(out)
}

fn grid_u32(spec: &str) -> Result<Vec<u32>> {
    parse_grid(spec, true)?
        .into_iter()
        .map(|v| u32::try_from(v).map_err(|_| Error::invalid(format!("weight {v} too large"))))
        .collect()
}

/// One report: its file stem, verdict, JSON value and CSV rows.
struct Job {
    name: String,
    passed: bool,
    value: Value,
    rows: Vec<Vec<String>>,
}

impl Job {
    fn new<T: Serialize>(
        name: String,
        passed: bool,
        report: &T,
        rows: Vec<Vec<String>>,
    ) -> Result<Job> {
        Ok(Job {
            name,
            passed,
            value: serde_json::to_value(report)?,
            rows,
        })
    }
}

struct Outcome {
    header: Vec<&'static str>,
    jobs: Vec<Job>,
    /// Whether `--out` names a directory holding one file per job.
    per_job_files: bool,
}

#[derive(Serialize)]
struct RsRow {
    n: u64,
    brute: Option<String>,
    theta: String,
    polynomial: String,
    closed_form: Option<String>,
    agree: bool,
}

#[derive(Serialize)]
struct RsReport {
    s: u32,
    rows: Vec<RsRow>,
    passed: bool,
}

fn cmd_rs(s: u32, n_spec: &str, require_brute: bool) -> Result<Outcome> {
    let ns = parse_grid(n_spec, false)?;
    let rows: Vec<RsRow> = ns
        .par_iter()
        .map(|&n| -> Result<RsRow> {
            let brute = if require_brute || (s <= BRUTE_MAX_S && n <= BRUTE_MAX_N) {
                Some(r_brute(s, n)?)
            } else {
                None
            };
            let theta = r_theta(u64::from(s), n);
            let polynomial = rep_polynomial(n).evaluate(u64::from(s));
            let closed = if matches!(s, 4 | 6 | 8) && n >= 1 {
                Some(r_closed_form(s, n)?)
            } else {
                None
            };
            let agree = polynomial == theta
                && brute.as_ref().map_or(true, |b| *b == theta)
                && closed.as_ref().map_or(true, |c| *c == theta);
            Ok(RsRow {
                n,
                brute: brute.map(|v| v.to_string()),
                theta: theta.to_string(),
                polynomial: polynomial.to_string(),
                closed_form: closed.map(|v| v.to_string()),
                agree,
            })
        })
        .collect::<Result<_>>()?;
    let passed = rows.iter().all(|r| r.agree);
    let csv = rows
        .iter()
        .map(|r| {
            vec![
                s.to_string(),
                r.n.to_string(),
                r.brute.clone().unwrap_or_default(),
                r.theta.clone(),
                r.polynomial.clone(),
                r.closed_form.clone().unwrap_or_default(),
                r.agree.to_string(),
            ]
        })
        .collect();
    let report = RsReport { s, rows, passed };
    Ok(Outcome {
        header: vec![
            "s",
            "n",
            "brute",
            "theta",
            "polynomial",
            "closed_form",
            "agree",
        ],
        jobs: vec![Job::new(format!("rs_s{s}"), passed, &report, csv)?],
        per_job_files: false,
    })
}

fn theorem1_rows(r: &Theorem1Report) -> Vec<Vec<String>> {
    r.records
        .iter()
        .map(|rec| {
            vec![
                r.k.to_string(),
                rec.n.to_string(),
                rec.r.to_string(),
                rational_string(&rec.rho),
                rational_string(&rec.error),
                rational_string(&rec.bound_squared_margin),
                rec.parity_applicable.to_string(),
            ]
        })
        .collect()
}

fn cmd_theorem1(k: u32, config: &RunConfig) -> Result<Outcome> {
    let report = check_theorem1(k, config.n_max.unwrap_or(DEFAULT_N_MAX))?;
    Ok(Outcome {
        header: vec![
            "k",
            "n",
            "r",
            "rho",
            "R",
            "bound_squared_margin",
            "parity_applicable",
        ],
        jobs: vec![Job::new(
            format!("theorem1_k{k}"),
            report.passed(),
            &report,
            theorem1_rows(&report),
        )?],
        per_job_files: false,
    })
}

fn decomposition_rows(r: &DecompositionReport) -> Vec<Vec<String>> {
    let opt = |v: &Option<crate::BigFloat>| {
        v.as_ref()
            .map(|x| x.to_decimal_string())
            .unwrap_or_default()
    };
    r.components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                r.k.to_string(),
                i.to_string(),
                c.level.to_string(),
                c.dimension.to_string(),
                c.t3_eigenvalue.to_decimal_string(),
                c.c.to_decimal_string(),
                opt(&c.d),
                opt(&c.e),
                r.passed().to_string(),
            ]
        })
        .collect()
}

const DECOMPOSITION_HEADER: [&str; 9] = [
    "k",
    "component",
    "level",
    "dimension",
    "t3_eigenvalue",
    "c",
    "d",
    "e",
    "passed",
];

fn decomposition_job(prefix: &str, k: u32, config: &RunConfig) -> Result<Job> {
    let report = decompose(k, &config.decompose_options())?;
    Job::new(
        format!("{prefix}_k{k}"),
        report.passed(),
        &report,
        decomposition_rows(&report),
    )
}

fn cmd_decompose(k: u32, config: &RunConfig) -> Result<Outcome> {
    Ok(Outcome {
        header: DECOMPOSITION_HEADER.to_vec(),
        jobs: vec![decomposition_job("decompose", k, config)?],
        per_job_files: false,
    })
}

fn cmd_positivity(spec: &str, config: &RunConfig) -> Result<Outcome> {
    let ks = grid_u32(spec)?;
    let jobs = ks
        .par_iter()
        .map(|&k| decomposition_job("positivity", k, config))
        .collect::<Result<_>>()?;
    Ok(Outcome {
        header: DECOMPOSITION_HEADER.to_vec(),
        jobs,
        per_job_files: true,
    })
}

fn certificate_row(c: &BoundCertificate) -> Vec<String> {
    let mut row = vec![c.k.to_string(), c.mode.to_string()];
    for b in [
        c.main_term(),
        &c.range2_bound,
        &c.range3_crude,
        &c.range3_refined,
        &c.range4_bound,
        &c.range4_corrected,
        &c.infty_part2_bound,
        &c.cusp0_small_v_bound,
        &c.cusp_half_bound,
    ] {
        row.push(b.ln.to_decimal_string());
    }
    row.push(c.margin.to_decimal_string());
    row.push(c.normalized_margin.to_decimal_string());
    row.push(c.passed.to_string());
    row
}

fn cmd_certificate(spec: &str, config: &RunConfig) -> Result<Outcome> {
    let ks = grid_u32(spec)?;
    let mode = config.mode.unwrap_or(Mode::Refined);
    let jobs = ks
        .par_iter()
        .map(|&k| {
            let c = dominance_check(k, mode, config.precision_bits)?;
            Job::new(
                format!("certificate_{mode}_k{k}"),
                c.passed,
                &c,
                vec![certificate_row(&c)],
            )
        })
        .collect::<Result<_>>()?;
    Ok(Outcome {
        header: vec![
            "k",
            "mode",
            "ln_main_term",
            "ln_range2",
            "ln_range3_crude",
            "ln_range3_refined",
            "ln_range4",
            "ln_range4_corrected",
            "ln_infty_part2",
            "ln_cusp0_small_v",
            "ln_cusp_half",
            "margin",
            "normalized_margin",
            "passed",
        ],
        jobs,
        per_job_files: true,
    })
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct SelftestReport {
    checks: Vec<Check>,
    passed: bool,
}

fn cmd_selftest(config: &RunConfig) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut check = |name, passed, detail: String| {
        checks.push(Check {
            name,
            passed,
            detail,
        })
    };

    let r = [
        r_brute(6, 2)?,
        r_theta(6, 2),
        rep_polynomial(2).evaluate(6),
        r_closed_form(6, 2)?,
    ];
    check(
        "r6(2) = 60 by four methods",
        r.iter().all(|v| *v == 60),
        format!("{r:?}"),
    );

    let t = check_theorem1(6, 200)?;
    check(
        "theorem1 k=6, n<=200",
        t.passed(),
        format!(
            "failures {:?}, equality at 1: {}",
            t.failures, t.equality_at_1
        ),
    );

    let opts = config.decompose_options();
    let d = decompose(6, &opts)?;
    let c: Vec<f64> = d.components.iter().map(|c| c.c.to_f64()).collect();
    check(
        "decompose k=6 gives c = [16]",
        d.passed() && c.len() == 1 && (c[0] - 16.0).abs() < 1e-12,
        format!("{c:?}"),
    );

    let tr = verify_trace_identity(10, &opts)?;
    check(
        "trace identity k=10",
        tr.passed,
        format!("expected {}", rational_string(&tr.expected)),
    );

    let audits = constant_premise_audits(config.precision_bits)?;
    let failed: Vec<&str> = audits
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.as_str())
        .collect();
    check(
        "bound premises",
        failed.is_empty(),
        format!("failed: {failed:?}"),
    );

    let cert = dominance_check(200, Mode::Refined, config.precision_bits)?;
    check(
        "refined certificate k=200",
        cert.passed,
        format!("normalized margin {}", cert.normalized_margin.to_f64()),
    );

    let passed = checks.iter().all(|c| c.passed);
    let rows = checks
        .iter()
        .map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()])
        .collect();
    let report = SelftestReport { checks, passed };
    Ok(Outcome {
        header: vec!["check", "passed", "detail"],
        jobs: vec![Job::new("selftest".into(), passed, &report, rows)?],
        per_job_files: false,
    })
}

fn render(value: &Value, header: &[&str], rows: &[Vec<String>], format: Format) -> Result<String> {
    match format {
        Format::Json => to_json_string(value),
        Format::Csv => Ok(to_csv(header, rows)),
    }
}

fn emit(outcome: &Outcome, config: &RunConfig) -> Result<()> {
    let ext = match config.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    match &config.out {
        Some(dir) if outcome.per_job_files => {
            for job in &outcome.jobs {
                let text = render(&job.value, &outcome.header, &job.rows, config.format)?;
                write_atomic(&dir.join(format!("{}.{ext}", job.name)), &text)?;
                eprintln!("{}: {}", job.name, if job.passed { "pass" } else { "FAIL" });
            }
        }
        target => {
            let value = if outcome.per_job_files {
                Value::Array(outcome.jobs.iter().map(|j| j.value.clone()).collect())
            } else {
                outcome.jobs[0].value.clone()
            };
            let rows: Vec<Vec<String>> = outcome.jobs.iter().flat_map(|j| j.rows.clone()).collect();
            let text = render(&value, &outcome.header, &rows, config.format)?;
            match target {
                Some(path) => write_atomic(path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn execute(cli: &Cli, config: &RunConfig) -> Result<bool> {
    let outcome = match &cli.command {
        Command::Rs { s, n, brute } => cmd_rs(*s, n, *brute)?,
        Command::Theorem1 { k, .. } => cmd_theorem1(*k, config)?,
        Command::Decompose { k } => cmd_decompose(*k, config)?,
        Command::Positivity { k } => cmd_positivity(k, config)?,
        Command::Certificate { k, .. } => cmd_certificate(k, config)?,
        Command::Selftest => cmd_selftest(config)?,
    };
    emit(&outcome, config)?;
    Ok(outcome.jobs.iter().all(|j| j.passed))
}

/// Runs a parsed command line; the return value is the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = RunConfig::resolve(&cli).and_then(|config| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = config.jobs {
            pool = pool.num_threads(n);
        }
        let pool = pool
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| execute(&cli, &config))
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
