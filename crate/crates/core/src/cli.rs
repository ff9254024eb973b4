//! Command-line front end for `cover-census`.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on bad arguments.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::{
    asymptotic_report, collision_bound, e1_count, moment_e_x_r, p_x0_exact, rational_to_f64,
    AsymptoticReport, TrendCheck, TrendStatus,
};
use crate::cover_counts::{full_table, CoverCountError};
use crate::exact_kernel::{bell, falling_factorial, Natural, Rational};
use crate::oracle::{identity_checks, OracleConfig, OracleError, OracleSurvey, SLOW_ORACLE_LIMIT};
use crate::sampler::{estimate_moment, estimate_p_collision, estimate_p_x0, Estimate, SamplerConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Largest `|z|` accepted when an exact value is known.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(name = "cover-census", version, about = "Counts, verifies and samples 2-covers of [n]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stat {
    #[value(name = "p-x0")]
    PX0,
    Moment,
    #[value(name = "p-collision")]
    PCollision,
}

impl Stat {
    fn name(self) -> &'static str {
        match self {
            Stat::PX0 => "p-x0",
            Stat::Moment => "moment",
            Stat::PCollision => "p-collision",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact s, t, u, v, l and B_2n for n = 0..=max_n.
    Table {
        #[arg(long)]
        max_n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive verification over all partitions of [2n].
    Oracle {
        #[arg(long)]
        n: usize,
        /// Raise the size cap to the slow-mode limit.
        #[arg(long)]
        slow: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact counts against their asymptotic estimates on n = 4, 8, 16, ...
    Asymptotics {
        #[arg(long)]
        max_n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Rows above this n report estimates only.
        #[arg(long, default_value_t = 256)]
        exact_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate over uniform partitions of [2n].
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        stat: Stat,
        /// Moment order, required for `--stat moment`.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_MISMATCH,
        }
    }
}

impl From<CoverCountError> for CliError {
    fn from(e: CoverCountError) -> Self {
        CliError::Mismatch(e.to_string())
    }
}

/// Runs a parsed command, writing results to `out` (or `--out`) and
/// diagnostics to `err`. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(cli, err) {
        Ok(output) => {
            let written = match output.path {
                Some(path) => std::fs::write(path, &output.text),
                None => out.write_all(output.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_MISMATCH;
            }
            output.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

struct Output<'a> {
    text: String,
    path: Option<&'a PathBuf>,
    code: u8,
}

fn execute<'a>(cli: &'a Cli, err: &mut dyn Write) -> Result<Output<'a>, CliError> {
    match &cli.command {
        Command::Table { max_n, format, out } => Ok(Output {
            text: run_table(*max_n, *format)?,
            path: out.as_ref(),
            code: EXIT_OK,
        }),
        Command::Oracle {
            n,
            slow,
            workers,
            out,
        } => {
            let mut cfg = OracleConfig::from_env();
            if *slow {
                cfg.limit = cfg.limit.max(SLOW_ORACLE_LIMIT);
            }
            cfg.workers = *workers;
            let (text, passed) = run_oracle(*n, &cfg)?;
            Ok(Output {
                text,
                path: out.as_ref(),
                code: if passed { EXIT_OK } else { EXIT_MISMATCH },
            })
        }
        Command::Asymptotics {
            max_n,
            format,
            exact_limit,
            out,
        } => {
            let report = asymptotic_report(*max_n, *exact_limit).map_err(|e| match e {
                crate::asymptotics::AsymptoticsError::Counts(c) => CliError::from(c),
                other => CliError::Usage(other.to_string()),
            })?;
            writeln!(err, "# {}", report.header)?;
            for t in &report.trends {
                writeln!(err, "{}", trend_line(t))?;
            }
            Ok(Output {
                text: render_asymptotics(&report, *max_n, *exact_limit, *format)?,
                path: out.as_ref(),
                code: EXIT_OK,
            })
        }
        Command::Sample {
            n,
            stat,
            r,
            trials,
            seed,
            workers,
            out,
        } => {
            let cfg = SamplerConfig {
                trials: *trials,
                seed: *seed,
                workers: *workers,
            };
            let (text, within) = run_sample(*n, *stat, *r, &cfg)?;
            Ok(Output {
                text,
                path: out.as_ref(),
                code: if within { EXIT_OK } else { EXIT_MISMATCH },
            })
        }
    }
}

#[derive(Serialize)]
struct Envelope<P: Serialize, R: Serialize> {
    command: &'static str,
    params: P,
    rows: Vec<R>,
}

#[derive(Serialize)]
struct TableParams {
    max_n: usize,
}

#[derive(Serialize)]
struct TableRowJson {
    n: usize,
    s: String,
    t: String,
    u: String,
    v: String,
    l: String,
    bell2n: String,
}

pub const TABLE_HEADER: &str = "n,s,t,u,v,l,bell2n";

pub fn run_table(max_n: usize, format: Format) -> Result<String, CliError> {
    let table = full_table(max_n)?;
    match format {
        Format::Csv => {
            let mut text = String::new();
            text.push_str(TABLE_HEADER);
            text.push('\n');
            for r in &table.rows {
                let _ = writeln!(text, "{},{},{},{},{},{},{}", r.n, r.s, r.t, r.u, r.v, r.l, r.bell2n);
            }
            Ok(text)
        }
        Format::Json => {
            let rows = table
                .rows
                .iter()
                .map(|r| TableRowJson {
                    n: r.n,
                    s: r.s.to_string(),
                    t: r.t.to_string(),
                    u: r.u.to_string(),
                    v: r.v.to_string(),
                    l: r.l.to_string(),
                    bell2n: r.bell2n.to_string(),
                })
                .collect();
            to_json(&Envelope {
                command: "table",
                params: TableParams { max_n },
                rows,
            })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// One line of the oracle report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Every check the oracle command runs at `n`.
pub fn oracle_checks(survey: &OracleSurvey) -> Result<Vec<CheckLine>, CliError> {
    let n = survey.n();
    let counts = survey.raw_counts();
    let mut checks: Vec<CheckLine> = identity_checks(&counts)
        .into_iter()
        .map(|c| CheckLine::new(c.identity, c.passed, c.detail))
        .collect();

    let fibers = survey.fiber_report();
    let bad = fibers.mismatches().count();
    checks.push(CheckLine::new(
        "|phi^-1(cover)| = 2^(n - rho)",
        bad == 0,
        format!("{} covers, {bad} mismatches", fibers.entries.len()),
    ));
    checks.push(CheckLine::new(
        "phi maps C_n onto the proper covers",
        fibers.proper_onto,
        format!("|C_n| = {}", counts.c),
    ));

    let moments_ok = (0..=n).all(|r| counts.x_falling_moments[r] == falling_factorial(n, r) * bell(2 * n - r));
    checks.push(CheckLine::new(
        "sum (X)_r = (n)_r B_{2n-r}",
        moments_ok,
        format!("r = 0..={n}"),
    ));
    let e1 = e1_count(n);
    checks.push(CheckLine::new(
        "|E_1| = sum_r (-1)^r C(n,r) B_{2n-r}",
        e1 == counts.e1.into(),
        format!("{} vs {e1}", counts.e1),
    ));
    let p_collision = Rational::new(
        (Natural::from(counts.partitions - counts.e2)).into(),
        Natural::from(counts.partitions).into(),
    );
    let bound = collision_bound(n);
    checks.push(CheckLine::new(
        "1 - |E_2|/B_2n <= collision bound",
        p_collision <= bound,
        format!("{p_collision} <= {bound}"),
    ));

    let table = full_table(n)?;
    let row = table.row(n).expect("table covers n");
    let series = [&row.s, &row.t, &row.u, &row.v, &row.l];
    let lines = survey.line_count();
    let enumerated = [counts.s, counts.t, counts.u, counts.v, lines];
    let agree = series.iter().zip(enumerated).all(|(a, b)| **a == Natural::from(b));
    checks.push(CheckLine::new(
        "(s,t,u,v,l) agree with the series",
        agree,
        format!("series ({}, {}, {}, {}, {})", row.s, row.t, row.u, row.v, row.l),
    ));
    Ok(checks)
}

pub fn run_oracle(n: usize, cfg: &OracleConfig) -> Result<(String, bool), CliError> {
    let survey = OracleSurvey::run(n, cfg).map_err(|e| match e {
        OracleError::OverLimit { .. } => CliError::Usage(format!("{e}; pass --slow or set {}", crate::oracle::ORACLE_LIMIT_ENV)),
        other => CliError::Internal(other.to_string()),
    })?;
    let counts = survey.raw_counts();
    let checks = oracle_checks(&survey)?;
    let mut text = String::new();
    let _ = writeln!(text, "oracle n={n} partitions={}", counts.partitions);
    let _ = writeln!(
        text,
        "counts s={} t={} u={} v={} l={}",
        counts.s,
        counts.t,
        counts.u,
        counts.v,
        survey.line_count()
    );
    let _ = writeln!(text, "events E1={} E2={} C={}", counts.e1, counts.e2, counts.c);
    let hist: Vec<String> = counts
        .d_histogram
        .iter()
        .enumerate()
        .map(|(rho, d)| format!("{rho}:{d}"))
        .collect();
    let _ = writeln!(text, "D histogram (rho:count) {}", hist.join(" "));
    let moments: Vec<String> = counts.x_falling_moments.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(text, "sum (X)_r for r=0..{n}: {}", moments.join(" "));
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(text, "{status} {} [{}]", c.name, c.detail);
    }
    Ok((text, checks.iter().all(|c| c.passed)))
}

pub fn trend_line(t: &TrendCheck) -> String {
    let status = match t.status {
        TrendStatus::Pass => "PASS",
        TrendStatus::Warn => "WARN",
    };
    format!(
        "{status} trend {}: |ratio - 1| {} at n={} -> {} at n={}",
        t.ratio, t.deviation_first, t.n_first, t.deviation_last, t.n_last
    )
}

pub const ASYMPTOTICS_HEADER: &str = "n,bell_source,log_bell2n,log_s,log_t,log_u,log_v,log_l,\
est_st,est_uvl,saddle_uvl,m0,ratio_s,ratio_t,ratio_u,ratio_v,ratio_l,ratio_v_saddle,ratio_saddle_uvl";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct AsymptoticsParams {
    max_n: usize,
    exact_limit: usize,
}

#[derive(Serialize)]
struct AsymptoticsEnvelope<'a> {
    command: &'static str,
    params: AsymptoticsParams,
    header: &'static str,
    rows: &'a [crate::asymptotics::AsymptoticRow],
    trends: &'a [TrendCheck],
}

fn render_asymptotics(
    report: &AsymptoticReport,
    max_n: usize,
    exact_limit: usize,
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut text = String::from(ASYMPTOTICS_HEADER);
            text.push('\n');
            for r in &report.rows {
                let e = r.exact;
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.bell_source.as_str(),
                    r.log_bell2n,
                    opt(e.map(|e| e.s)),
                    opt(e.map(|e| e.t)),
                    opt(e.map(|e| e.u)),
                    opt(e.map(|e| e.v)),
                    opt(e.map(|e| e.l)),
                    r.est_st,
                    r.est_uvl,
                    r.saddle_uvl,
                    r.m0,
                    opt(r.ratio_s),
                    opt(r.ratio_t),
                    opt(r.ratio_u),
                    opt(r.ratio_v),
                    opt(r.ratio_l),
                    opt(r.ratio_v_saddle),
                    r.ratio_saddle_uvl,
                );
            }
            Ok(text)
        }
        Format::Json => to_json(&AsymptoticsEnvelope {
            command: "asymptotics",
            params: AsymptoticsParams { max_n, exact_limit },
            header: report.header,
            rows: &report.rows,
            trends: &report.trends,
        }),
    }
}

#[derive(Serialize)]
struct SampleParams {
    n: usize,
    stat: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    trials: u64,
    seed: u64,
    workers: usize,
}

#[derive(Serialize)]
struct SampleRecord {
    n: usize,
    trials: u64,
    seed: u64,
    estimate: f64,
    std_error: f64,
    exact: Option<f64>,
    exact_rational: Option<String>,
    z_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_bound: Option<f64>,
}

/// Exact value of a sampled statistic, when one is cheap enough to know.
pub fn exact_statistic(n: usize, stat: Stat, r: usize) -> Option<Rational> {
    match stat {
        Stat::PX0 => Some(p_x0_exact(n)),
        Stat::Moment => Some(moment_e_x_r(n, r)),
        Stat::PCollision => {
            let survey = OracleSurvey::run(n, &OracleConfig::from_env()).ok()?;
            let c = survey.raw_counts();
            Some(Rational::new(
                Natural::from(c.partitions - c.e2).into(),
                Natural::from(c.partitions).into(),
            ))
        }
    }
}

pub fn run_sample(n: usize, stat: Stat, r: Option<usize>, cfg: &SamplerConfig) -> Result<(String, bool), CliError> {
    let r = match (stat, r) {
        (Stat::Moment, None) => return Err(CliError::Usage("--stat moment requires --r".into())),
        (Stat::Moment, Some(r)) if r > n => {
            return Err(CliError::Usage(format!("--r {r} exceeds --n {n}")))
        }
        (_, r) => r,
    };
    let order = r.unwrap_or(0);
    let estimate: Estimate = match stat {
        Stat::PX0 => estimate_p_x0(n, cfg),
        Stat::Moment => estimate_moment(n, order, cfg),
        Stat::PCollision => estimate_p_collision(n, cfg),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let exact = exact_statistic(n, stat, order);
    let exact_f = exact.as_ref().map(rational_to_f64);
    let z = exact_f.map(|x| estimate.z_score(x));
    let record = SampleRecord {
        n,
        trials: cfg.trials,
        seed: cfg.seed,
        estimate: estimate.estimate,
        std_error: estimate.std_error,
        exact: exact_f,
        exact_rational: exact.as_ref().map(|q| q.to_string()),
        z_score: z,
        upper_bound: (stat == Stat::PCollision).then(|| rational_to_f64(&collision_bound(n))),
    };
    let text = to_json(&Envelope {
        command: "sample",
        params: SampleParams {
            n,
            stat: stat.name(),
            r: (stat == Stat::Moment).then_some(order),
            trials: cfg.trials,
            seed: cfg.seed,
            workers: cfg.workers,
        },
        rows: vec![record],
    })?;
    let within = z.is_none_or(|z| z.abs() <= Z_LIMIT);
    Ok((text, within))
}
