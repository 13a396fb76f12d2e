//! Batch front-end: job files in, reports and CSV out.
//!
//! A job is a JSON document:
//!
//! ```json
//! {
//!   "p": 2, "r": 1, "e": 1,
//!   "precision": { "initial": 64, "max": 1024, "auto_retry": true },
//!   "lambda": "1+T",
//!   "f": { "2": "1" },
//!   "degree": 40
//! }
//! ```
//!
//! `modulus` (little-endian, monic, `r+1` entries) overrides the built-in
//! modulus. Command parameters: `degree`, `n_max`, `cross_check`,
//! `kappa_max`, `r_max`, `horizon`, `samples`, `checkpoints` and `grid`
//! (`{"lambdas": [..], "maps": [{..}, ..]}`, swept lambda-major).
//!
//! Exit codes: 0 success, 1 I/O failure, 2 job or literal parse error,
//! 3 mathematical error, 4 check violations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::coeffield::Field;
use crate::discs::{classify_linearization_disc, ClassifyOptions, LinearizationReport, PeriodicSearch, Rationality, SearchOutcome};
use crate::error::Error;
use crate::laurent::{fmt_q, LaurentSeries, PrecisionPolicy, Valuation, Q};
use crate::powerseries::PowerSeriesMap;
use crate::schroder::{
    certify_divergence, check_coefficient_bound, check_structural_zeros, disc_data, full_conjugacy_residual,
    semiconjugacy_residual, solve_sfe, DivergenceVerdict, SolveOptions,
};

#[derive(Parser, Debug)]
#[command(name = "charp-linearize", version, about = "Linearization of indifferent power-series dynamics in characteristic p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Job file (JSON).
    #[arg(long, global = true)]
    pub job: Option<PathBuf>,
    /// Solve degree, overriding the job file.
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Write data to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Value of ε for decimal radii in human-readable reports (e.g. 1/2).
    #[arg(long, global = true)]
    pub display_epsilon: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Multiplier profile, gauge and radii.
    Analyze,
    /// Conjugacy coefficients as a growth CSV, with structure and bound checks.
    Solve,
    /// Divergence certificate for λx + a x^(p+1).
    CertifyDivergence,
    /// Linearization disc classification and boundary periodic points.
    Disc,
    /// Growth slopes over a grid of maps.
    Sweep,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Io(String),
    Parse(String),
    Math(String),
    /// Checks failed; the data produced so far is still emitted.
    Violations { output: String, messages: Vec<String> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Math(_) => 3,
            CliError::Violations { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Math(m) => write!(f, "error: {m}"),
            CliError::Violations { messages, .. } => write!(f, "check violations: {}", messages.join("; ")),
        }
    }
}

fn math(e: Error) -> CliError {
    match e {
        Error::Parse { .. }
        | Error::CoefficientNotInField(_)
        | Error::InvalidField(_)
        | Error::NotPrime(_)
        | Error::ReducibleModulus { .. } => CliError::Parse(e.to_string()),
        other => CliError::Math(other.to_string()),
    }
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSettings {
    pub initial: i64,
    pub max: i64,
    #[serde(default)]
    pub auto_retry: bool,
}

#[derive(Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub lambdas: Vec<String>,
    #[serde(default)]
    pub maps: Vec<BTreeMap<String, String>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub p: u32,
    #[serde(default = "one_usize")]
    pub r: usize,
    pub modulus: Option<Vec<u32>>,
    #[serde(default = "one_u32")]
    pub e: u32,
    pub precision: Option<PrecisionSettings>,
    pub lambda: Option<String>,
    #[serde(default)]
    pub f: BTreeMap<String, String>,
    pub degree: Option<usize>,
    pub n_max: Option<u32>,
    pub cross_check: Option<bool>,
    pub kappa_max: Option<u32>,
    pub r_max: Option<usize>,
    pub horizon: Option<i64>,
    #[serde(default)]
    pub samples: Vec<String>,
    pub checkpoints: Option<Vec<usize>>,
    pub grid: Option<Grid>,
}

fn one_usize() -> usize {
    1
}

fn one_u32() -> u32 {
    1
}

/// A parsed job: the JSON fields plus the source text for error locations.
#[derive(Debug, Clone)]
pub struct Job {
    pub data: JobFile,
    source: String,
}

/// `line:column` (1-based) of the first occurrence of `needle`.
fn locate(source: &str, needle: &str) -> String {
    match source.find(needle) {
        Some(off) => {
            let before = &source[..off];
            let line = before.matches('\n').count() + 1;
            let col = off - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("{line}:{col}")
        }
        None => "?:?".into(),
    }
}

impl Job {
    pub fn parse(source: &str) -> Result<Self, CliError> {
        let data: JobFile = serde_json::from_str(source)
            .map_err(|e| CliError::Parse(format!("{}:{}: {e}", e.line(), e.column())))?;
        if data.e == 0 {
            return Err(CliError::Parse(format!("{}: ramification e must be ≥ 1", locate(source, "\"e\""))));
        }
        Ok(Self { data, source: source.to_string() })
    }

    pub fn field(&self) -> Result<Field, CliError> {
        let s = &self.data;
        let field = match &s.modulus {
            Some(m) => Field::with_modulus(s.p, m.clone()),
            None => Field::builtin(s.p, s.r),
        }
        .map_err(|e| CliError::Parse(format!("{}: {e}", locate(&self.source, "\"p\""))))?;
        if field.r() != s.r {
            return Err(CliError::Parse(format!(
                "{}: modulus has degree {} but r = {}",
                locate(&self.source, "\"modulus\""),
                field.r(),
                s.r
            )));
        }
        Ok(field)
    }

    fn literal(&self, field: &Field, key: &str, text: &str) -> Result<LaurentSeries, CliError> {
        LaurentSeries::parse_exact(text, field, self.data.e)
            .map_err(|e| CliError::Parse(format!("{}: {key} = {text:?}: {e}", locate(&self.source, &format!("\"{text}\"")))))
    }

    fn build_map(&self, field: &Field, lambda: &str, table: &BTreeMap<String, String>) -> Result<PowerSeriesMap, CliError> {
        let lam = self.literal(field, "lambda", lambda)?;
        let mut terms = Vec::new();
        for (key, text) in table {
            let at = locate(&self.source, &format!("\"{key}\""));
            let deg: usize =
                key.trim().parse().map_err(|_| CliError::Parse(format!("{at}: f key {key:?} is not a degree")))?;
            if deg < 2 {
                return Err(CliError::Parse(format!(
                    "{at}: f has a degree-{deg} entry; the multiplier is given by \"lambda\""
                )));
            }
            terms.push((deg, self.literal(field, &format!("f[{deg}]"), text)?));
        }
        PowerSeriesMap::new(lam, terms).map_err(math)
    }

    /// The map `λx + Σ f[i] x^i` of the job.
    pub fn map(&self) -> Result<PowerSeriesMap, CliError> {
        let field = self.field()?;
        let lambda = self
            .data
            .lambda
            .as_deref()
            .ok_or_else(|| CliError::Parse("job has no \"lambda\"".into()))?;
        self.build_map(&field, lambda, &self.data.f)
    }

    pub fn policy(&self) -> Result<PrecisionPolicy, CliError> {
        match self.data.precision {
            None => Ok(PrecisionPolicy::default()),
            Some(p) => PrecisionPolicy::new(p.initial, p.max, p.auto_retry)
                .map_err(|e| CliError::Parse(format!("{}: {e}", locate(&self.source, "\"precision\"")))),
        }
    }
}

/// Settings that do not come from the job file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub degree: Option<usize>,
    pub display_epsilon: Option<Q>,
}

pub fn parse_epsilon(text: &str) -> Result<Q, CliError> {
    let bad = || CliError::Parse(format!("--display-epsilon {text:?}: expected a rational in (0, 1)"));
    let q = match text.split_once('/') {
        Some((n, d)) => {
            let (n, d): (i64, i64) = (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
            if d == 0 {
                return Err(bad());
            }
            Q::new(n, d)
        }
        None => Q::from_integer(text.trim().parse().map_err(|_| bad())?),
    };
    if q <= Q::from_integer(0) || q >= Q::from_integer(1) {
        return Err(bad());
    }
    Ok(q)
}

fn eps_power(eps: Q, v: Q) -> f64 {
    let e = *eps.numer() as f64 / *eps.denom() as f64;
    e.powf(*v.numer() as f64 / *v.denom() as f64)
}

fn push_radius(out: &mut String, name: &str, v: Q, eps: Option<Q>) {
    let _ = writeln!(out, "{name}: {}", fmt_q(v));
    if let Some(eps) = eps {
        let _ = writeln!(out, "{name}_radius_at_epsilon_{}: {:.6e}", fmt_q(eps), eps_power(eps, v));
    }
}

fn rationality_str(r: Rationality) -> String {
    match r {
        Rationality::RationalInK => "rational-in-K".into(),
        Rationality::RationalInExtension(e) => format!("rational-in-extension({e})"),
        Rationality::Irrational => "irrational".into(),
    }
}

pub fn cmd_analyze(job: &Job, opts: &RunOptions) -> Result<String, CliError> {
    let f = job.map()?;
    let (pr, gauge, dp) = disc_data(&f).map_err(math)?;
    let mut out = String::new();
    let _ = writeln!(out, "p: {}", pr.p);
    let _ = writeln!(out, "r: {}", f.field().r());
    let _ = writeln!(out, "e: {}", f.ram());
    let _ = writeln!(out, "lambda: {}", f.lambda());
    let _ = writeln!(out, "family: {}", if f.in_p_divisible_family() { "p-divisible" } else { "general" });
    let _ = writeln!(out, "m: {}", pr.m);
    let _ = writeln!(out, "v_m: {}", fmt_q(pr.v_m));
    let _ = writeln!(out, "k': {}", pr.k_prime);
    match (gauge, dp) {
        (Some(g), Some(dp)) => {
            let _ = writeln!(out, "A: {}", fmt_q(g.a));
            let _ = writeln!(out, "A_attained_at: {}", g.attained_at);
            push_radius(&mut out, "v_rho", dp.v_rho, opts.display_epsilon);
            push_radius(&mut out, "v_sigma", dp.v_sigma, opts.display_epsilon);
        }
        _ => {
            let _ = writeln!(out, "A: none");
            let _ = writeln!(out, "v_rho: none");
            let _ = writeln!(out, "v_sigma: none");
        }
    }
    Ok(out)
}

fn solve_degree(job: &Job, opts: &RunOptions, default: usize) -> usize {
    opts.degree.or(job.data.degree).unwrap_or(default)
}

pub fn cmd_solve(job: &Job, opts: &RunOptions) -> Result<String, CliError> {
    let f = job.map()?;
    let degree = solve_degree(job, opts, 64);
    if degree < 1 {
        return Err(CliError::Parse("degree must be ≥ 1".into()));
    }
    let g = job.policy()?.run(|rel| solve_sfe(&f, degree, SolveOptions::with_rel(rel))).map_err(math)?;
    let out = g.growth_csv();
    let mut messages = Vec::new();
    let sz = check_structural_zeros(&g, &f);
    if !sz.violations.is_empty() {
        messages.push(format!("structural zeros violated at k = {:?}", sz.violations));
    }
    if f.in_p_divisible_family() {
        if let Some(gauge) = f.gauge().map_err(math)? {
            let bounds = check_coefficient_bound(&g, &gauge);
            if !bounds.violations.is_empty() {
                messages.push(format!("coefficient bound violated at k = {:?}", bounds.violations));
            }
        }
    }
    if messages.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Violations { output: out, messages })
    }
}

pub fn cmd_certify_divergence(job: &Job, _opts: &RunOptions) -> Result<String, CliError> {
    let f = job.map()?;
    let n_max = job.data.n_max.unwrap_or(4);
    let cross = job.data.cross_check.unwrap_or(true);
    let cert = job.policy()?.run(|rel| certify_divergence(&f, n_max, rel, cross)).map_err(math)?;
    let conjectural = cert.verdict == DivergenceVerdict::Conjectural;
    let mark = if conjectural { " [conjectural]" } else { "" };
    let status = if conjectural { "conjectural" } else { "exact" };
    let verdict = match cert.verdict {
        DivergenceVerdict::Diverges => "diverges",
        DivergenceVerdict::Conjectural => "conjectural",
        DivergenceVerdict::Failed => "failed",
    };
    let mut out = String::new();
    let _ = writeln!(out, "# p: {}{mark}", cert.p);
    let _ = writeln!(out, "# m: {}{mark}", cert.m);
    let _ = writeln!(out, "# verdict: {verdict}{mark}");
    let agrees = match cert.generic_agrees {
        Some(true) => "yes",
        Some(false) => "no",
        None => "not-run",
    };
    let _ = writeln!(out, "# generic_solver_agrees: {agrees}{mark}");
    let status_col = if conjectural { "status (conjectural)" } else { "status" };
    let _ = writeln!(out, "N,degree,v_num,v_den,predicted_num,predicted_den,slope_num,slope_den,{status_col}");
    let pair = |q: Option<Q>| match q {
        Some(q) => format!("{},{}", q.numer(), q.denom()),
        None => ",".into(),
    };
    for row in &cert.rows {
        let computed = match row.computed {
            Valuation::Finite(q) => pair(Some(q)),
            Valuation::AtLeast(q) => format!(">={},{}", q.numer(), q.denom()),
            Valuation::Infinite => "inf,inf".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{computed},{},{},{status}",
            row.n,
            row.degree,
            pair(row.predicted),
            pair(row.slope)
        );
    }
    if cert.verdict == DivergenceVerdict::Failed || cert.generic_agrees == Some(false) {
        return Err(CliError::Violations {
            output: out,
            messages: vec!["computed valuations disagree with the divergence prediction".into()],
        });
    }
    Ok(out)
}

fn disc_report(job: &Job, f: &PowerSeriesMap, rep: &LinearizationReport, eps: Option<Q>) -> Result<String, CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "level: {}", rep.level.as_str());
    let _ = writeln!(
        out,
        "disc: v_radius={} boundary=open rationality={}",
        fmt_q(rep.disc.v_radius),
        rationality_str(rep.disc.rationality)
    );
    let _ = writeln!(out, "p: {}", rep.p);
    let _ = writeln!(out, "m: {}", rep.m);
    let _ = writeln!(out, "v_m: {}", fmt_q(rep.v_m));
    let _ = writeln!(out, "k': {}", rep.k_prime);
    let _ = writeln!(out, "A: {}", fmt_q(rep.a));
    push_radius(&mut out, "v_rho", rep.v_rho, eps);
    push_radius(&mut out, "v_sigma", rep.v_sigma, eps);
    let _ = writeln!(out, "solved_degree: {}", rep.solved_degree);
    let _ = writeln!(out, "degree_open_sigma: {}", rep.degree_open_sigma);
    let _ = writeln!(out, "degree_closed_sigma: {}", rep.degree_closed_sigma);
    let _ = writeln!(out, "v_b_kprime: {}", rep.b_kprime);
    if let Some(ext) = &rep.extension {
        let _ = writeln!(out, "extension: {}", serde_json::to_string(ext).expect("serializable"));
    }
    match &rep.periodic {
        None => {}
        Some(PeriodicSearch::Found { point, check }) => {
            let _ = writeln!(out, "periodic_point: found");
            let _ = writeln!(out, "kappa: {}", point.kappa);
            let _ = writeln!(out, "tower: r={} e={}", point.r, point.e);
            if point.r != f.field().r() {
                let _ = writeln!(out, "tower_generator_image: {}", point.generator_image);
            }
            let _ = writeln!(out, "point[r={},e={}]: {}", point.r, point.e, point.point);
            let _ = writeln!(out, "multiplier: {}", check.multiplier);
            let _ = writeln!(out, "multiplier_valuation: {}", check.multiplier_valuation);
            let _ = writeln!(out, "periodicity_residual: {}", check.residual);
        }
        Some(PeriodicSearch::NotFoundInTower(SearchOutcome::NotFound {
            r_max,
            e,
            kappa_max,
            multiple_roots,
            skipped_kappa,
        })) => {
            let _ = writeln!(out, "periodic_point: not-found-in-tower");
            let _ = writeln!(out, "searched: r_max={r_max} e={e} kappa_max={kappa_max}");
            let _ = writeln!(out, "multiple_residue_roots: {multiple_roots}");
            if !skipped_kappa.is_empty() {
                let _ = writeln!(out, "skipped_kappa: {skipped_kappa:?}");
            }
        }
        Some(PeriodicSearch::NotFoundInTower(SearchOutcome::Found(_))) => unreachable!(),
    }
    for note in &rep.notes {
        let _ = writeln!(out, "note: {note}");
    }
    if !job.data.samples.is_empty() {
        let field = f.field().clone();
        let g = job.policy()?.run(|rel| solve_sfe(f, rep.solved_degree, SolveOptions::with_rel(rel))).map_err(math)?;
        let _ = writeln!(out, "sample,semi_residual,full_residual");
        for text in &job.data.samples {
            let x = job.literal(&field, "sample", text)?;
            let show = |r: crate::error::Result<Valuation>| match r {
                Ok(v) => v.to_string(),
                Err(e) => format!("n/a ({e})"),
            };
            let semi = show(semiconjugacy_residual(f, &g, &x));
            let full = show(full_conjugacy_residual(f, &g, &x));
            let _ = writeln!(out, "{text},{semi},{full}");
        }
    }
    Ok(out)
}

pub fn cmd_disc(job: &Job, opts: &RunOptions) -> Result<String, CliError> {
    let f = job.map()?;
    let s = &job.data;
    let defaults = ClassifyOptions::default();
    let policy = job.policy()?;
    let rep = policy
        .run(|rel| {
            let copts = ClassifyOptions {
                degree: opts.degree.or(s.degree),
                rel,
                r_max: s.r_max,
                kappa_max: s.kappa_max,
                horizon: s.horizon.unwrap_or(defaults.horizon),
                max_degree: defaults.max_degree,
            };
            classify_linearization_disc(&f, &copts)
        })
        .map_err(math)?;
    disc_report(job, &f, &rep, opts.display_epsilon)
}

fn table_text(table: &BTreeMap<String, String>) -> String {
    let mut entries: Vec<(usize, &String)> =
        table.iter().map(|(k, v)| (k.trim().parse::<usize>().unwrap_or(0), v)).collect();
    entries.sort();
    entries.iter().map(|(d, t)| format!("{d}:{t}")).collect::<Vec<_>>().join(";")
}

pub const SWEEP_HEADER: &str = "instance,lambda,f,window_lo,window_hi,k,v_num,v_den,slope_num,slope_den";

/// For each grid instance and each window `(c_{i-1}, c_i]` of checkpoints,
/// the degree minimizing `v(b_k)/k` among coefficients known to be nonzero.
pub fn cmd_sweep(job: &Job, opts: &RunOptions) -> Result<String, CliError> {
    let field = job.field()?;
    let degree = solve_degree(job, opts, 128);
    let checkpoints = match &job.data.checkpoints {
        Some(c) => {
            let mut c = c.clone();
            c.retain(|&x| x >= 1 && x <= degree);
            c.sort_unstable();
            c.dedup();
            c
        }
        None => vec![degree / 4, degree / 2, degree].into_iter().filter(|&x| x >= 1).collect(),
    };
    let grid = job.data.grid.clone().unwrap_or_default();
    let policy = job.policy()?;
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    let mut instance = 0;
    for lambda in &grid.lambdas {
        for table in &grid.maps {
            let f = job.build_map(&field, lambda, table)?;
            let g = policy.run(|rel| solve_sfe(&f, degree, SolveOptions::with_rel(rel))).map_err(math)?;
            let mut lo = 1;
            for &hi in &checkpoints {
                let best = (lo + 1..=hi)
                    .filter_map(|k| g.valuation(k).finite().map(|v| (v / Q::from_integer(k as i64), k, v)))
                    .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
                let cells = match best {
                    Some((s, k, v)) => format!("{k},{},{},{},{}", v.numer(), v.denom(), s.numer(), s.denom()),
                    None => ",,,,".into(),
                };
                let _ = writeln!(out, "{instance},{lambda},{},{lo},{hi},{cells}", table_text(table));
                lo = hi;
            }
            instance += 1;
        }
    }
    Ok(out)
}

/// Runs one command on a job.
pub fn run(command: Command, job: &Job, opts: &RunOptions) -> Result<String, CliError> {
    match command {
        Command::Analyze => cmd_analyze(job, opts),
        Command::Solve => cmd_solve(job, opts),
        Command::CertifyDivergence => cmd_certify_divergence(job, opts),
        Command::Disc => cmd_disc(job, opts),
        Command::Sweep => cmd_sweep(job, opts),
    }
}

fn write_output(out: &Option<PathBuf>, data: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = (|| {
        let path = cli.job.as_ref().ok_or_else(|| CliError::Parse("--job <path> is required".into()))?;
        let source =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let job = Job::parse(&source).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}:{m}", path.display())),
            other => other,
        })?;
        let eps = cli.display_epsilon.as_deref().map(parse_epsilon).transpose()?;
        let opts = RunOptions { degree: cli.degree, display_epsilon: eps };
        run(cli.command, &job, &opts)
    })();
    match result {
        Ok(data) => match write_output(&cli.out, &data) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Err(e) => {
            if let CliError::Violations { output, messages } = &e {
                let _ = write_output(&cli.out, output);
                for m in messages {
                    eprintln!("violation: {m}");
                }
            } else {
                eprintln!("{e}");
            }
            e.exit_code()
        }
    }
}
