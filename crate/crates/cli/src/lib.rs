//! `cone-h2` command-line front end.
//!
//! Subcommands read a JSON problem file (or a single transfer function),
//! run the synthesis pipeline, and print text, JSON or CSV reports with a
//! fixed 12-significant-digit number format.

pub mod checkpoints;
pub mod format;
pub mod io;

use std::fmt::Write as _;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cone_h2::lattice_sim::{self, simulate_feedback, FeedbackLoop, LatticeSignal, LatticeSystem};
use cone_h2::statespace::{expand_realization, realize_rational};
use cone_h2::synthesis::{self, closed_loop, ProblemMode, SynthesisOptions, DEFAULT_ORDER};
use cone_h2::{Error, Problem, Rational, Synthesis};
use serde::Serialize;
use thiserror::Error as ThisError;

use crate::format::{num, round};
use crate::io::{Input, Orders, ProblemFile, RealizationJson, TransferSpec, Triple};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, Clone, ThisError, PartialEq)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }

    pub fn tolerance(message: impl Into<String>) -> Self {
        Self { code: EXIT_TOLERANCE, message: message.into() }
    }

    /// Maps a pipeline error, prefixing the failing operation.
    pub fn from_core(op: &str, e: Error) -> Self {
        let code = match e {
            Error::UnsupportedInnerStructure(_) | Error::NotRealizableAsLCausal(_) => EXIT_UNSUPPORTED,
            Error::SingularD { .. } | Error::AlgebraicLoop => EXIT_TOLERANCE,
            _ => EXIT_INVALID,
        };
        Self { code, message: format!("{op}: {e}") }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cone-h2", version, about = "Optimal H2 controllers for cone-causal spatially invariant systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the optimal controller at one eta order
    Synth(SynthArgs),
    /// Closed-loop norm for a range of eta orders
    Sweep(SweepArgs),
    /// Run the built-in ring example and check it against reference values
    PaperExample(ExampleArgs),
    /// Simulate an impulse response on a ring lattice (CSV)
    Simulate(SimulateArgs),
    /// Print an l-causal state-space realization (JSON)
    Realize(RealizeArgs),
    /// Print the causal expansion coefficients
    Expand(ExpandArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Which transfer function of a problem file a command acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemKind {
    /// `T1 - T2 Q` (the feedback loop in disturbance-attenuation mode)
    ClosedLoop,
    K,
    Q,
    T1,
    T2,
    Gyu,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OrderArgs {
    /// Total temporal order of the eta family
    #[arg(short = 'm', long = "eta-order")]
    pub eta_order: Option<i64>,
    /// Spatial expansion order for norms
    #[arg(short = 'S', long = "spatial-order")]
    pub spatial_order: Option<i64>,
    /// Temporal expansion order for norms
    #[arg(short = 'T', long = "temporal-order")]
    pub temporal_order: Option<i64>,
}

impl OrderArgs {
    fn resolve(&self, file: Orders) -> SynthesisOptions {
        SynthesisOptions {
            eta_order: self.eta_order.or(file.m).unwrap_or(1),
            spatial_order: self.spatial_order.or(file.s).unwrap_or(DEFAULT_ORDER),
            temporal_order: self.temporal_order.or(file.t).unwrap_or(DEFAULT_ORDER),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub orders: OrderArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub file: PathBuf,
    /// Inclusive range `a..b`
    #[arg(long = "m-range", default_value = "0..6", value_parser = parse_range)]
    pub m_range: RangeInclusive<i64>,
    #[arg(short = 'S', long = "spatial-order")]
    pub spatial_order: Option<i64>,
    #[arg(short = 'T', long = "temporal-order")]
    pub temporal_order: Option<i64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExampleArgs {
    #[arg(long = "m-range", default_value = "0..6", value_parser = parse_range)]
    pub m_range: RangeInclusive<i64>,
    #[arg(short = 'S', long = "spatial-order", default_value_t = DEFAULT_ORDER)]
    pub spatial_order: i64,
    #[arg(short = 'T', long = "temporal-order", default_value_t = DEFAULT_ORDER)]
    pub temporal_order: i64,
    /// Write the example as a problem file and exit
    #[arg(long = "write-problem")]
    pub write_problem: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 512)]
    pub sites: usize,
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    #[arg(long = "impulse-site", default_value_t = 0, allow_hyphen_values = true)]
    pub impulse_site: i64,
    /// Defaults to the closed loop for problem files
    #[arg(long, value_enum)]
    pub system: Option<SystemKind>,
    #[command(flatten)]
    pub orders: OrderArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RealizeArgs {
    pub file: PathBuf,
    /// Defaults to K for problem files
    #[arg(long, value_enum)]
    pub system: Option<SystemKind>,
    #[command(flatten)]
    pub orders: OrderArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    pub file: PathBuf,
    #[arg(short = 'S', long = "spatial-order", default_value_t = 5)]
    pub spatial_order: i64,
    #[arg(short = 'T', long = "temporal-order", default_value_t = 5)]
    pub temporal_order: i64,
    /// Defaults to Gyu for problem files
    #[arg(long, value_enum)]
    pub system: Option<SystemKind>,
    /// Eta order when the system needs a synthesis
    #[arg(short = 'm', long = "eta-order")]
    pub eta_order: Option<i64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `a..b` or `a..=b` (both inclusive) with `0 <= a <= b`.
pub fn parse_range(s: &str) -> Result<RangeInclusive<i64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: i64 = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: i64 = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a < 0 || b < a {
        return Err(format!("need 0 <= a <= b, got {a}..{b}"));
    }
    Ok(a..=b)
}

/// Runs one command, writing the report to `out` unless `--out` is given.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::PaperExample(a) => cmd_paper_example(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Realize(a) => cmd_realize(&a, out),
        Command::Expand(a) => cmd_expand(&a, out),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let res = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("writing {}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| format!("writing output: {e}")),
    };
    res.map_err(CliError::invalid)
}

fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    match io::load(path)? {
        Input::Problem(p) => Ok(p),
        Input::Transfer(_) => Err(CliError::invalid(format!(
            "{}: expected a problem file with a \"mode\" field",
            path.display()
        ))),
    }
}

fn run_synthesis(prob: &Problem<f64>, opts: SynthesisOptions) -> Result<Synthesis, CliError> {
    synthesis::synthesize(prob, opts).map_err(|e| CliError::from_core("synthesis::synthesize", e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct EtaJson {
    i: i64,
    coeffs: Vec<f64>,
}

#[derive(Serialize)]
struct SynthJson {
    eta_order: i64,
    spatial_order: i64,
    temporal_order: i64,
    #[serde(rename = "T2in")]
    t2in: String,
    #[serde(rename = "T2out")]
    t2out: TransferSpec,
    eta: Vec<EtaJson>,
    #[serde(rename = "G1")]
    g1: Vec<Triple>,
    #[serde(rename = "Q")]
    q: TransferSpec,
    q_order: i64,
    #[serde(rename = "K")]
    k: TransferSpec,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "J_tail_bound_sq")]
    j_tail: f64,
    #[serde(rename = "J_opt")]
    j_opt: f64,
    centralized: f64,
    eta_tail_sq: f64,
    #[serde(rename = "K_realization")]
    k_realization: RealizationJson,
}

fn synth_json(r: &Synthesis) -> SynthJson {
    SynthJson {
        eta_order: r.options.eta_order,
        spatial_order: r.options.spatial_order,
        temporal_order: r.options.temporal_order,
        t2in: format!("λ^{}", r.factorization.delay),
        t2out: TransferSpec::rounded(&r.factorization.outer),
        eta: r.eta.iter().map(|(i, e)| EtaJson { i: *i, coeffs: e.coeffs().iter().map(|&v| round(v)).collect() }).collect(),
        g1: io::triples(&r.g1),
        q: TransferSpec::rounded(&r.q),
        q_order: r.q_order(),
        k: TransferSpec::rounded(&r.k),
        j: round(r.j.value),
        j_tail: round(r.j.tail_bound_sq),
        j_opt: round(r.j_opt),
        centralized: round(r.centralized),
        eta_tail_sq: round(r.eta_tail_sq),
        k_realization: (&r.k_realization).into(),
    }
}

fn poly_text(s: &cone_h2::Series) -> String {
    let terms: Vec<String> = s.triples().into_iter().map(|(i, t, v)| format!("{} z^{i} λ^{t}", num(v))).collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn rational_text(r: &Rational) -> String {
    if r.is_polynomial() {
        poly_text(r.num())
    } else {
        format!("[{}] / [{}]", poly_text(r.num()), poly_text(r.den()))
    }
}

fn synth_text(r: &Synthesis) -> String {
    let mut s = String::new();
    let o = r.options;
    writeln!(s, "eta order m = {}, S = {}, T = {}", o.eta_order, o.spatial_order, o.temporal_order).unwrap();
    writeln!(s, "T2in = λ^{}", r.factorization.delay).unwrap();
    writeln!(s, "T2out = {}", rational_text(&r.factorization.outer)).unwrap();
    for (i, e) in &r.eta {
        let c: Vec<String> = e.coeffs().iter().map(|&v| num(v)).collect();
        writeln!(s, "eta~_{i} = [{}]", c.join(", ")).unwrap();
    }
    writeln!(s, "Q (order {}) = {}", r.q_order(), rational_text(&r.q)).unwrap();
    writeln!(s, "K = {}", rational_text(&r.k)).unwrap();
    writeln!(s, "K realization: {} states", r.k_realization.states()).unwrap();
    writeln!(s, "J = {}", num(r.j.value)).unwrap();
    writeln!(s, "J tail bound (squared) = {}", num(r.j.tail_bound_sq)).unwrap();
    writeln!(s, "J_opt = {}", num(r.j_opt)).unwrap();
    writeln!(s, "centralized = {}", num(r.centralized)).unwrap();
    s
}

fn synth_csv(r: &Synthesis) -> String {
    let mut s = String::from("quantity,i,t,value\n");
    for (i, e) in &r.eta {
        for (t, v) in e.iter() {
            writeln!(s, "eta,{i},{t},{}", num(v)).unwrap();
        }
    }
    for (name, series) in [("Q_num", r.q.num()), ("Q_den", r.q.den()), ("K_num", r.k.num()), ("K_den", r.k.den())] {
        for (i, t, v) in series.triples() {
            writeln!(s, "{name},{i},{t},{}", num(v)).unwrap();
        }
    }
    for (name, v) in [
        ("J", r.j.value),
        ("J_tail_bound_sq", r.j.tail_bound_sq),
        ("J_opt", r.j_opt),
        ("centralized", r.centralized),
    ] {
        writeln!(s, "{name},,,{}", num(v)).unwrap();
    }
    s
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pf = load_problem(&a.file)?;
    let prob = pf.to_problem()?;
    let r = run_synthesis(&prob, a.orders.resolve(pf.orders()))?;
    let text = match a.format {
        Format::Text => synth_text(&r),
        Format::Json => to_json(&synth_json(&r)),
        Format::Csv => synth_csv(&r),
    };
    emit(a.out.as_deref(), &text, out)
}

#[derive(Serialize)]
struct SweepRow {
    m: i64,
    q_order: i64,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "J_tail_bound_sq")]
    j_tail: f64,
}

#[derive(Serialize)]
struct SweepJson {
    rows: Vec<SweepRow>,
    #[serde(rename = "J_opt")]
    j_opt: f64,
    centralized: f64,
}

fn sweep_report(rs: &[Synthesis], format: Format) -> String {
    let (j_opt, centralized) = rs.first().map_or((f64::NAN, f64::NAN), |r| (r.j_opt, r.centralized));
    match format {
        Format::Csv => {
            let mut s = String::from("m,q_order,J\n");
            for r in rs {
                writeln!(s, "{},{},{}", r.options.eta_order, r.q_order(), num(r.j.value)).unwrap();
            }
            writeln!(s, "J_opt,,{}", num(j_opt)).unwrap();
            writeln!(s, "centralized,,{}", num(centralized)).unwrap();
            s
        }
        Format::Text => {
            let mut s = format!("{:>4} {:>8} {:>16}\n", "m", "Q order", "J");
            for r in rs {
                writeln!(s, "{:>4} {:>8} {:>16}", r.options.eta_order, r.q_order(), num(r.j.value)).unwrap();
            }
            writeln!(s, "{:>13} {:>16}", "J_opt", num(j_opt)).unwrap();
            writeln!(s, "{:>13} {:>16}", "centralized", num(centralized)).unwrap();
            s
        }
        Format::Json => to_json(&SweepJson {
            rows: rs
                .iter()
                .map(|r| SweepRow {
                    m: r.options.eta_order,
                    q_order: r.q_order(),
                    j: round(r.j.value),
                    j_tail: round(r.j.tail_bound_sq),
                })
                .collect(),
            j_opt: round(j_opt),
            centralized: round(centralized),
        }),
    }
}

fn run_sweep(prob: &Problem<f64>, range: RangeInclusive<i64>, s: i64, t: i64) -> Result<Vec<Synthesis>, CliError> {
    synthesis::sweep(prob, range, s, t).map_err(|e| CliError::from_core("synthesis::sweep", e))
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pf = load_problem(&a.file)?;
    let prob = pf.to_problem()?;
    let o = pf.orders();
    let s = a.spatial_order.or(o.s).unwrap_or(DEFAULT_ORDER);
    let t = a.temporal_order.or(o.t).unwrap_or(DEFAULT_ORDER);
    let rs = run_sweep(&prob, a.m_range.clone(), s, t)?;
    emit(a.out.as_deref(), &sweep_report(&rs, a.format), out)
}

/// Sweeps the built-in example and prints one PASS/FAIL line per check;
/// exits with the tolerance code if any check fails.
pub fn cmd_paper_example(a: &ExampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(p) = &a.write_problem {
        return emit(Some(p), &to_json(&checkpoints::example_problem_file(None)), out);
    }
    let prob = cone_h2::Example::default().problem();
    let (s, t) = (a.spatial_order, a.temporal_order);
    let rs = run_sweep(&prob, a.m_range.clone(), s, t)?;
    let r1 = match rs.iter().find(|r| r.options.eta_order == 1) {
        Some(r) => r.clone(),
        None => run_synthesis(&prob, SynthesisOptions { eta_order: 1, spatial_order: s, temporal_order: t })?,
    };
    let mut checks = checkpoints::table_checks(&rs);
    checks.extend(checkpoints::structure_checks(&r1));
    let mut report = sweep_report(&rs, Format::Text);
    report.push('\n');
    for c in &checks {
        writeln!(report, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(report, "{} of {} checkpoints passed", checks.len() - failed, checks.len()).unwrap();
    emit(None, &report, out)?;
    if failed > 0 {
        return Err(CliError::tolerance(format!("{failed} checkpoint(s) failed")));
    }
    Ok(())
}

fn default_kind(input: &Input, fallback: SystemKind) -> SystemKind {
    match input {
        Input::Problem(_) => fallback,
        Input::Transfer(_) => SystemKind::T1,
    }
}

/// The rational selected by `kind`; a bare transfer function is returned as is.
fn select_rational(input: &Input, kind: SystemKind, orders: &OrderArgs) -> Result<Rational, CliError> {
    let pf = match input {
        Input::Transfer(t) => return t.to_rational("transfer function"),
        Input::Problem(pf) => pf,
    };
    let prob = pf.to_problem()?;
    match kind {
        SystemKind::T1 => Ok(prob.t1),
        SystemKind::T2 => Ok(prob.t2),
        SystemKind::Gyu => Ok(prob.gyu),
        SystemKind::K | SystemKind::Q | SystemKind::ClosedLoop => {
            let r = run_synthesis(&prob, orders.resolve(pf.orders()))?;
            Ok(match kind {
                SystemKind::K => r.k,
                SystemKind::Q => r.q,
                _ => closed_loop(&prob, &r.q),
            })
        }
    }
}

pub fn cmd_expand(a: &ExpandArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = io::load(&a.file)?;
    let kind = a.system.unwrap_or(default_kind(&input, SystemKind::Gyu));
    let orders = OrderArgs { eta_order: a.eta_order, ..OrderArgs::default() };
    let r = select_rational(&input, kind, &orders)?;
    if a.spatial_order < 0 || a.temporal_order < 0 {
        return Err(CliError::invalid("expansion orders must be nonnegative"));
    }
    let e = r.expand(a.spatial_order, a.temporal_order).map_err(|e| CliError::from_core("rational::expand", e))?;
    let text = match a.format {
        Format::Json | Format::Text => to_json(&TransferSpec::Polynomial { triples: io::triples(&e) }),
        Format::Csv => {
            let mut s = String::from("i,t,value\n");
            for (i, t, v) in e.triples() {
                writeln!(s, "{i},{t},{}", num(v)).unwrap();
            }
            s
        }
    };
    emit(a.out.as_deref(), &text, out)
}

pub fn cmd_realize(a: &RealizeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = io::load(&a.file)?;
    let kind = a.system.unwrap_or(default_kind(&input, SystemKind::K));
    let g = match (&input, kind) {
        (Input::Problem(pf), SystemKind::K) => {
            let prob = pf.to_problem()?;
            run_synthesis(&prob, a.orders.resolve(pf.orders()))?.k_realization
        }
        _ => {
            let r = select_rational(&input, kind, &a.orders)?;
            realize_rational(&r).map_err(|e| CliError::from_core("statespace::realize_rational", e))?
        }
    };
    emit(a.out.as_deref(), &to_json(&RealizationJson::from(&g)), out)
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.sites == 0 {
        return Err(CliError::invalid("--sites must be positive"));
    }
    let input = io::load(&a.file)?;
    let kind = a.system.unwrap_or(default_kind(&input, SystemKind::ClosedLoop));
    let w = LatticeSignal::impulse(a.sites, a.horizon, a.impulse_site);
    let sim = |e: Error| CliError::from_core("lattice_sim::simulate", e);
    let y = match (&input, kind) {
        (Input::Problem(pf), SystemKind::ClosedLoop | SystemKind::K) => {
            let prob = pf.to_problem()?;
            let r = run_synthesis(&prob, a.orders.resolve(pf.orders()))?;
            match (&prob.mode, kind) {
                (_, SystemKind::K) => lattice_sim::simulate(&LatticeSystem::Realization(r.k_realization), &w).map_err(sim)?,
                (ProblemMode::DisturbanceAttenuation { g, w: weight }, _) => {
                    let real = |x: &Rational| realize_rational(x).map_err(|e| CliError::from_core("statespace::realize_rational", e));
                    let lp = FeedbackLoop { w: real(weight)?, g: real(g)?, k: r.k_realization };
                    simulate_feedback(&lp, &w).map_err(sim)?.y
                }
                _ => simulate_kernel(&closed_loop(&prob, &r.q), &w)?,
            }
        }
        _ => simulate_kernel(&select_rational(&input, kind, &a.orders)?, &w)?,
    };
    emit(a.out.as_deref(), &y.to_csv_with(num), out)
}

fn simulate_kernel(r: &Rational, input: &LatticeSignal<f64>) -> Result<LatticeSignal<f64>, CliError> {
    // expand past the ring so that any wraparound is caught by the check
    let kernel = r
        .expand(input.sites() as i64, input.horizon() as i64)
        .map_err(|e| CliError::from_core("rational::expand", e))?;
    lattice_sim::simulate(&LatticeSystem::Kernel(kernel), input).map_err(|e| CliError::from_core("lattice_sim::simulate", e))
}

/// Verifies a realization against its rational on a small box.
pub fn realization_matches(g: &cone_h2::Realization, r: &Rational, s: i64, t: i64) -> Result<f64, CliError> {
    let a = expand_realization(g, s, t).map_err(|e| CliError::from_core("statespace::expand_realization", e))?;
    let b = r.expand(s, t).map_err(|e| CliError::from_core("rational::expand", e))?;
    Ok(a.max_abs_diff(&b))
}
