mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use probterm::bounds::{bound_reports, BoundQuery};
use probterm::cert::{
    check_cdb, check_db, check_ranking, check_super, theta_fixpoint, BoundCert, CertParams, Certificate,
    CheckReport, Family, VerifyBox,
};
use probterm::cfg::{build_cfg, dump, Cfg};
use probterm::lab::{simulate_lab, LabOptions, LabProcess};
use probterm::lang::{self, fmt_rational, Program};
use probterm::mdp::{simulate, Scheduler, SimOptions, StackElement};
use probterm::prob::{parse_dist_file, parse_rational, SamplingFunction};
use probterm::{Integer, Rational, Scalar};

use output::{Format, Header};

#[derive(Parser)]
#[command(name = "probterm", version, about = "Termination analysis for recursive probabilistic programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and label a program, then print the labelled listing.
    Parse(ProgArgs),
    /// Print the control-flow graph edge list.
    Cfg(ProgArgs),
    /// Monte Carlo estimate of the termination time.
    Simulate(SimulateArgs),
    /// Check a certificate over a finite box. Exit status 1 on failure.
    Check(CheckArgs),
    /// Termination-time bounds implied by a certificate.
    Bounds(BoundsArgs),
    /// Simulate one of the built-in counterexample processes.
    Lab(LabArgs),
}

#[derive(Args)]
struct ProgArgs {
    program: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    program: PathBuf,
    /// Distribution file for the sampling variables.
    #[arg(long)]
    dist: Option<PathBuf>,
}

#[derive(Args)]
struct EntryArgs {
    /// Entry function.
    #[arg(long)]
    entry: String,
    /// Entry label (default: the function's initial label).
    #[arg(long)]
    label: Option<u32>,
    /// Program variable values, e.g. `n=5`.
    #[arg(long = "args", value_delimiter = ',')]
    args: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ranking,
    Cdb,
    Db,
    Super,
}

impl From<Kind> for Family {
    fn from(k: Kind) -> Family {
        match k {
            Kind::Ranking => Family::Ranking,
            Kind::Cdb => Family::Cdb,
            Kind::Db => Family::Db,
            Kind::Super => Family::Super,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarKind {
    Exact,
    F64,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    cert: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Verification box, e.g. `n=-100..100,c=0..1`.
    #[arg(long = "box")]
    bx: String,
    #[command(flatten)]
    params: ParamArgs,
    /// Arithmetic for the checks.
    #[arg(long, value_enum, default_value = "exact")]
    scalar: ScalarKind,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    cert: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    entry: EntryArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Thresholds `k` for `P(T >= k)`.
    #[arg(long = "k", value_delimiter = ',')]
    ks: Vec<u64>,
    /// Horizons `n` for `P(T > n)`.
    #[arg(long = "n", value_delimiter = ',')]
    ns: Vec<u64>,
    /// Steps per period for the square-root tail (default: K_max + 1).
    #[arg(long)]
    period: Option<u64>,
    /// Check the certificate over this box first and refuse to report
    /// bounds if it fails.
    #[arg(long = "box")]
    bx: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    entry: EntryArgs,
    /// One of greedy-max, greedy-min, always-then, always-else, uniform.
    #[arg(long, default_value = "uniform")]
    scheduler: String,
    /// Certificate for the greedy schedulers.
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Thresholds `k` for `P(T >= k)`.
    #[arg(long = "tail", value_delimiter = ',')]
    tails: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LabArgs {
    /// nonnegativity, cbounded, noconcentration, randomwalk or positivity.
    #[arg(long)]
    example: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    runs: u64,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    /// Extra horizons `n` for `P(T > n)`.
    #[arg(long = "tail", value_delimiter = ',')]
    tails: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_program(path: &Path) -> Result<Program> {
    lang::parse_labelled(&read(path)?).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

struct Model {
    cfg: Cfg,
    sf: SamplingFunction,
}

fn load_model(m: &ModelArgs) -> Result<Model> {
    let prog = load_program(&m.program)?;
    let declared = match &m.dist {
        Some(p) => parse_dist_file(&read(p)?).with_context(|| format!("{}", p.display()))?,
        None => SamplingFunction::default(),
    };
    let sf = prog.sampling_function(&declared)?;
    let cfg = build_cfg(&prog)?;
    Ok(Model { cfg, sf })
}

struct LoadedCert {
    cert: Certificate,
    bound: BoundCert,
    sha256: String,
}

fn load_cert(path: &Path, cfg: &Cfg) -> Result<LoadedCert> {
    let text = read(path)?;
    let cert = Certificate::parse(&text).with_context(|| format!("{}", path.display()))?;
    let bound = BoundCert::bind(&cert, cfg)?;
    Ok(LoadedCert { cert, bound, sha256: output::sha256_hex(text.as_bytes()) })
}

fn rational_flag(flag: &Option<String>, name: &str) -> Result<Option<Rational>> {
    flag.as_deref()
        .map(|s| parse_rational(s).with_context(|| format!("--{name}: `{s}` is not a number")))
        .transpose()
}

/// Command-line parameters override the certificate's.
fn merged_params(flags: &ParamArgs, cert: &Certificate) -> Result<CertParams> {
    let mut p = cert.params.clone();
    if let Some(v) = rational_flag(&flags.eps, "eps")? {
        p.eps = Some(v);
    }
    if let Some(v) = rational_flag(&flags.delta, "delta")? {
        p.delta = Some(v);
    }
    if let Some(v) = rational_flag(&flags.zeta, "zeta")? {
        p.zeta = Some(v);
    }
    Ok(p)
}

fn need(x: &Option<Rational>, name: &str) -> Result<Rational> {
    x.clone().with_context(|| format!("missing `{name}`: pass --{name} or set it in the certificate"))
}

fn parse_entry(e: &EntryArgs, cfg: &Cfg) -> Result<StackElement> {
    let mut pairs = Vec::new();
    for a in &e.args {
        let (k, v) = a.split_once('=').with_context(|| format!("--args: expected name=value, got `{a}`"))?;
        let v: Integer = v.trim().parse().with_context(|| format!("--args: `{v}` is not an integer"))?;
        pairs.push((k.trim().to_string(), v));
    }
    let el = match e.label {
        Some(l) => StackElement::new(cfg, &e.entry, l, &pairs)?,
        None => StackElement::entry(cfg, &e.entry, &pairs)?,
    };
    Ok(el)
}

fn run_checks<S: Scalar>(
    kind: Kind,
    h: &BoundCert,
    p: &CertParams,
    m: &Model,
    bx: &VerifyBox,
) -> Result<Vec<CheckReport>> {
    let (cfg, sf) = (&m.cfg, &m.sf);
    let mut out = Vec::new();
    match kind {
        Kind::Ranking => out.push(check_ranking::<S>(h, &need(&p.eps, "eps")?, cfg, sf, bx)?),
        Kind::Cdb => {
            out.push(check_ranking::<S>(h, &need(&p.eps, "eps")?, cfg, sf, bx)?);
            out.push(check_cdb::<S>(h, &need(&p.delta, "delta")?, &need(&p.zeta, "zeta")?, cfg, sf, bx)?);
        }
        Kind::Db => {
            out.push(check_ranking::<S>(h, &need(&p.eps, "eps")?, cfg, sf, bx)?);
            out.push(check_db::<S>(h, &need(&p.zeta, "zeta")?, cfg, sf, bx)?);
        }
        Kind::Super => {
            out.push(check_super::<S>(h, &need(&p.delta, "delta")?, &need(&p.zeta, "zeta")?, cfg, sf, bx)?)
        }
    }
    Ok(out)
}

enum Outcome {
    Ok,
    CheckFailed,
}

fn cmd_parse(a: &ProgArgs, fmt: Format) -> Result<Outcome> {
    let prog = load_program(&a.program)?;
    let header = Header::new("parse");
    output::emit_lines(fmt, &header, "line", &lang::listing(&prog))?;
    Ok(Outcome::Ok)
}

fn cmd_cfg(a: &ProgArgs, fmt: Format) -> Result<Outcome> {
    let cfg = build_cfg(&load_program(&a.program)?)?;
    output::emit_cfg(fmt, &Header::new("cfg"), &dump(&cfg))?;
    Ok(Outcome::Ok)
}

fn cmd_check(a: &CheckArgs, fmt: Format) -> Result<Outcome> {
    let m = load_model(&a.model)?;
    let c = load_cert(&a.cert, &m.cfg)?;
    let p = merged_params(&a.params, &c.cert)?;
    let bx = VerifyBox::parse(&a.bx)?;
    let reports = match a.scalar {
        ScalarKind::Exact => run_checks::<Rational>(a.kind, &c.bound, &p, &m, &bx)?,
        ScalarKind::F64 => run_checks::<f64>(a.kind, &c.bound, &p, &m, &bx)?,
    };
    let header = Header { bx: Some(bx.to_string()), cert_sha256: Some(c.sha256), ..Header::new("check") };
    output::emit_check(fmt, &header, &reports)?;
    Ok(if reports.iter().all(CheckReport::passed) { Outcome::Ok } else { Outcome::CheckFailed })
}

fn cmd_bounds(a: &BoundsArgs, fmt: Format) -> Result<Outcome> {
    let m = load_model(&a.model)?;
    let c = load_cert(&a.cert, &m.cfg)?;
    let p = merged_params(&a.params, &c.cert)?;
    let entry = parse_entry(&a.entry, &m.cfg)?;
    let mut header = Header { cert_sha256: Some(c.sha256.clone()), ..Header::new("bounds") };
    if let Some(b) = &a.bx {
        let bx = VerifyBox::parse(b)?;
        header.bx = Some(bx.to_string());
        let reports = run_checks::<Rational>(a.kind, &c.bound, &p, &m, &bx)?;
        if !reports.iter().all(CheckReport::passed) {
            output::emit_check(fmt, &header, &reports)?;
            eprintln!("certificate check failed; no bounds reported");
            return Ok(Outcome::CheckFailed);
        }
    }
    let family = Family::from(a.kind);
    let period = match (family, a.period) {
        (Family::Super, None) => {
            let theta = theta_fixpoint(&m.cfg);
            if !theta.all_covered() {
                bail!("labels outside the fixpoint, so no period exists: {:?}", theta.uncovered());
            }
            Some(theta.k_max() + 1)
        }
        (_, p) => p,
    };
    let h = c.bound.eval_exact(entry.func, entry.label, &entry.vals)?;
    let q = BoundQuery { ks: a.ks.clone(), ns: a.ns.clone(), period };
    let rows = bound_reports(family, &h, &p, &q)?;
    let h_text = match &h {
        probterm::prob::ExtReal::Finite(r) => fmt_rational(r),
        probterm::prob::ExtReal::Infinite => "inf".to_string(),
    };
    let summary = output::BoundsSummary {
        entry: entry.display(&m.cfg).to_string(),
        h_entry: h_text,
        family,
        params: p.to_string(),
        period,
        verified: a.bx.is_some(),
    };
    output::emit_bounds(fmt, &header, &summary, &rows)?;
    Ok(Outcome::Ok)
}

fn cmd_simulate(a: &SimulateArgs, fmt: Format) -> Result<Outcome> {
    let m = load_model(&a.model)?;
    let entry = parse_entry(&a.entry, &m.cfg)?;
    let cert = a.cert.as_deref().map(|p| load_cert(p, &m.cfg)).transpose()?;
    let sched = Scheduler::by_name(&a.scheduler, cert.as_ref().map(|c| Arc::new(c.bound.clone())))?;
    let opts = SimOptions { runs: a.runs, max_steps: a.max_steps, tails: a.tails.clone(), seed: a.seed };
    let stats = simulate(&m.cfg, &m.sf, &entry, &sched, &opts)?;
    let header =
        Header { seed: Some(a.seed), cert_sha256: cert.map(|c| c.sha256), ..Header::new("simulate") };
    output::emit_simulate(fmt, &header, &entry.display(&m.cfg).to_string(), sched.name(), &stats)?;
    Ok(Outcome::Ok)
}

fn cmd_lab(a: &LabArgs, fmt: Format) -> Result<Outcome> {
    let p = LabProcess::by_name(&a.example, a.alpha)?;
    let opts = LabOptions { runs: a.runs, horizon: a.horizon, seed: a.seed, tails: a.tails.clone() };
    let r = simulate_lab(&p, &opts)?;
    output::emit_lab(fmt, &Header { seed: Some(a.seed), ..Header::new("lab") }, &r)?;
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let fmt = cli.format;
    let r = match &cli.cmd {
        Cmd::Parse(a) => cmd_parse(a, fmt),
        Cmd::Cfg(a) => cmd_cfg(a, fmt),
        Cmd::Simulate(a) => cmd_simulate(a, fmt),
        Cmd::Check(a) => cmd_check(a, fmt),
        Cmd::Bounds(a) => cmd_bounds(a, fmt),
        Cmd::Lab(a) => cmd_lab(a, fmt),
    };
    match r {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
