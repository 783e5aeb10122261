//! Report rendering. Every format carries the same header fields and the
//! same rows; JSON mirrors the table one-to-one.

use std::fmt::Write as _;
use std::io::Write as _;

use anyhow::Result;
use clap::ValueEnum;
use probterm::bounds::BoundReport;
use probterm::cert::{CheckReport, Family};
use probterm::lab::LabResult;
use probterm::mdp::RunStats;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    #[serde(rename = "box")]
    pub bx: Option<String>,
    pub cert_sha256: Option<String>,
}

impl Header {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: "probterm",
            version: probterm::VERSION,
            command,
            seed: None,
            bx: None,
            cert_sha256: None,
        }
    }

    fn comment(&self) -> String {
        let opt = |x: &Option<String>| x.clone().unwrap_or_else(|| "-".into());
        format!(
            "# {} {} {} seed={} box={} cert-sha256={}\n",
            self.tool,
            self.version,
            self.command,
            self.seed.map_or("-".into(), |s| s.to_string()),
            opt(&self.bx),
            opt(&self.cert_sha256)
        )
    }
}

fn print(s: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn json<T: Serialize>(header: &Header, body: T) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: &'a Header,
        #[serde(flatten)]
        body: T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { header, body })?;
    s.push('\n');
    print(&s)
}

fn csv<I, R>(header: &Header, columns: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    print(&(header.comment() + &body))
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or(String::new(), T::to_string)
}

fn float(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.6}"))
}

/// A plain list of text lines.
pub fn emit_lines(fmt: Format, header: &Header, column: &str, text: &str) -> Result<()> {
    let lines: Vec<&str> = text.lines().collect();
    match fmt {
        Format::Table => print(&(header.comment() + text)),
        Format::Json => json(header, serde_json::json!({ "lines": lines })),
        Format::Csv => csv(header, &[column], lines.iter().map(|l| [l.to_string()])),
    }
}

#[derive(Serialize)]
struct Edge {
    function: String,
    source: String,
    payload: String,
    target: String,
}

fn edges(dump: &str) -> Vec<Edge> {
    let mut out = Vec::new();
    let mut func = String::new();
    for line in dump.lines() {
        if let Some(rest) = line.strip_prefix("function ") {
            func = rest.split('(').next().unwrap_or_default().to_string();
        } else if let Some((src, rest)) = line.trim().split_once(" --[") {
            if let Some((payload, tgt)) = rest.rsplit_once("]--> ") {
                out.push(Edge {
                    function: func.clone(),
                    source: src.into(),
                    payload: payload.into(),
                    target: tgt.into(),
                });
            }
        }
    }
    out
}

pub fn emit_cfg(fmt: Format, header: &Header, dump: &str) -> Result<()> {
    match fmt {
        Format::Table => print(&(header.comment() + dump)),
        Format::Json => {
            let funcs: Vec<&str> = dump.lines().filter(|l| l.starts_with("function ")).collect();
            json(header, serde_json::json!({ "functions": funcs, "edges": edges(dump) }))
        }
        Format::Csv => csv(
            header,
            &["function", "source", "payload", "target"],
            edges(dump).into_iter().map(|e| [e.function, e.source, e.payload, e.target]),
        ),
    }
}

pub fn emit_check(fmt: Format, header: &Header, reports: &[CheckReport]) -> Result<()> {
    let passed = reports.iter().all(CheckReport::passed);
    match fmt {
        Format::Table => {
            let mut s = header.comment();
            for r in reports {
                let _ = write!(s, "{r}");
            }
            let _ = writeln!(s, "verdict: {}", if passed { "PASS" } else { "FAIL" });
            print(&s)
        }
        Format::Json => json(header, serde_json::json!({ "passed": passed, "reports": reports })),
        Format::Csv => csv(
            header,
            &[
                "family",
                "params",
                "exact",
                "condition",
                "function",
                "label",
                "checked",
                "failed",
                "counterexample",
            ],
            reports.iter().flat_map(|r| {
                r.rows.iter().map(move |row| {
                    [
                        r.family.to_string(),
                        r.params.clone(),
                        r.exact.to_string(),
                        row.condition.to_string(),
                        row.func.clone(),
                        row.label.to_string(),
                        row.checked.to_string(),
                        row.failed.to_string(),
                        opt(&row.first),
                    ]
                })
            }),
        ),
    }
}

#[derive(Serialize)]
pub struct BoundsSummary {
    pub entry: String,
    pub h_entry: String,
    pub family: Family,
    pub params: String,
    pub period: Option<u64>,
    /// Whether the certificate was checked in this invocation.
    pub verified: bool,
}

pub fn emit_bounds(fmt: Format, header: &Header, sum: &BoundsSummary, rows: &[BoundReport]) -> Result<()> {
    match fmt {
        Format::Table => {
            let mut s = header.comment();
            let _ = writeln!(
                s,
                "entry {} h = {} ({} certificate, {})",
                sum.entry, sum.h_entry, sum.family, sum.params
            );
            if let Some(k) = sum.period {
                let _ = writeln!(s, "period K = {k}");
            }
            if !sum.verified {
                let _ = writeln!(s, "note: certificate not checked here; bounds hold only if `check` passes");
            }
            for r in rows {
                let at = r.at.map_or(String::new(), |k| format!("@{k}"));
                let val = match (&r.exact, r.value) {
                    (Some(e), Some(v)) if e.contains('/') => format!("{e} ({v:.6})"),
                    (Some(e), _) => e.clone(),
                    (None, v) => float(v),
                };
                let _ = writeln!(s, "  {:<24} {:<14} {}", format!("{}{at}", r.bound), val, r.note);
            }
            print(&s)
        }
        Format::Json => json(header, serde_json::json!({ "summary": sum, "bounds": rows })),
        Format::Csv => csv(
            header,
            &["bound", "at", "exact", "value", "note"],
            rows.iter()
                .map(|r| [r.bound.to_string(), opt(&r.at), opt(&r.exact), opt(&r.value), r.note.clone()]),
        ),
    }
}

pub fn emit_simulate(
    fmt: Format,
    header: &Header,
    entry: &str,
    scheduler: &str,
    st: &RunStats,
) -> Result<()> {
    match fmt {
        Format::Table => {
            let mut s = header.comment();
            let _ = writeln!(s, "entry {entry} scheduler {scheduler} runs {} cap {}", st.runs, st.max_steps);
            let _ = writeln!(s, "terminated {} censored {}", st.terminated, st.censored);
            if let (Some(m), Some(w)) = (st.mean, st.mean_half_width) {
                let _ = writeln!(s, "mean T {m:.6} +- {w:.6} (95%, terminated runs)");
            }
            for t in &st.tails {
                let e = &t.est;
                let _ = writeln!(
                    s,
                    "  P(T >= {}) = {:.6}  [{:.6}, {:.6}]  sigma {:.6}  ({}/{})",
                    t.k, e.p, e.lo, e.hi, e.sigma, e.count, e.n
                );
            }
            print(&s)
        }
        Format::Json => {
            json(header, serde_json::json!({ "entry": entry, "scheduler": scheduler, "stats": st }))
        }
        Format::Csv => {
            let mut rows = vec![[
                "mean".to_string(),
                String::new(),
                float(st.mean),
                float(st.mean_half_width),
                String::new(),
                String::new(),
            ]];
            for t in &st.tails {
                let e = &t.est;
                rows.push([
                    "tail".into(),
                    t.k.to_string(),
                    float(Some(e.p)),
                    float(Some(e.sigma)),
                    float(Some(e.lo)),
                    float(Some(e.hi)),
                ]);
            }
            csv(header, &["stat", "k", "value", "spread", "lo", "hi"], rows)
        }
    }
}

pub fn emit_lab(fmt: Format, header: &Header, r: &LabResult) -> Result<()> {
    match fmt {
        Format::Table => {
            let mut s = header.comment();
            let _ =
                writeln!(s, "{} runs {} horizon {} censored {}", r.process, r.runs, r.horizon, r.censored);
            for row in &r.rows {
                let ci = match (row.lo, row.hi) {
                    (Some(lo), Some(hi)) => format!("[{lo:.6}, {hi:.6}]"),
                    _ => String::new(),
                };
                let _ = writeln!(
                    s,
                    "  {:<18} analytic {:<10} ({})  empirical {:<10} {ci} ({})",
                    row.query,
                    float(row.analytic),
                    row.analytic_method,
                    float(row.empirical),
                    row.empirical_method
                );
            }
            print(&s)
        }
        Format::Json => json(header, r),
        Format::Csv => csv(
            header,
            &["query", "analytic", "analytic_method", "empirical", "lo", "hi", "sigma", "empirical_method"],
            r.rows.iter().map(|row| {
                [
                    row.query.clone(),
                    opt(&row.analytic),
                    row.analytic_method.to_string(),
                    opt(&row.empirical),
                    opt(&row.lo),
                    opt(&row.hi),
                    opt(&row.sigma),
                    row.empirical_method.to_string(),
                ]
            }),
        ),
    }
}
