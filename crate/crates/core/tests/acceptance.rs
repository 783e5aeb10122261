//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use probterm::bounds::{lower_expected, markov_tail, sqrt_tail, upper_expected, SqrtTail};
use probterm::cert::{check_cdb, check_ranking, check_super, theta_fixpoint, CheckReport, VerifyBox};
use probterm::cfg::dump;
use probterm::lab::{simulate_lab, LabOptions, LabProcess};
use probterm::lang::fmt_rational;
use probterm::mdp::{simulate, Scheduler, SimOptions};
use probterm::{ExactExtReal, Rational};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestError, TestRunner};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn c1_cfg_fidelity() -> Outcome {
    let t = Instant::now();
    let (cfg, _) = model("halve.prog", Some("halve.dist"));
    let got = dump(&cfg);
    let want = read("halve.cfg.golden");
    ensure(got == want, || format!("dump differs from golden:\n{got}"))?;
    let edges = |f: &str| {
        got.split("function ")
            .find(|s| s.starts_with(&format!("{f}(")))
            .map_or(0, |s| s.lines().filter(|l| l.contains("--[")).count())
    };
    ensure((edges("f"), edges("g")) == (8, 5), || format!("edge counts {} / {}", edges("f"), edges("g")))?;
    within(Duration::from_secs(1), t)?;
    Ok("golden edge list matches: 8 f-edges, 5 g-edges".into())
}

fn c2_halve() -> Outcome {
    let t = Instant::now();
    let x = fixture("halve.prog", Some("halve.dist"), "halve.cert");
    let bx = VerifyBox::parse("n=-100..100").unwrap();
    let r = check_ranking::<Rational>(&x.h, &q(1), &x.cfg, &x.sf, &bx).unwrap();
    ensure(r.passed(), || format!("ranking failed:\n{r}"))?;
    let cdb = |d: &Rational| check_cdb::<Rational>(&x.h, d, &q(13), &x.cfg, &x.sf, &bx).unwrap();
    let r = cdb(&q(13));
    ensure(r.passed(), || format!("cdb(13, 13) failed:\n{r}"))?;
    // least passing δ on the 1/100 grid over (0, 20], by bisection
    let (mut lo, mut hi) = (0i64, 2000i64);
    ensure(cdb(&qq(hi, 100)).passed(), || "cdb fails even at delta = 20".into())?;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if cdb(&qq(mid, 100)).passed() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let min_delta = qq(hi, 100);
    let below = &min_delta - qq(1, 100);
    let r = cdb(&below);
    let row = r
        .first_failure()
        .ok_or_else(|| format!("cdb passes below the minimum, at {}", fmt_rational(&below)))?;
    let cx = row.first.as_ref().ok_or("failure without a counterexample")?;
    within(Duration::from_secs(5), t)?;
    Ok(format!(
        "ranking(eps=1) and cdb(13,13) pass; minimal delta {}; delta {} fails {} {}@{} {cx}",
        fmt_rational(&min_delta),
        fmt_rational(&below),
        row.condition,
        row.func,
        row.label
    ))
}

fn c3_doubling() -> Outcome {
    let t = Instant::now();
    let x = fixture("doubling.prog", None, "doubling.cert");
    let bx = VerifyBox::parse("i=0..30,n=0..30,c=0..1").unwrap();
    let r = check_ranking::<Rational>(&x.h, &q(1), &x.cfg, &x.sf, &bx).unwrap();
    ensure(r.passed(), || format!("ranking failed:\n{r}"))?;
    within(Duration::from_secs(10), t)?;
    Ok(format!("ranking(eps=1) passes over {} points per label", r.rows[0].checked))
}

/// Criteria 4 and 5 share the simulations.
fn c45_bracketing() -> (Outcome, Outcome) {
    let t = Instant::now();
    let x = fixture("halve.prog", Some("halve.dist"), "halve.cert");
    let e = entry(&x.cfg, "f", 5);
    let h = x.h.eval_exact(e.func, e.label, &e.vals).unwrap();
    let upper = upper_expected(&h, &q(1)).unwrap();
    let lower = lower_expected(&h, &q(13)).unwrap();
    let markov = markov_tail(&h, &q(1), 112).unwrap();
    let (ExactExtReal::Finite(up), lo) = (upper, lower.clone()) else {
        let e = "unexpected infinite upper bound".to_string();
        return (Err(e.clone()), Err(e));
    };
    let (up, lo, half) = (to_f(&up), to_f(&lo), to_f(&markov));
    let cert = Arc::new(x.h.clone());
    let opts = SimOptions { runs: 20_000, max_steps: 100_000, tails: vec![112], seed: 2018 };
    let mut c4 = Vec::new();
    let mut c4_err = Vec::new();
    let mut c5 = Vec::new();
    let mut c5_err = Vec::new();
    for name in Scheduler::NAMES {
        let s = Scheduler::by_name(name, Some(cert.clone())).unwrap();
        let st = simulate(&x.cfg, &x.sf, &e, &s, &opts).unwrap();
        let (m, ci) = (st.mean.unwrap_or(f64::NAN), st.mean_half_width.unwrap_or(f64::INFINITY));
        if st.censored > 0 || !(lo - ci <= m && m <= up + ci) {
            c4_err.push(format!("{name}: mean {m:.3} +- {ci:.3}, censored {}", st.censored));
        }
        c4.push(format!("{name} {m:.2}+-{ci:.2}"));
        let tail = &st.tail(112).unwrap().est;
        if tail.p > half + 3.0 * tail.sigma {
            c5_err.push(format!("{name}: P(T>=112) = {} > 1/2 + 3 sigma", tail.p));
        }
        c5.push(format!("{name} {:.4}", tail.p));
    }
    let time = within(Duration::from_secs(30), t);
    let r4 = if c4_err.is_empty() && time.is_ok() {
        Ok(format!("all means in [{}, 56]: {}", fmt_rational(&lower), c4.join(", ")))
    } else {
        Err(format!("{} {}", c4_err.join("; "), time.err().unwrap_or_default()))
    };
    let r5 = if c5_err.is_empty() {
        Ok(format!("P(T >= 112) <= 1/2 + 3 sigma: {}", c5.join(", ")))
    } else {
        Err(c5_err.join("; "))
    };
    (r4, r5)
}

fn to_f(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap()
}

fn c6_super_pipeline() -> Outcome {
    let t = Instant::now();
    let x = fixture("walk.prog", Some("walk.dist"), "walk.cert");
    let bx = VerifyBox::parse("n=-50..50").unwrap();
    let r = check_super::<Rational>(&x.h, &q(1), &q(1), &x.cfg, &x.sf, &bx).unwrap();
    ensure(r.passed(), || format!("super(1, 1) failed:\n{r}"))?;
    let th = theta_fixpoint(&x.cfg);
    let (kf, kg) =
        (th.k_max_of(x.cfg.function_index("f").unwrap()), th.k_max_of(x.cfg.function_index("g").unwrap()));
    ensure(th.all_covered() && (kf, kg) == (2, 1), || {
        format!("theta: covered {} K_max f {kf} g {kg}", th.all_covered())
    })?;
    let period = th.k_max() + 1;
    let e = entry(&x.cfg, "g", 1);
    let h = x.h.eval_exact(e.func, e.label, &e.vals).unwrap();
    let ks = [100u64, 10_000];
    let opts = SimOptions { runs: 100_000, max_steps: 10_000, tails: ks.to_vec(), seed: 2018 };
    let st = simulate(&x.cfg, &x.sf, &e, &Scheduler::Uniform, &opts).unwrap();
    // T = 2τ + 1 for the walk's hitting time τ, so P(T ≥ k) = P(τ > ⌈(k-1)/2⌉ - 1)
    let oracle = walk_survival(5_000);
    let mut notes = Vec::new();
    for k in ks {
        let est = &st.tail(k).unwrap().est;
        let bound = match sqrt_tail(&h, &q(1), &q(1), period, k).unwrap() {
            SqrtTail::Bound { value, .. } => value,
            SqrtTail::TooSmall { min_k } => {
                return Err(format!("sqrt_tail not valid at k={k}, needs {min_k}"))
            }
        };
        let exact = oracle[((k - 1).div_ceil(2) - 1) as usize];
        let scaled = est.p * (k as f64).sqrt();
        ensure(est.p <= bound + 3.0 * est.sigma, || {
            format!("k={k}: {} > sqrt_tail {bound} + 3 sigma", est.p)
        })?;
        ensure((0.2..=1.2).contains(&scaled), || format!("k={k}: P*sqrt(k) = {scaled}"))?;
        ensure(est.within_sigmas(exact, 4.0), || format!("k={k}: {} vs exact {exact}", est.p))?;
        notes.push(format!("k={k} P={:.5} exact={exact:.5} bound={bound:.4} P*sqrt(k)={scaled:.3}", est.p));
    }
    within(Duration::from_secs(60), t)?;
    Ok(format!("super passes, K_max f=2 g=1, period {period}; {}", notes.join("; ")))
}

fn c7_lab() -> Outcome {
    let t = Instant::now();
    let row = |p: &LabProcess, runs, horizon, tails: Vec<u64>, query: &str| {
        let r = simulate_lab(p, &LabOptions { runs, horizon, seed: 2018, tails }).unwrap();
        r.row(query).cloned().unwrap()
    };
    let a = row(&LabProcess::Cbounded, 100_000, 200, vec![], "expected_T");
    let ma = a.empirical.unwrap();
    ensure((ma - 2.0).abs() <= 0.05, || format!("(a) E[T] = {ma}"))?;

    let nc = LabProcess::Noconcentration { alpha: 2.0 };
    let r = simulate_lab(&nc, &LabOptions { runs: 1_000_000, horizon: 1000, seed: 2018, tails: vec![9] })
        .unwrap();
    let b = r.row("tail(9)").unwrap();
    let pb = b.empirical.unwrap();
    let sigma = (0.01f64 * 0.99 / 1e6).sqrt();
    ensure((pb - 0.01).abs() <= 3.0 * sigma, || format!("(b) P(T > 9) = {pb}"))?;
    let slope = r.row("slope[10,1000]").and_then(|s| s.empirical).ok_or("(b) no slope")?;
    ensure((slope + 2.0).abs() <= 0.15, || format!("(b) slope {slope}"))?;

    let c = row(&LabProcess::Nonnegativity, 100_000, 10_000, vec![10_000], "tail(10000)");
    let pc = c.empirical.unwrap();
    let limit = LabProcess::Nonnegativity.analytic(probterm::lab::Query::ProbNonterm).unwrap();
    ensure((pc - 0.1930).abs() <= 0.004, || format!("(c) P(T > 1e4) = {pc}"))?;

    let d = row(&LabProcess::Positivity, 100_000, 64, vec![64], "tail(64)");
    let pd = d.empirical.unwrap();
    ensure((pd - 0.5).abs() <= 0.005, || format!("(d) P(T > 64) = {pd}"))?;
    within(Duration::from_secs(120), t)?;
    Ok(format!(
        "(a) E[T]={ma:.4} (b) P(T>9)={pb:.5} slope={slope:.3} (c) P(T>1e4)={pc:.4} vs e^(-pi^2/6)={limit:.4} (d) P(T>64)={pd:.4}"
    ))
}

fn verdicts() -> (Vec<CheckReport>, Vec<Rational>, probterm::mdp::RunStats) {
    let x = fixture("halve.prog", Some("halve.dist"), "halve.cert");
    let bx = VerifyBox::parse("n=-100..100").unwrap();
    let reports = vec![
        check_ranking::<Rational>(&x.h, &q(1), &x.cfg, &x.sf, &bx).unwrap(),
        check_cdb::<Rational>(&x.h, &qq(129, 10), &q(13), &x.cfg, &x.sf, &bx).unwrap(),
        check_super::<Rational>(&x.h, &q(1), &q(12), &x.cfg, &x.sf, &bx).unwrap(),
    ];
    let e = entry(&x.cfg, "f", 5);
    let h = x.h.eval_exact(e.func, e.label, &e.vals).unwrap();
    let bounds = vec![lower_expected(&h, &q(13)).unwrap(), markov_tail(&h, &q(1), 112).unwrap()];
    let opts = SimOptions { runs: 2_000, max_steps: 10_000, tails: vec![10, 112], seed: 5 };
    let st = simulate(&x.cfg, &x.sf, &e, &Scheduler::Uniform, &opts).unwrap();
    (reports, bounds, st)
}

fn named<T: std::fmt::Debug>(name: &str, r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn c8_determinism() -> Outcome {
    let t = Instant::now();
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let a = verdicts();
    let b = verdicts();
    let c = pool(1).install(verdicts);
    let d = pool(8).install(verdicts);
    ensure(a == b && b == c && c == d, || "results differ between runs or worker counts".into())?;

    let (cfg, sf) = model("halve.prog", Some("halve.dist"));
    let halve = Arc::new(fixture("halve.prog", Some("halve.dist"), "halve.cert").h);
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    named(
        "eps-monotonicity",
        runner.run(&(halve_cert(), 1u32..12, 1u32..8), |(c, e, s)| prop_eps_monotone(&cfg, &sf, &c, e, s)),
    )?;
    named(
        "db-implies-cdb",
        runner.run(&(halve_cert(), 1u32..40), |(c, z)| prop_db_implies_cdb(&cfg, &sf, &c, z)),
    )?;
    let scheds = [
        Scheduler::AlwaysThen,
        Scheduler::AlwaysElse,
        Scheduler::Uniform,
        Scheduler::by_name("greedy-max", Some(halve.clone())).unwrap(),
        Scheduler::by_name("greedy-min", Some(halve)).unwrap(),
    ];
    named(
        "stack-discipline",
        runner.run(&(0usize..5, -20i64..40, any::<u64>()), |(i, n, seed)| {
            prop_stack_discipline(&cfg, &sf, &scheds[i], n, seed)
        }),
    )?;
    named(
        "normalization",
        runner.run(&(prop::collection::vec(1u32..100, 1..8), 1u32..50), |(w, s)| prop_normalization(&w, s)),
    )?;
    within(Duration::from_secs(60), t)?;
    Ok("identical across two runs and 1/8 workers; 4 properties x 1000 cases".into())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, t: Instant, r: Outcome| {
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {n} {name}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} {name}: FAIL ({secs:.1}s) {msg}");
            }
        }
    };
    let t = Instant::now();
    report(1, "cfg-fidelity", t, c1_cfg_fidelity());
    let t = Instant::now();
    report(2, "halve-certification", t, c2_halve());
    let t = Instant::now();
    report(3, "doubling-certification", t, c3_doubling());
    let t = Instant::now();
    let (r4, r5) = c45_bracketing();
    report(4, "bound-bracketing", t, r4);
    report(5, "markov-tail", t, r5);
    let t = Instant::now();
    report(6, "super-measure-pipeline", t, c6_super_pipeline());
    let t = Instant::now();
    report(7, "process-lab", t, c7_lab());
    let t = Instant::now();
    report(8, "determinism-and-properties", t, c8_determinism());
    if failed == 0 {
        println!("acceptance: 8/8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
