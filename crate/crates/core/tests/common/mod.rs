#![allow(dead_code)]

use num_traits::{One, Zero};
use probterm::cert::{check_cdb, check_db, check_ranking, BoundCert, Certificate, VerifyBox};
use probterm::cfg::{build_cfg, Cfg, Node};
use probterm::mdp::{step_in_place, Configuration, Scheduler, StackElement};
use probterm::prob::{parse_dist_file, DiscreteDist, DistError, RngStream, SamplingFunction};
use probterm::{lang, Integer, Rational};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

pub fn read(name: &str) -> String {
    std::fs::read_to_string(format!("{DATA}/{name}")).unwrap()
}

pub struct Fixture {
    pub cfg: Cfg,
    pub sf: SamplingFunction,
    pub h: BoundCert,
}

pub fn model(prog: &str, dist: Option<&str>) -> (Cfg, SamplingFunction) {
    let p = lang::parse(&read(prog)).unwrap();
    let cfg = build_cfg(&p).unwrap();
    let declared = dist.map(|d| parse_dist_file(&read(d)).unwrap()).unwrap_or_default();
    let sf = p.sampling_function(&declared).unwrap();
    (cfg, sf)
}

pub fn fixture(prog: &str, dist: Option<&str>, cert: &str) -> Fixture {
    let (cfg, sf) = model(prog, dist);
    let h = BoundCert::bind(&Certificate::parse(&read(cert)).unwrap(), &cfg).unwrap();
    Fixture { cfg, sf, h }
}

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn qq(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn entry(cfg: &Cfg, func: &str, n: i64) -> StackElement {
    StackElement::entry(cfg, func, &[("n".to_string(), Integer::from(n))]).unwrap()
}

/// One non-terminal stanza: `[n >= 1] a*n + b ; c`, where `c` may be `inf`.
#[derive(Clone, Debug)]
pub struct Stanza {
    pub a: u32,
    pub b: u32,
    pub c: Option<u32>,
}

pub fn stanza() -> impl Strategy<Value = Stanza> {
    (0u32..5, 0u32..40, prop::option::weighted(0.8, 0u32..10)).prop_map(|(a, b, c)| Stanza { a, b, c })
}

/// Random certificates for the halving program: f has labels 1..=6 plus the
/// terminal 7, g has 1..=4 plus the terminal 5.
pub fn halve_cert() -> impl Strategy<Value = String> {
    prop::collection::vec(stanza(), 10).prop_map(|st| {
        let mut s = String::new();
        let labels = (1..=6).map(|l| ("f", l)).chain((1..=4).map(|l| ("g", l)));
        for ((f, l), p) in labels.zip(st) {
            let c = p.c.map_or("inf".to_string(), |c| c.to_string());
            s += &format!("{f}@{l}: [n >= 1] {}*n + {} ; {c}\n", p.a, p.b);
        }
        s + "f@7: 0\ng@5: 0\n"
    })
}

pub fn bind(cfg: &Cfg, text: &str) -> BoundCert {
    BoundCert::bind(&Certificate::parse(text).unwrap(), cfg).unwrap()
}

pub const PROP_BOX: &str = "n=-6..12";

/// Shrinking ε never adds failures: every row's failure count is monotone.
pub fn prop_eps_monotone(
    cfg: &Cfg,
    sf: &SamplingFunction,
    text: &str,
    eps: u32,
    shrink: u32,
) -> Result<(), TestCaseError> {
    let h = bind(cfg, text);
    let bx = VerifyBox::parse(PROP_BOX).unwrap();
    let big = qq(i64::from(eps), 4);
    let small = &big * qq(i64::from(shrink), 8);
    let a = check_ranking::<Rational>(&h, &big, cfg, sf, &bx).unwrap();
    let b = check_ranking::<Rational>(&h, &small, cfg, sf, &bx).unwrap();
    prop_assert_eq!(a.rows.len(), b.rows.len());
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        prop_assert!(
            rb.failed <= ra.failed,
            "{} {}@{}: {} > {}",
            ra.condition,
            ra.func,
            ra.label,
            rb.failed,
            ra.failed
        );
    }
    prop_assert!(!a.passed() || b.passed());
    Ok(())
}

/// A difference bound on every outcome bounds the expected difference, and
/// a δ above every certificate value makes the δ-conditions trivial.
pub fn prop_db_implies_cdb(
    cfg: &Cfg,
    sf: &SamplingFunction,
    text: &str,
    zeta: u32,
) -> Result<(), TestCaseError> {
    let h = bind(cfg, text);
    let bx = VerifyBox::parse(PROP_BOX).unwrap();
    let z = q(i64::from(zeta));
    let db = check_db::<Rational>(&h, &z, cfg, sf, &bx).unwrap();
    let cdb = check_cdb::<Rational>(&h, &q(1_000_000), &z, cfg, sf, &bx).unwrap();
    for r in db.rows.iter().filter(|r| r.condition == "C10" && r.passed()) {
        let c = cdb.row("C6(ii)", &r.func, r.label).unwrap();
        prop_assert!(c.passed(), "C10 holds but C6(ii) fails at {}@{}", r.func, r.label);
    }
    prop_assert!(!db.passed() || cdb.passed());
    Ok(())
}

/// Each step pushes at most one frame, and pops exactly one frame only when
/// the top element moves to its terminal label.
pub fn prop_stack_discipline(
    cfg: &Cfg,
    sf: &SamplingFunction,
    sched: &Scheduler,
    n: i64,
    seed: u64,
) -> Result<(), TestCaseError> {
    let sf = cfg.select_sampling(sf).unwrap();
    let mut rng = RngStream::new(seed, 0);
    let mut config = Configuration::single(entry(cfg, "f", n));
    let mut mu = Vec::new();
    for _ in 0..400 {
        let Some(top) = config.top().cloned() else { break };
        let before = config.len();
        let action = sched.choose(cfg, &config, &mut rng).unwrap();
        sf.sample_into(&mut rng, &mut mu);
        step_in_place(&mut config, action, &mu, cfg).unwrap();
        let after = config.len();
        let func = &cfg.functions[top.func];
        let node = func.node(top.label).unwrap();
        let is_call = matches!(node, Node::Call { .. });
        prop_assert!(after + 1 >= before && after <= before + 1, "{before} -> {after}");
        if after == before + 1 {
            prop_assert!(is_call);
        }
        if after + 1 == before {
            prop_assert!(!is_call);
            prop_assert!(node.successors().contains(&func.l_out));
        }
    }
    Ok(())
}

/// Normalized weights build a distribution whose probabilities sum to one;
/// anything else is rejected.
pub fn prop_normalization(weights: &[u32], scale: u32) -> Result<(), TestCaseError> {
    let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    let support: Vec<(Integer, Rational)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (Integer::from(i as i64 - 3), Rational::new(w.into(), total.into())))
        .collect();
    let d = DiscreteDist::new(support.clone()).unwrap();
    let sum: Rational = d.support().iter().map(|(_, p)| p.clone()).sum();
    prop_assert!(sum.is_one());
    let mut rng = RngStream::new(u64::from(scale), 1);
    for _ in 0..20 {
        prop_assert!(d.sample_index(&mut rng) < weights.len());
    }
    let off: Vec<(Integer, Rational)> =
        support.into_iter().map(|(v, p)| (v, p * qq(i64::from(scale), i64::from(scale) + 1))).collect();
    prop_assert!(matches!(DiscreteDist::new(off), Err(DistError::NotNormalized(t)) if !t.is_zero()));
    Ok(())
}

/// `P(τ > m)` for m = 0..=max, τ the hitting time of 0 for the ±1 fair walk
/// from 1, by forward dynamic programming over positions.
pub fn walk_survival(max: usize) -> Vec<f64> {
    let mut p = vec![0.0f64; max + 3];
    p[1] = 1.0;
    let mut out = vec![1.0];
    for _ in 0..max {
        let mut next = vec![0.0f64; max + 3];
        for x in 1..=max + 1 {
            if p[x] > 0.0 {
                next[x + 1] += p[x] / 2.0;
                if x > 1 {
                    next[x - 1] += p[x] / 2.0;
                }
            }
        }
        p = next;
        out.push(p.iter().sum());
    }
    out
}
