use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{BoundCert, CertError};
use crate::cfg::{Cfg, FunctionCfg, LabelClass, Node, Slot};
use crate::lang::{fmt_rational, Label};
use crate::prob::{ExtReal, SamplingFunction, Valuation};
use crate::scalar::Scalar;
use crate::Rational;

/// Inclusive integer ranges for the universally quantified valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyBox {
    entries: Vec<(String, BigInt, BigInt)>,
}

impl VerifyBox {
    pub fn new(entries: Vec<(String, BigInt, BigInt)>) -> Result<Self, CertError> {
        for (i, (v, lo, hi)) in entries.iter().enumerate() {
            if lo > hi {
                return Err(CertError::Box(format!("empty range for `{v}`: {lo}..{hi}")));
            }
            if entries[..i].iter().any(|(w, _, _)| w == v) {
                return Err(CertError::Box(format!("`{v}` given twice")));
            }
        }
        Ok(Self { entries })
    }

    /// Parses `n=-100..100,c=0..1`; a single value `c=0` is also accepted.
    pub fn parse(s: &str) -> Result<Self, CertError> {
        let mut entries = Vec::new();
        for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || CertError::Box(format!("expected `var=lo..hi`, got `{item}`"));
            let (v, range) = item.split_once('=').ok_or_else(bad)?;
            let (lo, hi) = range.split_once("..").unwrap_or((range, range));
            let lo: BigInt = lo.trim().parse().map_err(|_| bad())?;
            let hi: BigInt = hi.trim().parse().map_err(|_| bad())?;
            entries.push((v.trim().to_string(), lo, hi));
        }
        if entries.is_empty() {
            return Err(CertError::Box("no variables given".into()));
        }
        Self::new(entries)
    }

    pub fn range(&self, var: &str) -> Option<(&BigInt, &BigInt)> {
        self.entries.iter().find(|(v, _, _)| v == var).map(|(_, lo, hi)| (lo, hi))
    }

    fn for_function(&self, f: &FunctionCfg) -> Result<FunctionBox, CertError> {
        let mut ranges = Vec::with_capacity(f.pvars.len());
        let mut total: u64 = 1;
        for v in f.pvars.iter() {
            let (lo, hi) = self
                .range(v)
                .ok_or_else(|| CertError::Box(format!("no range for `{v}`, a variable of `{}`", f.name)))?;
            let size = (hi - lo + 1u32)
                .to_u64()
                .ok_or_else(|| CertError::Box(format!("range of `{v}` is too large")))?;
            total = total
                .checked_mul(size)
                .ok_or_else(|| CertError::Box(format!("box for `{}` has too many points", f.name)))?;
            ranges.push((lo.clone(), size));
        }
        Ok(FunctionBox { ranges, total })
    }
}

impl fmt::Display for VerifyBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(v, lo, hi)| format!("{v}={lo}..{hi}")).collect();
        f.write_str(&parts.join(","))
    }
}

struct FunctionBox {
    ranges: Vec<(BigInt, u64)>,
    total: u64,
}

impl FunctionBox {
    /// Mixed-radix decoding; the last variable varies fastest.
    fn point(&self, mut idx: u64) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.ranges.len()];
        for (slot, (lo, size)) in self.ranges.iter().enumerate().rev() {
            out[slot] = lo + BigInt::from(idx % size);
            idx /= size;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ranking,
    Cdb,
    Db,
    Super,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Ranking => "ranking",
            Family::Cdb => "cdb",
            Family::Db => "db",
            Family::Super => "super",
        })
    }
}

fn conditions(family: Family, class: LabelClass) -> &'static [&'static str] {
    use LabelClass::*;
    match (family, class) {
        (Family::Ranking, Terminal) => &["C1"],
        (Family::Ranking, Assignment) => &["C2"],
        (Family::Ranking, Call) => &["C3"],
        (Family::Ranking, Branching) => &["C4"],
        (Family::Ranking, Nondeterministic) => &["C5"],
        (Family::Cdb, Terminal) | (Family::Db, Terminal) => &[],
        (Family::Cdb, Assignment) => &["C6(i)", "C6(ii)"],
        (Family::Cdb, Call) => &["C7"],
        (Family::Cdb, Branching) => &["C8"],
        (Family::Cdb, Nondeterministic) => &["C9"],
        (Family::Db, Assignment) => &["C10"],
        (Family::Db, Call) => &["C11"],
        (Family::Db, Branching) => &["C12"],
        (Family::Db, Nondeterministic) => &["C13"],
        (Family::Super, Terminal) => &["D1"],
        (Family::Super, Assignment) => &["D1", "D2(i)", "D2(ii)", "D2(iii)"],
        (Family::Super, Call) => &["D1", "D3(i)", "D3(ii)"],
        (Family::Super, Branching) => &["D1", "D4(i)", "D4(ii)"],
        (Family::Super, Nondeterministic) => &["D1", "D5(i)", "D5(ii)"],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub valuation: String,
    pub lhs: String,
    pub relation: &'static str,
    pub rhs: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: need {} {} {}", self.valuation, self.lhs, self.relation, self.rhs)
    }
}

/// Verdict for one condition at one `(f, ℓ)` over every box point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionRow {
    pub condition: &'static str,
    pub func: String,
    pub label: Label,
    /// Box points where the condition applies.
    pub checked: u64,
    pub failed: u64,
    /// The failure at the smallest box index.
    pub first: Option<Counterexample>,
}

impl ConditionRow {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub family: Family,
    pub params: String,
    pub bx: String,
    pub exact: bool,
    pub rows: Vec<ConditionRow>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(ConditionRow::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionRow> {
        self.rows.iter().filter(|r| !r.passed())
    }

    pub fn first_failure(&self) -> Option<&ConditionRow> {
        self.failures().next()
    }

    pub fn row(&self, condition: &str, func: &str, label: Label) -> Option<&ConditionRow> {
        self.rows.iter().find(|r| r.condition == condition && r.func == func && r.label == label)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{} check ({}) over box {}: {verdict}", self.family, self.params, self.bx)?;
        for r in &self.rows {
            let v = if r.passed() { "ok" } else { "FAIL" };
            write!(
                f,
                "  {:<8} {}@{:<3} {:>4} checked {:>8} failed {:>8}",
                r.condition, r.func, r.label, v, r.checked, r.failed
            )?;
            if let Some(c) = &r.first {
                write!(f, "  {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn show<S: Scalar>(x: &ExtReal<S>) -> String {
    match x {
        ExtReal::Finite(v) => v.show(),
        ExtReal::Infinite => "inf".into(),
    }
}

/// `|a - b|` for finite `b`.
fn abs_diff<S: Scalar>(a: &ExtReal<S>, b: &S) -> ExtReal<S> {
    match a {
        ExtReal::Finite(a) => ExtReal::Finite((a.clone() - b.clone()).abs()),
        ExtReal::Infinite => ExtReal::Infinite,
    }
}

/// Outcome of one condition at one point: `None` when it does not apply,
/// otherwise `(holds, lhs, relation, rhs)`.
type Verdict<S> = Option<(bool, ExtReal<S>, &'static str, ExtReal<S>)>;

fn le<S: Scalar>(lhs: ExtReal<S>, rhs: ExtReal<S>) -> Verdict<S> {
    Some((lhs <= rhs, lhs, "<=", rhs))
}

fn ge<S: Scalar>(lhs: ExtReal<S>, rhs: ExtReal<S>) -> Verdict<S> {
    Some((lhs >= rhs, lhs, ">=", rhs))
}

/// What follows `(f, ℓ, ν)` in one step.
enum Succ<S> {
    /// Weighted successor values at an assignment.
    Dist(Vec<(S, ExtReal<S>)>),
    /// The one successor value of a call (callee entry plus return point)
    /// or of a branch.
    One(ExtReal<S>),
    Two(ExtReal<S>, ExtReal<S>),
    Terminal,
}

struct Params<S> {
    eps: S,
    delta: S,
    zeta: S,
}

impl<S: Scalar> Params<S> {
    fn new(eps: Option<&Rational>, delta: Option<&Rational>, zeta: Option<&Rational>) -> Self {
        let conv = |x: Option<&Rational>| x.map(S::from_rational).unwrap_or_else(S::zero);
        Self { eps: conv(eps), delta: conv(delta), zeta: conv(zeta) }
    }
}

fn verdicts<S: Scalar>(family: Family, p: &Params<S>, h: &ExtReal<S>, succ: &Succ<S>) -> Vec<Verdict<S>> {
    let fin = |x: &S| ExtReal::Finite(x.clone());
    let zero = ExtReal::zero();
    let expect = |outs: &[(S, ExtReal<S>)]| {
        outs.iter().fold(ExtReal::zero(), |acc: ExtReal<S>, (w, x)| acc + x.scale(w))
    };
    match family {
        Family::Ranking => {
            let plus_eps = |x: &ExtReal<S>| x.clone() + fin(&p.eps);
            vec![match succ {
                Succ::Terminal => Some((h.is_zero(), h.clone(), "==", zero)),
                Succ::Dist(outs) => le(plus_eps(&expect(outs)), h.clone()),
                Succ::One(x) => le(plus_eps(x), h.clone()),
                Succ::Two(a, b) => le(plus_eps(&a.clone().max(b.clone())), h.clone()),
            }]
        }
        Family::Cdb | Family::Db | Family::Super if matches!(succ, Succ::Terminal) => {
            if family == Family::Super {
                vec![Some((h.is_zero(), h.clone(), "==", zero))]
            } else {
                vec![]
            }
        }
        _ => {
            let d1 = Some((!h.is_zero(), h.clone(), "!=", zero));
            let Some(hv) = h.as_finite() else {
                // Difference conditions only constrain finite points.
                return match (family, succ) {
                    (Family::Super, Succ::Dist(_)) => vec![d1, None, None, None],
                    (Family::Super, _) => vec![d1, None, None],
                    (Family::Cdb, Succ::Dist(_)) => vec![None, None],
                    _ => vec![None],
                };
            };
            let plus_delta = |x: &ExtReal<S>| x.clone() + fin(&p.delta);
            let zeta = fin(&p.zeta);
            match (family, succ) {
                (Family::Cdb, Succ::Dist(outs)) => {
                    let spread = outs
                        .iter()
                        .fold(ExtReal::zero(), |acc: ExtReal<S>, (w, x)| acc + abs_diff(x, hv).scale(w));
                    vec![ge(plus_delta(&expect(outs)), h.clone()), le(spread, zeta)]
                }
                (Family::Cdb, Succ::One(x)) => vec![ge(plus_delta(x), h.clone())],
                (Family::Cdb, Succ::Two(a, b)) => vec![ge(plus_delta(&a.clone().max(b.clone())), h.clone())],
                (Family::Db, Succ::Dist(outs)) => {
                    let worst =
                        outs.iter().fold(ExtReal::zero(), |acc: ExtReal<S>, (_, x)| acc.max(abs_diff(x, hv)));
                    vec![le(worst, zeta)]
                }
                (Family::Db, Succ::One(x)) => vec![le(abs_diff(x, hv), zeta)],
                (Family::Db, Succ::Two(a, b)) => vec![le(abs_diff(a, hv).max(abs_diff(b, hv)), zeta)],
                (Family::Super, Succ::Dist(outs)) => {
                    let worst =
                        outs.iter().fold(ExtReal::zero(), |acc: ExtReal<S>, (_, x)| acc.max(abs_diff(x, hv)));
                    let spread = outs
                        .iter()
                        .fold(ExtReal::zero(), |acc: ExtReal<S>, (w, x)| acc + abs_diff(x, hv).scale(w));
                    vec![d1, le(expect(outs), h.clone()), le(worst, zeta), ge(spread, fin(&p.delta))]
                }
                (Family::Super, Succ::One(x)) => {
                    vec![d1, le(x.clone(), h.clone()), le(abs_diff(x, hv), zeta)]
                }
                (Family::Super, Succ::Two(a, b)) => vec![
                    d1,
                    le(a.clone().max(b.clone()), h.clone()),
                    le(abs_diff(a, hv).max(abs_diff(b, hv)), zeta),
                ],
                (_, Succ::Terminal) | (Family::Ranking, _) => unreachable!("handled above"),
            }
        }
    }
}

/// Sample outcomes relevant to an assignment: every combination of the
/// sampling variables its update reads, with product weight.
fn outcomes<S: Scalar>(node: &Node, sf: &SamplingFunction, width: usize) -> Vec<(Vec<BigInt>, S)> {
    let Node::Assign { update: Some((_, e)), .. } = node else {
        return vec![(vec![BigInt::zero(); width], S::one())];
    };
    let mut used = Vec::new();
    e.visit_vars(&mut |s| {
        if let Slot::Samp(i) = s {
            if !used.contains(i) {
                used.push(*i);
            }
        }
    });
    let mut out = vec![(vec![BigInt::zero(); width], Rational::from_integer(1.into()))];
    for i in used {
        let mut next = Vec::new();
        for (mu, w) in &out {
            for (v, p) in sf.dists()[i].support() {
                let mut mu = mu.clone();
                mu[i] = v.clone();
                next.push((mu, w * p));
            }
        }
        out = next;
    }
    out.into_iter().map(|(mu, w)| (mu, S::from_rational(&w))).collect()
}

struct Acc {
    checked: Vec<u64>,
    failed: Vec<u64>,
    first: Vec<Option<(u64, Counterexample)>>,
    err: Option<(u64, CertError)>,
}

impl Acc {
    fn new(n: usize) -> Self {
        Self { checked: vec![0; n], failed: vec![0; n], first: vec![None; n], err: None }
    }

    fn merge(mut self, other: Self) -> Self {
        for i in 0..self.checked.len() {
            self.checked[i] += other.checked[i];
            self.failed[i] += other.failed[i];
            let take = match (&self.first[i], &other.first[i]) {
                (None, Some(_)) => true,
                (Some((a, _)), Some((b, _))) => b < a,
                _ => false,
            };
            if take {
                self.first[i] = other.first[i].clone();
            }
        }
        let take = match (&self.err, &other.err) {
            (None, Some(_)) => true,
            (Some((a, _)), Some((b, _))) => b < a,
            _ => false,
        };
        if take {
            self.err = other.err;
        }
        self
    }
}

struct Checker<'a, S> {
    h: &'a BoundCert,
    cfg: &'a Cfg,
    sf: SamplingFunction,
    family: Family,
    params: Params<S>,
}

impl<S: Scalar> Checker<'_, S> {
    fn succ(
        &self,
        fi: usize,
        f: &FunctionCfg,
        node: Option<&Node>,
        outs: &[(Vec<BigInt>, S)],
        nu: &[BigInt],
        label: Label,
    ) -> Result<Succ<S>, CertError> {
        let h = |l: Label, v: &[BigInt]| self.h.eval::<S>(fi, l, v);
        Ok(match node {
            None => Succ::Terminal,
            Some(Node::Assign { update, next }) => {
                let mut dist = Vec::with_capacity(outs.len());
                for (mu, w) in outs {
                    let mut nu2 = nu.to_vec();
                    Cfg::apply_update(update, &mut nu2, mu).map_err(|source| CertError::Eval {
                        func: f.name.clone(),
                        label,
                        valuation: describe(f, nu),
                        source,
                    })?;
                    dist.push((w.clone(), h(*next, &nu2)?));
                }
                Succ::Dist(dist)
            }
            Some(Node::Call { callee, args, next }) => {
                let inner = self.cfg.value_passing(*callee, args, nu)?;
                let g = &self.cfg.functions[*callee];
                Succ::One(self.h.eval::<S>(*callee, g.l_in, &inner)? + h(*next, nu)?)
            }
            Some(Node::Branch { cond, then, els }) => {
                let holds = Cfg::eval_cond(cond, nu).map_err(|source| CertError::Eval {
                    func: f.name.clone(),
                    label,
                    valuation: describe(f, nu),
                    source,
                })?;
                Succ::One(h(if holds { *then } else { *els }, nu)?)
            }
            Some(Node::Nondet { then, els }) => Succ::Two(h(*then, nu)?, h(*els, nu)?),
        })
    }

    fn label_rows(
        &self,
        fi: usize,
        label: Label,
        fbox: &FunctionBox,
    ) -> Result<Vec<ConditionRow>, CertError> {
        let f = &self.cfg.functions[fi];
        let class = f.class(label).expect("label of f");
        let conds = conditions(self.family, class);
        if conds.is_empty() {
            return Ok(Vec::new());
        }
        let node = f.node(label);
        let outs: Vec<(Vec<BigInt>, S)> = match node {
            Some(n) => outcomes(n, &self.sf, self.cfg.sampling.len()),
            None => Vec::new(),
        };
        let acc = (0..fbox.total)
            .into_par_iter()
            .fold(
                || Acc::new(conds.len()),
                |mut acc, idx| {
                    if acc.err.is_some() {
                        return acc;
                    }
                    let nu = fbox.point(idx);
                    let result = self
                        .h
                        .eval::<S>(fi, label, &nu)
                        .and_then(|hv| Ok((self.succ(fi, f, node, &outs, &nu, label)?, hv)));
                    match result {
                        Err(e) => acc.err = Some((idx, e)),
                        Ok((succ, hv)) => {
                            for (i, v) in
                                verdicts(self.family, &self.params, &hv, &succ).into_iter().enumerate()
                            {
                                let Some((holds, lhs, relation, rhs)) = v else { continue };
                                acc.checked[i] += 1;
                                if !holds {
                                    acc.failed[i] += 1;
                                    if acc.first[i].as_ref().is_none_or(|(j, _)| idx < *j) {
                                        let c = Counterexample {
                                            valuation: format!("({}, {label}, {})", f.name, describe(f, &nu)),
                                            lhs: show(&lhs),
                                            relation,
                                            rhs: show(&rhs),
                                        };
                                        acc.first[i] = Some((idx, c));
                                    }
                                }
                            }
                        }
                    }
                    acc
                },
            )
            .reduce(|| Acc::new(conds.len()), Acc::merge);
        if let Some((_, e)) = acc.err {
            return Err(e);
        }
        Ok(conds
            .iter()
            .enumerate()
            .map(|(i, c)| ConditionRow {
                condition: c,
                func: f.name.clone(),
                label,
                checked: acc.checked[i],
                failed: acc.failed[i],
                first: acc.first[i].clone().map(|(_, c)| c),
            })
            .collect())
    }

    fn run(&self, params: String, bx: &VerifyBox) -> Result<CheckReport, CertError> {
        let mut rows = Vec::new();
        for (fi, f) in self.cfg.functions.iter().enumerate() {
            let fbox = bx.for_function(f)?;
            for label in f.labels() {
                rows.extend(self.label_rows(fi, label, &fbox)?);
            }
        }
        Ok(CheckReport { family: self.family, params, bx: bx.to_string(), exact: S::EXACT, rows })
    }
}

fn describe(f: &FunctionCfg, nu: &[BigInt]) -> String {
    Valuation::new(f.pvars.clone(), nu.to_vec()).map(|v| v.to_string()).unwrap_or_default()
}

fn run<S: Scalar>(
    family: Family,
    h: &BoundCert,
    cfg: &Cfg,
    sf: &SamplingFunction,
    bx: &VerifyBox,
    named: &[(&str, &Rational)],
    params: Params<S>,
) -> Result<CheckReport, CertError> {
    let sf = cfg.select_sampling(sf)?;
    let desc: Vec<String> = named.iter().map(|(k, v)| format!("{k}={}", fmt_rational(v))).collect();
    Checker { h, cfg, sf, family, params }.run(desc.join(" "), bx)
}

/// Ranking conditions C1–C5 with decrease `eps`.
pub fn check_ranking<S: Scalar>(
    h: &BoundCert,
    eps: &Rational,
    cfg: &Cfg,
    sf: &SamplingFunction,
    bx: &VerifyBox,
) -> Result<CheckReport, CertError> {
    run(Family::Ranking, h, cfg, sf, bx, &[("eps", eps)], Params::<S>::new(Some(eps), None, None))
}

/// Conditional difference bounds C6–C9 at finite points.
pub fn check_cdb<S: Scalar>(
    h: &BoundCert,
    delta: &Rational,
    zeta: &Rational,
    cfg: &Cfg,
    sf: &SamplingFunction,
    bx: &VerifyBox,
) -> Result<CheckReport, CertError> {
    let p = Params::<S>::new(None, Some(delta), Some(zeta));
    run(Family::Cdb, h, cfg, sf, bx, &[("delta", delta), ("zeta", zeta)], p)
}

/// Per-outcome difference bounds C10–C13 at finite points.
pub fn check_db<S: Scalar>(
    h: &BoundCert,
    zeta: &Rational,
    cfg: &Cfg,
    sf: &SamplingFunction,
    bx: &VerifyBox,
) -> Result<CheckReport, CertError> {
    run(Family::Db, h, cfg, sf, bx, &[("zeta", zeta)], Params::<S>::new(None, None, Some(zeta)))
}

/// Super-measure conditions D1–D5.
pub fn check_super<S: Scalar>(
    h: &BoundCert,
    delta: &Rational,
    zeta: &Rational,
    cfg: &Cfg,
    sf: &SamplingFunction,
    bx: &VerifyBox,
) -> Result<CheckReport, CertError> {
    let p = Params::<S>::new(None, Some(delta), Some(zeta));
    run(Family::Super, h, cfg, sf, bx, &[("delta", delta), ("zeta", zeta)], p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::Certificate;
    use crate::cfg::build_cfg;
    use crate::lang::parse;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn setup(prog: &str, cert: &str) -> (Cfg, BoundCert, SamplingFunction) {
        let p = parse(prog).unwrap();
        let cfg = build_cfg(&p).unwrap();
        let h = BoundCert::bind(&Certificate::parse(cert).unwrap(), &cfg).unwrap();
        let sf = p.sampling_function(&SamplingFunction::default()).unwrap();
        (cfg, h, sf)
    }

    #[test]
    fn box_parsing_and_points() {
        let b = VerifyBox::parse("n=-1..1, c=0..1,k=3").unwrap();
        assert_eq!(b.to_string(), "n=-1..1,c=0..1,k=3..3");
        assert!(VerifyBox::parse("n=2..1").is_err());
        assert!(VerifyBox::parse("n=1..2,n=3..4").is_err());
        assert!(VerifyBox::parse("n").is_err());
        let fb = FunctionBox { ranges: vec![(q(-1).to_integer(), 3), (BigInt::zero(), 2)], total: 6 };
        assert_eq!(fb.point(0), vec![BigInt::from(-1), BigInt::zero()]);
        assert_eq!(fb.point(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(fb.point(5), vec![BigInt::from(1), BigInt::from(1)]);
    }

    #[test]
    fn skip_program_is_super() {
        let (cfg, h, sf) = setup("f(n) { skip }", "f@1: 1\nf@2: 0");
        let bx = VerifyBox::parse("n=-3..3").unwrap();
        let r = check_super::<Rational>(&h, &q(1), &q(1), &cfg, &sf, &bx).unwrap();
        assert!(r.passed(), "{r}");
        assert!(check_ranking::<Rational>(&h, &q(1), &cfg, &sf, &bx).unwrap().passed());
        assert!(!check_ranking::<Rational>(&h, &q(2), &cfg, &sf, &bx).unwrap().passed());
    }

    #[test]
    fn missing_box_variable_is_an_error() {
        let (cfg, h, sf) = setup("f(n) { x := n }", "f@1: 1\nf@2: 0");
        let bx = VerifyBox::parse("n=0..1").unwrap();
        assert!(matches!(check_ranking::<Rational>(&h, &q(1), &cfg, &sf, &bx), Err(CertError::Box(_))));
    }

    #[test]
    fn bernoulli_walk_conditions() {
        // three steps per round and an expected decrease of 1/2 per round
        let prog = "f(n) { while n >= 1 do b := bernoulli(1/2); n := n - b od }";
        let cert = "f@1: [n >= 1] 6*n + 3 ; [n <= 0] 1\nf@2: [n >= 1] 6*n + 2 ; [n <= 0] inf\n\
                    f@3: [n - b >= 1] 6*n - 6*b + 4 ; [n - b <= 0] 2\nf@4: 0";
        let (cfg, h, sf) = setup(prog, cert);
        let bx = VerifyBox::parse("n=-2..5,b=0..1").unwrap();
        let r = check_ranking::<Rational>(&h, &q(1), &cfg, &sf, &bx).unwrap();
        assert!(r.passed(), "{r}");
        let db = check_db::<Rational>(&h, &q(6), &cfg, &sf, &bx).unwrap();
        assert!(db.passed(), "{db}");
        let tight = check_db::<Rational>(&h, &q(5), &cfg, &sf, &bx).unwrap();
        let row = tight.first_failure().unwrap();
        assert_eq!((row.condition, row.label), ("C10", 2));
        assert_eq!(row.first.as_ref().unwrap().lhs, "6");
        // the float instantiation agrees
        assert!(check_ranking::<f64>(&h, &q(1), &cfg, &sf, &bx).unwrap().passed());
    }

    #[test]
    fn nondet_uses_the_larger_branch() {
        let prog = "f(n) { if star then n := n - 1 else skip fi }";
        let (cfg, h, sf) = setup(prog, "f@1: 3\nf@2: 2\nf@3: 1\nf@4: 0");
        let bx = VerifyBox::parse("n=0..0").unwrap();
        assert!(check_ranking::<Rational>(&h, &q(1), &cfg, &sf, &bx).unwrap().passed());
        let r = check_ranking::<Rational>(&h, &Rational::new(3.into(), 2.into()), &cfg, &sf, &bx).unwrap();
        let bad = r.first_failure().unwrap();
        assert_eq!((bad.condition, bad.label), ("C5", 1));
        assert_eq!(bad.first.as_ref().unwrap().lhs, "3.5");
    }

    #[test]
    fn infinite_points_skip_difference_conditions() {
        let (cfg, h, sf) = setup("f(n) { n := n + 1 }", "f@1: [n >= 0] 1\nf@2: 0");
        let bx = VerifyBox::parse("n=-5..5").unwrap();
        let r = check_db::<Rational>(&h, &q(1), &cfg, &sf, &bx).unwrap();
        assert_eq!(r.rows[0].checked, 6);
        // D1 still sees every point
        let s = check_super::<Rational>(&h, &q(1), &q(1), &cfg, &sf, &bx).unwrap();
        assert_eq!(s.row("D1", "f", 1).unwrap().checked, 11);
        assert_eq!(s.row("D2(i)", "f", 1).unwrap().checked, 6);
    }
}
