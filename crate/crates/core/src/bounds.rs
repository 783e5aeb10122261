//! Termination-time bounds from verified certificates.
//!
//! Expected-time and Markov bounds are exact rationals. The exponential and
//! square-root tail bounds are evaluated in `f64` with `expm1`/`ln_1p` to
//! keep small arguments accurate.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cert::{CertParams, Family};
use crate::lang::fmt_rational;
use crate::{ExactExtReal, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("h(entry) is infinite, so the bound's hypothesis does not hold")]
    InfiniteEntry,
    #[error("h(entry) is 0; the bound needs 0 < h(entry) < inf")]
    ZeroEntry,
    #[error("n = {n} is outside the validity domain n > h(entry)/eps = {limit}")]
    OutsideDomain { n: u64, limit: String },
    #[error("`{0}` must be positive")]
    NonPositive(&'static str),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
}

fn rat(n: u64) -> Rational {
    Rational::from_integer(n.into())
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

fn positive(x: &Rational, name: &'static str) -> Result<(), BoundError> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(BoundError::NonPositive(name))
    }
}

/// `h(c)/ε`, an upper bound on the expected termination time.
pub fn upper_expected(h_entry: &ExactExtReal, eps: &Rational) -> Result<ExactExtReal, BoundError> {
    positive(eps, "eps")?;
    Ok(match h_entry {
        ExactExtReal::Finite(h) => ExactExtReal::Finite(h / eps),
        ExactExtReal::Infinite => ExactExtReal::Infinite,
    })
}

/// `h(c)/δ`, a lower bound on the expected termination time under the
/// greedy witness scheduler.
pub fn lower_expected(h_entry: &ExactExtReal, delta: &Rational) -> Result<Rational, BoundError> {
    positive(delta, "delta")?;
    match h_entry {
        ExactExtReal::Finite(h) => Ok(h / delta),
        ExactExtReal::Infinite => Err(BoundError::InfiniteEntry),
    }
}

/// `min(1, h(c)/(ε·k))` for `P(T ≥ k)`.
pub fn markov_tail(h_entry: &ExactExtReal, eps: &Rational, k: u64) -> Result<Rational, BoundError> {
    positive(eps, "eps")?;
    if k == 0 {
        return Err(BoundError::NonPositive("k"));
    }
    Ok(match h_entry {
        ExactExtReal::Finite(h) => (h / (eps * rat(k))).min(Rational::one()),
        ExactExtReal::Infinite => Rational::one(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Concentration {
    /// `exp(−(εn − h)² / (2n(ε+ζ)²))`.
    pub tight: f64,
    /// `exp(εh/(ε+ζ)²) · exp(−ε²n/(2(ε+ζ)²))`, never smaller than `tight`.
    pub factored: f64,
}

/// Exponential bound on `P(T > n)` for difference-bounded certificates,
/// valid for `n > h(c)/ε`. Both forms are clamped to `[0, 1]`.
pub fn concentration_tail(
    h_entry: &ExactExtReal,
    eps: &Rational,
    zeta: &Rational,
    n: u64,
) -> Result<Concentration, BoundError> {
    positive(eps, "eps")?;
    positive(zeta, "zeta")?;
    let ExactExtReal::Finite(h) = h_entry else { return Err(BoundError::InfiniteEntry) };
    let limit = h / eps;
    if rat(n) <= limit {
        return Err(BoundError::OutsideDomain { n, limit: fmt_rational(&limit) });
    }
    let (h, e, z, nf) = (to_f64(h), to_f64(eps), to_f64(zeta), n as f64);
    let c2 = (e + z) * (e + z);
    let tight = (-(e * nf - h).powi(2) / (2.0 * nf * c2)).exp();
    let factored = (e * h / c2 - e * e * nf / (2.0 * c2)).exp();
    Ok(Concentration { tight: tight.clamp(0.0, 1.0), factored: factored.clamp(0.0, 1.0) })
}

/// `Σ_{j≥3} x^j/j! = e^x − (1 + x + x²/2)`, summed directly so that small
/// `x` does not cancel.
pub fn exp_tail3(x: f64) -> f64 {
    if x > 1.0 {
        return x.exp_m1() - x - 0.5 * x * x;
    }
    let mut term = x * x * x / 6.0;
    let mut sum = 0.0;
    let mut j = 3.0;
    while term.abs() > f64::EPSILON * sum.abs() * 0.01 && j < 200.0 {
        sum += term;
        j += 1.0;
        term *= x / j;
    }
    sum
}

/// The smallness condition `e^{ζt} − (1 + ζt + ζ²t²/2) ≤ (δ²/4)·t²` at
/// `t = 1/√k`.
pub fn smallness_holds(delta: f64, zeta: f64, k: u64) -> bool {
    let t = 1.0 / (k as f64).sqrt();
    exp_tail3(zeta * t) <= delta * delta / 4.0 * t * t
}

/// Least `k` satisfying [`smallness_holds`]; the condition is monotone in
/// `k`, so doubling followed by bisection finds it.
pub fn min_valid_k(delta: f64, zeta: f64) -> u64 {
    let mut hi = 1u64;
    while !smallness_holds(delta, zeta, hi) {
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return hi;
        }
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return hi;
    }
    // invariant: fails at lo, holds at hi
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if smallness_holds(delta, zeta, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SqrtTail {
    Bound {
        value: f64,
        unclamped: f64,
    },
    /// `k` is below the threshold where the bound's derivation applies.
    TooSmall {
        min_k: u64,
    },
}

impl SqrtTail {
    pub fn value(&self) -> Option<f64> {
        match self {
            SqrtTail::Bound { value, .. } => Some(*value),
            SqrtTail::TooSmall { .. } => None,
        }
    }
}

/// `(1 − e^{−h/√k}) / (1 − (1 + δ²/(4k))^{−⌊k/K⌋})` for `P(T ≥ k)`, with
/// `K` the number of steps per sampled period.
pub fn sqrt_tail(
    h_entry: &ExactExtReal,
    delta: &Rational,
    zeta: &Rational,
    period: u64,
    k: u64,
) -> Result<SqrtTail, BoundError> {
    positive(delta, "delta")?;
    positive(zeta, "zeta")?;
    if period == 0 {
        return Err(BoundError::NonPositive("K"));
    }
    if k == 0 {
        return Err(BoundError::NonPositive("k"));
    }
    let ExactExtReal::Finite(h) = h_entry else { return Err(BoundError::InfiniteEntry) };
    if h.is_zero() {
        return Err(BoundError::ZeroEntry);
    }
    let (h, d, z) = (to_f64(h), to_f64(delta), to_f64(zeta));
    if !smallness_holds(d, z, k) {
        return Ok(SqrtTail::TooSmall { min_k: min_valid_k(d, z) });
    }
    let kf = k as f64;
    let num = -(-h / kf.sqrt()).exp_m1();
    let periods = (k / period) as f64;
    let den = -(-periods * (d * d / (4.0 * kf)).ln_1p()).exp_m1();
    let unclamped = if den > 0.0 { num / den } else { f64::INFINITY };
    Ok(SqrtTail::Bound { value: unclamped.clamp(0.0, 1.0), unclamped })
}

/// Qualitative verdict for super-measure certificates that are not
/// difference-bounded; its constant is not computable from the certificate.
pub const WEAK_TAIL_NOTE: &str = "a.s. terminating, tail in O(k^(-1/6))";

/// One line of a bound report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: &'static str,
    /// `k` for `P(T ≥ k)`, `n` for `P(T > n)`.
    pub at: Option<u64>,
    /// Exact rational value, when the bound is rational.
    pub exact: Option<String>,
    pub value: Option<f64>,
    pub note: String,
}

impl BoundReport {
    fn exact(bound: &'static str, at: Option<u64>, x: &ExactExtReal, note: impl Into<String>) -> Self {
        let (exact, value) = match x {
            ExactExtReal::Finite(r) => (fmt_rational(r), to_f64(r)),
            ExactExtReal::Infinite => ("inf".to_string(), f64::INFINITY),
        };
        Self { bound, at, exact: Some(exact), value: Some(value), note: note.into() }
    }

    fn float(bound: &'static str, at: Option<u64>, value: f64, note: impl Into<String>) -> Self {
        Self { bound, at, exact: None, value: Some(value), note: note.into() }
    }

    fn none(bound: &'static str, at: Option<u64>, note: impl Into<String>) -> Self {
        Self { bound, at, exact: None, value: None, note: note.into() }
    }
}

/// What to compute for one entry.
#[derive(Clone, Debug, Default)]
pub struct BoundQuery {
    pub ks: Vec<u64>,
    pub ns: Vec<u64>,
    /// Steps per sampled period for the square-root tail.
    pub period: Option<u64>,
}

fn need<'a>(x: &'a Option<Rational>, name: &'static str) -> Result<&'a Rational, BoundError> {
    x.as_ref().ok_or(BoundError::MissingParam(name))
}

/// All bounds that follow from a certificate of the given family at an entry
/// with value `h_entry`. Per-row failures (such as an `n` outside the
/// validity domain) become rows without a value.
pub fn bound_reports(
    family: Family,
    h_entry: &ExactExtReal,
    params: &CertParams,
    q: &BoundQuery,
) -> Result<Vec<BoundReport>, BoundError> {
    let mut out = Vec::new();
    if family != Family::Super {
        let eps = need(&params.eps, "eps")?;
        out.push(BoundReport::exact("upper-expected", None, &upper_expected(h_entry, eps)?, "h/eps"));
    }
    match family {
        Family::Cdb => {
            let delta = need(&params.delta, "delta")?;
            match lower_expected(h_entry, delta) {
                Ok(r) => {
                    out.push(BoundReport::exact("lower-expected", None, &ExactExtReal::Finite(r), "h/delta"))
                }
                Err(e) => out.push(BoundReport::none("lower-expected", None, e.to_string())),
            }
        }
        Family::Db => {
            let (eps, zeta) = (need(&params.eps, "eps")?, need(&params.zeta, "zeta")?);
            for &n in &q.ns {
                match concentration_tail(h_entry, eps, zeta, n) {
                    Ok(c) => {
                        out.push(BoundReport::float("concentration", Some(n), c.tight, "P(T > n)"));
                        out.push(BoundReport::float(
                            "concentration-factored",
                            Some(n),
                            c.factored,
                            "P(T > n)",
                        ));
                    }
                    Err(e) => out.push(BoundReport::none("concentration", Some(n), e.to_string())),
                }
            }
        }
        Family::Super => {
            let (delta, zeta) = (need(&params.delta, "delta")?, need(&params.zeta, "zeta")?);
            let period = q.period.ok_or(BoundError::MissingParam("K"))?;
            for &k in &q.ks {
                match sqrt_tail(h_entry, delta, zeta, period, k) {
                    Ok(SqrtTail::Bound { value, .. }) => out.push(BoundReport::float(
                        "sqrt-tail",
                        Some(k),
                        value,
                        format!("P(T >= k), K={period}"),
                    )),
                    Ok(SqrtTail::TooSmall { min_k }) => out.push(BoundReport::none(
                        "sqrt-tail",
                        Some(k),
                        format!("k too small for this bound; need k >= {min_k}"),
                    )),
                    Err(e) => out.push(BoundReport::none("sqrt-tail", Some(k), e.to_string())),
                }
            }
            out.push(BoundReport::none("weak-tail", None, WEAK_TAIL_NOTE));
        }
        Family::Ranking => {}
    }
    if family != Family::Super {
        let eps = need(&params.eps, "eps")?;
        for &k in &q.ks {
            let m = markov_tail(h_entry, eps, k)?;
            out.push(BoundReport::exact("markov-tail", Some(k), &ExactExtReal::Finite(m), "P(T >= k)"));
        }
    }
    Ok(out)
}
