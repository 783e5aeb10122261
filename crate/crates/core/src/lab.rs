//! Stochastic processes that show why each hypothesis of the termination
//! theorems is needed, with their closed-form statistics and a simulator.
//!
//! Every process has a two-point increment law `Y_n ∈ {up_n, down_n}` and
//! stopping time `T = min{n | X_n ≤ 0}`. All but `nonnegativity` follow
//! `X_{n+1} = 1_{X_n>0}·(X_n + Y_{n+1})`; `nonnegativity` is the plain sum.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::prob::RngStream;
use crate::stats::{Moments, Proportion, Z95};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("unknown process `{0}` (expected one of: {names})", names = LabProcess::NAMES.join(", "))]
    UnknownProcess(String),
    #[error("alpha must be a finite number greater than 1, got {0}")]
    BadAlpha(f64),
    #[error("query `{query}` has no closed form for `{process}`")]
    Unsupported { process: &'static str, query: String },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum LabProcess {
    Nonnegativity,
    Cbounded,
    Noconcentration { alpha: f64 },
    Randomwalk,
    Positivity,
}

/// `P(Y_n = up) = p_up`, otherwise `Y_n = down`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPoint {
    pub up: Rational,
    pub down: Rational,
    pub p_up: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    ProbNonterm,
    ExpectedT,
    /// `P(T > n)`.
    Tail(u64),
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::ProbNonterm => f.write_str("prob_nonterm"),
            Query::ExpectedT => f.write_str("expected_T"),
            Query::Tail(n) => write!(f, "tail({n})"),
        }
    }
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

fn int(x: impl Into<BigInt>) -> Rational {
    Rational::from_integer(x.into())
}

impl LabProcess {
    pub const NAMES: [&'static str; 5] =
        ["nonnegativity", "cbounded", "noconcentration", "randomwalk", "positivity"];

    pub fn by_name(name: &str, alpha: Option<f64>) -> Result<Self, LabError> {
        let p = match name {
            "nonnegativity" => Self::Nonnegativity,
            "cbounded" => Self::Cbounded,
            "noconcentration" => {
                let alpha = alpha.unwrap_or(2.0);
                if !(alpha.is_finite() && alpha > 1.0) {
                    return Err(LabError::BadAlpha(alpha));
                }
                Self::Noconcentration { alpha }
            }
            "randomwalk" => Self::Randomwalk,
            "positivity" => Self::Positivity,
            _ => return Err(LabError::UnknownProcess(name.to_string())),
        };
        Ok(p)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Nonnegativity => "nonnegativity",
            Self::Cbounded => "cbounded",
            Self::Noconcentration { .. } => "noconcentration",
            Self::Randomwalk => "randomwalk",
            Self::Positivity => "positivity",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::Noconcentration { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// `X_0`.
    pub fn start(&self) -> Rational {
        match self {
            Self::Nonnegativity => Rational::new(1.into(), 2.into()),
            Self::Cbounded | Self::Noconcentration { .. } => int(3),
            Self::Randomwalk | Self::Positivity => int(1),
        }
    }

    fn p_up(&self, n: u64) -> f64 {
        let n = n as f64;
        match self {
            Self::Nonnegativity => (-1.0 / (n * n)).exp(),
            Self::Noconcentration { alpha } => (-alpha * (1.0 / n).ln_1p()).exp(),
            _ => 0.5,
        }
    }

    /// The law of the increment `Y_n`, `n ≥ 1`.
    pub fn law(&self, n: u64) -> TwoPoint {
        assert!(n >= 1, "increments start at n = 1");
        let (up, down) = match self {
            Self::Nonnegativity => (int(1), -int(4 * u128::from(n) * u128::from(n))),
            Self::Cbounded => (int(pow2(n - 1)), -int(pow2(n - 1) + 2)),
            Self::Noconcentration { .. } => (int(2), -int(2 * u128::from(n) + 1)),
            Self::Randomwalk => (int(1), int(-1)),
            Self::Positivity => {
                let v = Rational::new(1.into(), pow2(n - 1));
                (v.clone(), -v)
            }
        };
        TwoPoint { up, down, p_up: self.p_up(n) }
    }

    /// Draws whether `Y_n` takes its `up` value.
    pub fn draw_up(&self, n: u64, rng: &mut RngStream) -> bool {
        rng.gen::<f64>() < self.p_up(n)
    }

    /// `Some(T)` if the process stops within `horizon` steps.
    pub fn first_passage(&self, horizon: u64, rng: &mut RngStream) -> Option<u64> {
        match self {
            Self::Nonnegativity => {
                // twice the running sum
                let mut y2: i128 = 1;
                for n in 1..=horizon {
                    if self.draw_up(n, rng) {
                        y2 += 2;
                    } else {
                        y2 -= 8 * i128::from(n) * i128::from(n);
                    }
                    if y2 <= 0 {
                        return Some(n);
                    }
                }
            }
            Self::Cbounded => {
                let mut x = BigInt::from(3);
                for n in 1..=horizon {
                    if self.draw_up(n, rng) {
                        x += pow2(n - 1);
                    } else {
                        x -= pow2(n - 1) + 2;
                    }
                    if !x.is_positive() {
                        return Some(n);
                    }
                }
            }
            Self::Noconcentration { .. } => {
                let mut x: i128 = 3;
                for n in 1..=horizon {
                    x += if self.draw_up(n, rng) { 2 } else { -2 * i128::from(n) - 1 };
                    if x <= 0 {
                        return Some(n);
                    }
                }
            }
            Self::Randomwalk => {
                let mut x: i64 = 1;
                for n in 1..=horizon {
                    x += if self.draw_up(n, rng) { 1 } else { -1 };
                    if x <= 0 {
                        return Some(n);
                    }
                }
            }
            Self::Positivity => {
                // m = X_n·2^n, so m_{n+1} = 2·m_n ± 2
                let mut m = BigInt::one();
                for n in 1..=horizon {
                    m <<= 1;
                    if self.draw_up(n, rng) {
                        m += 2;
                    } else {
                        m -= 2;
                    }
                    if !m.is_positive() {
                        return Some(n);
                    }
                }
            }
        }
        None
    }

    /// Closed-form value of `q`.
    pub fn analytic(&self, q: Query) -> Result<f64, LabError> {
        let unsupported = || LabError::Unsupported { process: self.name(), query: q.to_string() };
        Ok(match (self, q) {
            (_, Query::Tail(0)) => 1.0,
            (Self::Nonnegativity, Query::Tail(n)) => (-inverse_square_sum(n)).exp(),
            (Self::Nonnegativity, Query::ProbNonterm) => (-std::f64::consts::PI.powi(2) / 6.0).exp(),
            (Self::Cbounded, Query::Tail(n)) => 0.5f64.powf(n as f64),
            (Self::Cbounded, Query::ExpectedT) => 2.0,
            (Self::Noconcentration { alpha }, Query::Tail(n)) => (n as f64 + 1.0).powf(-alpha),
            (Self::Noconcentration { alpha }, Query::ExpectedT) => zeta(*alpha),
            (Self::Randomwalk, Query::Tail(n)) => central_binomial_tail(n),
            (Self::Randomwalk, Query::ExpectedT) => f64::INFINITY,
            (Self::Positivity, Query::Tail(_)) => 0.5,
            (Self::Positivity, Query::ProbNonterm) => 0.5,
            (Self::Cbounded | Self::Noconcentration { .. } | Self::Randomwalk, Query::ProbNonterm) => 0.0,
            (Self::Nonnegativity | Self::Positivity, Query::ExpectedT) => return Err(unsupported()),
        })
    }
}

impl fmt::Display for LabProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Noconcentration { alpha } => write!(f, "noconcentration(alpha={alpha})"),
            _ => f.write_str(self.name()),
        }
    }
}

/// `Σ_{j=1}^n 1/j²`.
pub fn inverse_square_sum(n: u64) -> f64 {
    if n > 10_000_000 {
        let x = n as f64;
        return std::f64::consts::PI.powi(2) / 6.0
            - (1.0 / x - 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x));
    }
    (1..=n).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum()
}

/// Riemann zeta at `s > 1`, by a partial sum with an Euler-Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    let n = 10_000u64;
    let head: f64 = (1..n).rev().map(|k| (k as f64).powf(-s)).sum();
    let x = n as f64;
    head + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s * x.powf(-s - 1.0) / 12.0
}

/// `P(T > n)` for the simple symmetric walk from 1 absorbed at 0, which by
/// reflection equals `C(n, ⌊n/2⌋)/2^n`.
pub fn central_binomial_tail(n: u64) -> f64 {
    let mut a = 1.0;
    for m in (1..=n).filter(|m| m % 2 == 1) {
        a *= m as f64 / (m as f64 + 1.0);
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabOptions {
    pub runs: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Extra `n` for `P(T > n)`; defaults depend on the process.
    pub tails: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabRow {
    pub query: String,
    pub analytic: Option<f64>,
    pub analytic_method: &'static str,
    pub empirical: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub sigma: Option<f64>,
    pub empirical_method: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabResult {
    #[serde(flatten)]
    pub process: LabProcess,
    pub runs: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Runs with `T > horizon`.
    pub censored: u64,
    pub rows: Vec<LabRow>,
}

impl LabResult {
    pub fn row(&self, query: &str) -> Option<&LabRow> {
        self.rows.iter().find(|r| r.query == query)
    }
}

/// Log-spaced grid over `[lo, hi]`, `per_decade` points per factor of 10.
pub fn log_grid(lo: u64, hi: u64, per_decade: u32) -> Vec<u64> {
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * f64::from(per_decade)).round() as u32;
    let mut v: Vec<u64> = (0..=steps)
        .map(|i| 10f64.powf(a + (b - a) * f64::from(i) / f64::from(steps.max(1))).round() as u64)
        .collect();
    v.dedup();
    v
}

/// Least-squares slope of `ln(count)` against `ln(n)`, weighted by `count`
/// (the inverse variance of a log Poisson count). Zero counts are skipped.
pub fn loglog_slope(points: &[(u64, u64)]) -> Option<f64> {
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0)
        .map(|&(n, c)| ((n as f64).ln(), (c as f64).ln(), c as f64))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let w: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn default_tails(p: &LabProcess, horizon: u64) -> Vec<u64> {
    match p {
        LabProcess::Nonnegativity => vec![10, 100, horizon],
        LabProcess::Cbounded => vec![1, 2, 5],
        LabProcess::Noconcentration { .. } => vec![9, 100, 1000],
        LabProcess::Randomwalk => vec![99, 999, 9999],
        LabProcess::Positivity => vec![1, 2, horizon],
    }
}

const SLOPE_RANGE: (u64, u64) = (10, 1000);

struct Acc {
    moments: Moments,
    censored: u64,
    counts: Vec<u64>,
}

/// Simulates `runs` independent paths up to `horizon`; run `i` uses stream
/// `(seed, i)`.
pub fn simulate_lab(p: &LabProcess, opts: &LabOptions) -> Result<LabResult, LabError> {
    if opts.horizon == 0 {
        return Err(LabError::ZeroHorizon);
    }
    let h = opts.horizon;
    let mut tails = if opts.tails.is_empty() { default_tails(p, h) } else { opts.tails.clone() };
    tails.retain(|&n| n <= h);
    tails.sort_unstable();
    tails.dedup();
    let slope_grid = match p {
        LabProcess::Noconcentration { .. } if SLOPE_RANGE.1 <= h => log_grid(SLOPE_RANGE.0, SLOPE_RANGE.1, 8),
        _ => Vec::new(),
    };
    let qs: Vec<u64> = tails.iter().chain(&slope_grid).copied().collect();
    let acc = (0..opts.runs)
        .into_par_iter()
        .fold(
            || Acc { moments: Moments::default(), censored: 0, counts: vec![0; qs.len()] },
            |mut a, i| {
                let mut rng = RngStream::new(opts.seed, i);
                match p.first_passage(h, &mut rng) {
                    Some(t) => {
                        a.moments.push(t);
                        for (c, n) in a.counts.iter_mut().zip(&qs) {
                            *c += (t > *n) as u64;
                        }
                    }
                    None => {
                        a.censored += 1;
                        for c in a.counts.iter_mut() {
                            *c += 1;
                        }
                    }
                }
                a
            },
        )
        .reduce(
            || Acc { moments: Moments::default(), censored: 0, counts: vec![0; qs.len()] },
            |mut a, b| {
                a.moments = a.moments.merge(b.moments);
                a.censored += b.censored;
                for (x, y) in a.counts.iter_mut().zip(b.counts) {
                    *x += y;
                }
                a
            },
        );

    let runs = opts.runs;
    let mut rows = Vec::new();
    let prop_row = |query: String, analytic: Option<f64>, analytic_method, pr: &Proportion, method| LabRow {
        query,
        analytic,
        analytic_method,
        empirical: Some(pr.p),
        lo: Some(pr.lo),
        hi: Some(pr.hi),
        sigma: Some(pr.sigma),
        empirical_method: method,
    };
    for (n, c) in tails.iter().zip(&acc.counts) {
        let pr = Proportion::new(*c, runs);
        let a = p.analytic(Query::Tail(*n)).ok();
        rows.push(prop_row(Query::Tail(*n).to_string(), a, "closed form", &pr, "frequency, Wilson 95%"));
        if matches!(p, LabProcess::Randomwalk) {
            // P(T ≥ k)·√k with k = n + 1
            let s = ((*n + 1) as f64).sqrt();
            rows.push(LabRow {
                query: format!("sqrt_scaled({})", n + 1),
                analytic: a.map(|v| v * s),
                analytic_method: "closed form times sqrt(k)",
                empirical: Some(pr.p * s),
                lo: Some(pr.lo * s),
                hi: Some(pr.hi * s),
                sigma: Some(pr.sigma * s),
                empirical_method: "frequency of T >= k times sqrt(k)",
            });
        }
    }
    if let Ok(a) = p.analytic(Query::ExpectedT) {
        // heavy tails make the sample mean meaningless unless T has a variance
        let (emp, hw) = match p {
            LabProcess::Cbounded => {
                (acc.moments.mean(), acc.moments.mean().map(|_| acc.moments.half_width()))
            }
            _ => (None, None),
        };
        rows.push(LabRow {
            query: Query::ExpectedT.to_string(),
            analytic: Some(a),
            analytic_method: "closed form",
            empirical: emp,
            lo: emp.zip(hw).map(|(m, w)| m - w),
            hi: emp.zip(hw).map(|(m, w)| m + w),
            sigma: hw.map(|w| w / Z95),
            empirical_method: if emp.is_some() {
                "mean of T over terminated runs, normal 95%"
            } else {
                "not estimated"
            },
        });
    }
    if let Ok(a) = p.analytic(Query::ProbNonterm) {
        let pr = Proportion::new(acc.censored, runs);
        rows.push(prop_row(
            Query::ProbNonterm.to_string(),
            Some(a),
            "closed-form limit",
            &pr,
            "P(T > horizon), an upper-biased proxy",
        ));
    }
    if !slope_grid.is_empty() {
        let pts: Vec<(u64, u64)> =
            slope_grid.iter().zip(&acc.counts[tails.len()..]).map(|(n, c)| (*n, *c)).collect();
        rows.push(LabRow {
            query: format!("slope[{},{}]", SLOPE_RANGE.0, SLOPE_RANGE.1),
            analytic: p.alpha().map(|a| -a),
            analytic_method: "tail exponent",
            empirical: loglog_slope(&pts),
            lo: None,
            hi: None,
            sigma: None,
            empirical_method: "weighted log-log least squares of P(T > n)",
        });
    }
    Ok(LabResult { process: *p, runs, horizon: h, seed: opts.seed, censored: acc.censored, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let nn = LabProcess::Nonnegativity;
        assert!((nn.analytic(Query::ProbNonterm).unwrap() - 0.193_025).abs() < 1e-6);
        assert_eq!(LabProcess::Cbounded.analytic(Query::ExpectedT).unwrap(), 2.0);
        let nc = LabProcess::by_name("noconcentration", Some(2.0)).unwrap();
        assert!((nc.analytic(Query::Tail(9)).unwrap() - 0.01).abs() < 1e-15);
        assert!((nc.analytic(Query::ExpectedT).unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
        assert!(matches!(nn.analytic(Query::ExpectedT), Err(LabError::Unsupported { .. })));
        assert!(matches!(LabProcess::by_name("noconcentration", Some(1.0)), Err(LabError::BadAlpha(_))));
        assert!(LabProcess::by_name("nope", None).is_err());
    }

    #[test]
    fn inverse_square_sum_branches_agree() {
        let x = 10_000_000f64;
        let direct = inverse_square_sum(10_000_000);
        let asym = std::f64::consts::PI.powi(2) / 6.0 - (1.0 / x - 1.0 / (2.0 * x * x));
        assert!((direct - asym).abs() < 1e-13);
    }

    #[test]
    fn walk_tail_matches_path_count() {
        // brute force over all 2^12 paths
        for n in 0..=12u32 {
            let mut alive = 0u32;
            for bits in 0u32..(1 << n) {
                let mut x = 1i32;
                let mut ok = true;
                for j in 0..n {
                    x += if bits >> j & 1 == 1 { 1 } else { -1 };
                    if x <= 0 {
                        ok = false;
                        break;
                    }
                }
                alive += ok as u32;
            }
            let want = f64::from(alive) / f64::from(1u32 << n);
            assert!((central_binomial_tail(u64::from(n)) - want).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn laws_follow_definitions() {
        let l = LabProcess::Cbounded.law(3);
        assert_eq!((l.up, l.down, l.p_up), (int(4), int(-6), 0.5));
        let l = LabProcess::Positivity.law(3);
        assert_eq!(l.up, Rational::new(1.into(), 4.into()));
        let l = LabProcess::Nonnegativity.law(2);
        assert_eq!(l.down, int(-16));
        assert!((l.p_up - (-0.25f64).exp()).abs() < 1e-16);
        let l = LabProcess::Noconcentration { alpha: 2.0 }.law(1);
        assert_eq!(l.down, int(-3));
        assert!((l.p_up - 0.25).abs() < 1e-15);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(u64, u64)> =
            log_grid(10, 1000, 8).into_iter().map(|n| (n, 1_000_000_000 / (n * n))).collect();
        assert!((loglog_slope(&pts).unwrap() + 2.0).abs() < 1e-3);
        assert_eq!(log_grid(10, 1000, 2), vec![10, 32, 100, 316, 1000]);
    }

    #[test]
    fn small_simulations() {
        let opts = LabOptions { runs: 4000, horizon: 64, seed: 3, tails: vec![] };
        let r = simulate_lab(&LabProcess::Positivity, &opts).unwrap();
        assert!(r.row("tail(1)").unwrap().empirical.unwrap() > 0.45);
        assert_eq!(r.row("tail(1)").unwrap().empirical, r.row("tail(64)").unwrap().empirical);
        let r = simulate_lab(&LabProcess::Cbounded, &LabOptions { horizon: 200, ..opts.clone() }).unwrap();
        let m = r.row("expected_T").unwrap();
        assert!((m.empirical.unwrap() - 2.0).abs() < 0.15, "{m:?}");
        assert_eq!(
            simulate_lab(&LabProcess::Randomwalk, &LabOptions { horizon: 0, ..opts }),
            Err(LabError::ZeroHorizon)
        );
    }
}
