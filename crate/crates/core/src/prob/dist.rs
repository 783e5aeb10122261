use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use super::{parse_rational, Valuation};
use crate::Rational;

/// Joint supports above this size are reported with a warning.
pub const JOINT_SUPPORT_WARN: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistError {
    #[error("distribution has empty support")]
    Empty,
    #[error("probability {0} is outside (0, 1]")]
    BadProbability(Rational),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(Rational),
    #[error("value {0} appears twice in the support")]
    DuplicateValue(BigInt),
    #[error("sampling variable `{0}` is defined twice")]
    DuplicateVariable(String),
    #[error("no distribution for sampling variable `{0}`")]
    Missing(String),
    #[error("valuation does not bind sampling variable `{0}`")]
    Unbound(String),
    #[error("valuation binds `{0}`, which is not a sampling variable")]
    Extra(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

#[derive(Clone, Debug)]
enum Sampler {
    /// Cumulative numerators over a common denominator that fits in `u64`.
    Exact {
        den: u64,
        cum: Vec<u64>,
    },
    Float {
        cum: Vec<f64>,
    },
}

/// A finite distribution over integers with exact rational probabilities.
#[derive(Clone, Debug)]
pub struct DiscreteDist {
    support: Vec<(BigInt, Rational)>,
    sampler: Sampler,
}

impl PartialEq for DiscreteDist {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support
    }
}

impl Eq for DiscreteDist {}

impl DiscreteDist {
    pub fn new(support: Vec<(BigInt, Rational)>) -> Result<Self, DistError> {
        if support.is_empty() {
            return Err(DistError::Empty);
        }
        let mut seen = HashSet::new();
        let mut total = Rational::zero();
        for (v, p) in &support {
            if !p.is_positive() || p > &Rational::one() {
                return Err(DistError::BadProbability(p.clone()));
            }
            if !seen.insert(v.clone()) {
                return Err(DistError::DuplicateValue(v.clone()));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(DistError::NotNormalized(total));
        }
        let sampler = Self::make_sampler(&support);
        Ok(Self { support, sampler })
    }

    pub fn point(value: BigInt) -> Self {
        Self::new(vec![(value, Rational::one())]).expect("point mass is valid")
    }

    /// `{0: 1-p, 1: p}`; degenerate when `p` is 0 or 1.
    pub fn bernoulli(p: &Rational) -> Result<Self, DistError> {
        let one = Rational::one();
        if p.is_negative() || p > &one {
            return Err(DistError::BadProbability(p.clone()));
        }
        if p.is_zero() {
            return Ok(Self::point(BigInt::zero()));
        }
        if p.is_one() {
            return Ok(Self::point(BigInt::one()));
        }
        Self::new(vec![(BigInt::zero(), one - p), (BigInt::one(), p.clone())])
    }

    fn make_sampler(support: &[(BigInt, Rational)]) -> Sampler {
        let den = support.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        if let Some(den_u) = den.to_u64() {
            let mut acc = 0u64;
            let cum = support
                .iter()
                .map(|(_, p)| {
                    let scaled = (p.numer() * (&den / p.denom())).to_u64().expect("bounded by den");
                    acc += scaled;
                    acc
                })
                .collect();
            Sampler::Exact { den: den_u, cum }
        } else {
            let mut acc = 0.0;
            let cum = support
                .iter()
                .map(|(_, p)| {
                    acc += p.to_f64().unwrap_or(0.0);
                    acc
                })
                .collect();
            Sampler::Float { cum }
        }
    }

    pub fn support(&self) -> &[(BigInt, Rational)] {
        &self.support
    }

    pub fn prob(&self, v: &BigInt) -> Rational {
        self.support.iter().find(|(x, _)| x == v).map(|(_, p)| p.clone()).unwrap_or_else(Rational::zero)
    }

    /// Index into [`support`](Self::support) of a fresh draw.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let last = self.support.len() - 1;
        match &self.sampler {
            Sampler::Exact { den, cum } => {
                let u = rng.gen_range(0..*den);
                cum.iter().position(|&c| u < c).unwrap_or(last)
            }
            Sampler::Float { cum } => {
                let u: f64 = rng.gen::<f64>() * cum[last];
                cum.iter().position(|&c| u < c).unwrap_or(last)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &BigInt {
        &self.support[self.sample_index(rng)].0
    }

    pub fn mean(&self) -> Rational {
        self.support
            .iter()
            .map(|(v, p)| Rational::from_integer(v.clone()) * p)
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// Draws one value from `dist`.
pub fn sample<R: Rng + ?Sized>(dist: &DiscreteDist, rng: &mut R) -> BigInt {
    dist.sample(rng).clone()
}

/// Assigns a distribution to every sampling variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SamplingFunction {
    vars: Vec<String>,
    dists: Vec<DiscreteDist>,
}

impl SamplingFunction {
    pub fn new(entries: Vec<(String, DiscreteDist)>) -> Result<Self, DistError> {
        let mut seen = HashSet::new();
        for (v, _) in &entries {
            if !seen.insert(v.clone()) {
                return Err(DistError::DuplicateVariable(v.clone()));
            }
        }
        let (vars, dists) = entries.into_iter().unzip();
        Ok(Self { vars, dists })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn dists(&self) -> &[DiscreteDist] {
        &self.dists
    }

    pub fn get(&self, var: &str) -> Option<&DiscreteDist> {
        self.vars.iter().position(|v| v == var).map(|i| &self.dists[i])
    }

    /// A copy holding exactly `vars`, in that order.
    pub fn select(&self, vars: &[String]) -> Result<Self, DistError> {
        let entries = vars
            .iter()
            .map(|v| {
                self.get(v).cloned().map(|d| (v.clone(), d)).ok_or_else(|| DistError::Missing(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    /// Union of two sampling functions over disjoint variables.
    pub fn merge(mut self, other: Self) -> Result<Self, DistError> {
        for (v, d) in other.vars.into_iter().zip(other.dists) {
            if self.vars.contains(&v) {
                return Err(DistError::DuplicateVariable(v));
            }
            self.vars.push(v);
            self.dists.push(d);
        }
        Ok(self)
    }

    /// `Ῡ(μ) = Π_r Υ(r)(μ(r))`.
    pub fn product_weight(&self, mu: &Valuation) -> Result<Rational, DistError> {
        for v in mu.vars() {
            if !self.vars.contains(v) {
                return Err(DistError::Extra(v.clone()));
            }
        }
        let mut w = Rational::one();
        for (v, d) in self.vars.iter().zip(&self.dists) {
            let x = mu.get(v).map_err(|_| DistError::Unbound(v.clone()))?;
            w *= d.prob(x);
        }
        Ok(w)
    }

    pub fn joint_support_size(&self) -> usize {
        self.dists.iter().fold(1usize, |acc, d| acc.saturating_mul(d.support.len()))
    }

    /// Every joint outcome with its product weight, in lexicographic order
    /// of per-variable support positions.
    pub fn joint_support(&self) -> Vec<(Vec<BigInt>, Rational)> {
        let size = self.joint_support_size();
        if size > JOINT_SUPPORT_WARN {
            log::warn!("joint support has {size} outcomes; checks enumerate all of them");
        }
        let mut out = vec![(Vec::with_capacity(self.vars.len()), Rational::one())];
        for d in &self.dists {
            let mut next = Vec::with_capacity(out.len() * d.support.len());
            for (prefix, w) in &out {
                for (v, p) in &d.support {
                    let mut vals = prefix.clone();
                    vals.push(v.clone());
                    next.push((vals, w * p));
                }
            }
            out = next;
        }
        out
    }

    /// Draws a joint valuation into `out`, one coordinate per variable.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<BigInt>) {
        out.clear();
        out.extend(self.dists.iter().map(|d| d.sample(rng).clone()));
    }
}

/// Parses the distribution file format: one stanza per line,
/// `r: 1 1/4; -1 3/4`. `#` starts a comment.
pub fn parse_dist_file(text: &str) -> Result<SamplingFunction, DistError> {
    let mut entries = Vec::new();
    let mut names = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: String| DistError::Syntax { line: line_no, msg };
        let (name, body) =
            line.split_once(':').ok_or_else(|| syntax("expected `name: value prob; ...`".into()))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(syntax(format!("bad variable name `{name}`")));
        }
        let mut support = Vec::new();
        for item in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let mut parts = item.split_whitespace();
            let (Some(v), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(syntax(format!("expected `value probability`, got `{item}`")));
            };
            let v: BigInt = v.parse().map_err(|_| syntax(format!("bad value `{v}`")))?;
            let p = parse_rational(p).ok_or_else(|| syntax(format!("bad probability `{p}`")))?;
            support.push((v, p));
        }
        let dist = DiscreteDist::new(support).map_err(|e| syntax(format!("`{name}`: {e}")))?;
        if !names.insert(name.to_string()) {
            return Err(DistError::DuplicateVariable(name.to_string()));
        }
        entries.push((name.to_string(), dist));
    }
    SamplingFunction::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngStream;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    fn running_r() -> DiscreteDist {
        DiscreteDist::new(vec![(1.into(), q(1, 4)), ((-1).into(), q(3, 4))]).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert_eq!(DiscreteDist::new(vec![]), Err(DistError::Empty));
        assert!(matches!(DiscreteDist::new(vec![(1.into(), q(1, 2))]), Err(DistError::NotNormalized(_))));
        assert!(matches!(
            DiscreteDist::new(vec![(1.into(), q(1, 2)), (1.into(), q(1, 2))]),
            Err(DistError::DuplicateValue(_))
        ));
        assert!(matches!(
            DiscreteDist::new(vec![(1.into(), q(0, 1)), (2.into(), q(1, 1))]),
            Err(DistError::BadProbability(_))
        ));
    }

    #[test]
    fn point_mass_sample() {
        let d = DiscreteDist::point(1.into());
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            assert_eq!(sample(&d, &mut rng), BigInt::from(1));
        }
    }

    #[test]
    fn product_weights() {
        let sf = SamplingFunction::new(vec![("r".into(), running_r())]).unwrap();
        assert_eq!(sf.product_weight(&Valuation::from_pairs([("r", -1)])).unwrap(), q(3, 4));
        assert_eq!(sf.product_weight(&Valuation::from_pairs([("r", 2)])).unwrap(), q(0, 1));
        assert_eq!(sf.product_weight(&Valuation::from_pairs([("s", 1)])), Err(DistError::Extra("s".into())));

        let coin = DiscreteDist::bernoulli(&q(1, 2)).unwrap();
        let sf = SamplingFunction::new(vec![("a".into(), coin.clone()), ("b".into(), coin)]).unwrap();
        assert_eq!(sf.product_weight(&Valuation::from_pairs([("a", 0), ("b", 1)])).unwrap(), q(1, 4));
        assert_eq!(
            sf.product_weight(&Valuation::from_pairs([("a", 0)])),
            Err(DistError::Unbound("b".into()))
        );
        let total: Rational = sf.joint_support().into_iter().map(|(_, w)| w).sum();
        assert_eq!(total, q(1, 1));
    }

    #[test]
    fn file_format() {
        let sf = parse_dist_file("# running example\nr: 1 1/4; -1 3/4\ns: -1 0.5; 1 0.5\n").unwrap();
        assert_eq!(sf.vars(), ["r", "s"]);
        assert_eq!(sf.get("r").unwrap(), &running_r());
        assert!(matches!(parse_dist_file("r: 1 1/2"), Err(DistError::Syntax { line: 1, .. })));
        assert!(matches!(parse_dist_file("r: 1 1\nr: 2 1"), Err(DistError::DuplicateVariable(_))));
    }

    #[test]
    fn huge_denominators_fall_back_to_floats() {
        let big = BigInt::from(3).pow(50u32);
        let p = Rational::new(BigInt::one(), big.clone());
        let d = DiscreteDist::new(vec![(0.into(), p.clone()), (1.into(), Rational::one() - p)]).unwrap();
        assert!(matches!(d.sampler, Sampler::Float { .. }));
        let mut rng = RngStream::new(3, 0);
        assert_eq!(d.sample(&mut rng), &BigInt::from(1));
    }
}
