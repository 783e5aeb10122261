use rayon::prelude::*;
use serde::Serialize;

use super::{step_in_place, Configuration, Scheduler, SimError, StackElement};
use crate::cfg::Cfg;
use crate::prob::{RngStream, SamplingFunction};
use crate::stats::{Moments, Proportion};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOptions {
    pub runs: u64,
    /// Runs still going after this many steps are censored.
    pub max_steps: u64,
    /// Thresholds `k` for `P(T ≥ k)`.
    pub tails: Vec<u64>,
    pub seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { runs: 10_000, max_steps: 1_000_000, tails: Vec::new(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub k: u64,
    #[serde(flatten)]
    pub est: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub runs: u64,
    pub terminated: u64,
    pub censored: u64,
    pub max_steps: u64,
    pub seed: u64,
    /// Sum of `T` over terminated runs.
    pub total_steps: u128,
    /// Mean of `T` over terminated runs.
    pub mean: Option<f64>,
    /// 95% normal half-width of `mean`.
    pub mean_half_width: Option<f64>,
    /// `P̂(T ≥ k)`, ascending in `k`. Censored runs count for `k ≤ cap + 1`,
    /// so each estimate is a lower bound on the true frequency.
    pub tails: Vec<TailEstimate>,
}

impl RunStats {
    pub fn tail(&self, k: u64) -> Option<&TailEstimate> {
        self.tails.iter().find(|t| t.k == k)
    }
}

/// One run from `entry`; `Some(T)` when the stack empties within
/// `max_steps` steps. `sf` must be ordered as `cfg.sampling`.
pub fn run_once(
    cfg: &Cfg,
    sf: &SamplingFunction,
    entry: &StackElement,
    sched: &Scheduler,
    max_steps: u64,
    rng: &mut RngStream,
) -> Result<Option<u64>, SimError> {
    let mut config = Configuration::single(entry.clone());
    let mut mu = Vec::with_capacity(cfg.sampling.len());
    let mut steps = 0;
    while !config.is_empty() {
        if steps == max_steps {
            return Ok(None);
        }
        let action = sched.choose(cfg, &config, rng)?;
        sf.sample_into(rng, &mut mu);
        step_in_place(&mut config, action, &mu, cfg)?;
        steps += 1;
    }
    Ok(Some(steps))
}

struct Acc {
    moments: Moments,
    censored: u64,
    tail_counts: Vec<u64>,
    err: Option<(u64, SimError)>,
}

impl Acc {
    fn new(n: usize) -> Self {
        Self { moments: Moments::default(), censored: 0, tail_counts: vec![0; n], err: None }
    }

    fn merge(mut self, o: Self) -> Self {
        self.moments = self.moments.merge(o.moments);
        self.censored += o.censored;
        for (a, b) in self.tail_counts.iter_mut().zip(o.tail_counts) {
            *a += b;
        }
        self.err = match (self.err, o.err) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Monte Carlo estimate of the termination time from `entry`. Run `i` uses
/// the random stream `(seed, i)`, so the result does not depend on the
/// number of worker threads.
pub fn simulate(
    cfg: &Cfg,
    sf: &SamplingFunction,
    entry: &StackElement,
    sched: &Scheduler,
    opts: &SimOptions,
) -> Result<RunStats, SimError> {
    if entry.is_terminal(cfg) {
        return Err(SimError::TerminalEntry(entry.display(cfg).to_string()));
    }
    if opts.max_steps == 0 {
        return Err(SimError::ZeroCap);
    }
    let sf = cfg.select_sampling(sf)?;
    let mut ks = opts.tails.clone();
    ks.sort_unstable();
    ks.dedup();
    let cap = opts.max_steps;
    let acc = (0..opts.runs)
        .into_par_iter()
        .fold(
            || Acc::new(ks.len()),
            |mut acc, i| {
                if acc.err.is_some() {
                    return acc;
                }
                let mut rng = RngStream::new(opts.seed, i);
                match run_once(cfg, &sf, entry, sched, cap, &mut rng) {
                    Ok(Some(t)) => {
                        acc.moments.push(t);
                        for (c, k) in acc.tail_counts.iter_mut().zip(&ks) {
                            *c += (t >= *k) as u64;
                        }
                    }
                    Ok(None) => {
                        acc.censored += 1;
                        for (c, k) in acc.tail_counts.iter_mut().zip(&ks) {
                            *c += (*k <= cap + 1) as u64;
                        }
                    }
                    Err(e) => acc.err = Some((i, e)),
                }
                acc
            },
        )
        .reduce(|| Acc::new(ks.len()), Acc::merge);
    if let Some((_, e)) = acc.err {
        return Err(e);
    }
    let m = acc.moments;
    Ok(RunStats {
        runs: opts.runs,
        terminated: m.n,
        censored: acc.censored,
        max_steps: cap,
        seed: opts.seed,
        total_steps: m.sum,
        mean: m.mean(),
        mean_half_width: m.mean().map(|_| m.half_width()),
        tails: ks
            .iter()
            .zip(&acc.tail_counts)
            .map(|(k, c)| TailEstimate { k: *k, est: Proportion::new(*c, opts.runs) })
            .collect(),
    })
}
