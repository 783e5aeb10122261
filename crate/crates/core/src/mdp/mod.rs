//! The Markov decision process of a program.
//!
//! A state is a configuration (a stack of nonterminal stack elements) and
//! the last sample `μ`. Every step draws a fresh `μ′` from the product
//! sampling distribution; the action is `τ` except at nondeterministic tops,
//! where it is `th` or `el`. The empty configuration is absorbing.
//!
//! `μ` is stored for fidelity with the state space but no built-in scheduler
//! reads it.

mod sim;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::cert::{BoundCert, CertError};
use crate::cfg::{Cfg, CfgError, LabelClass, Node};
use crate::lang::{EvalError, Label};
use crate::prob::Valuation;

pub use sim::{run_once, simulate, RunStats, SimOptions, TailEstimate};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("action {action} is not enabled at {state}")]
    Disabled { action: Action, state: String },
    #[error("entry {0} is terminal")]
    TerminalEntry(String),
    #[error("step cap must be at least 1")]
    ZeroCap,
    #[error(
        "unknown scheduler `{0}`; expected one of greedy-max, greedy-min, always-then, always-else, uniform"
    )]
    UnknownScheduler(String),
    #[error("scheduler `{0}` needs a certificate")]
    NeedsCertificate(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error(transparent)]
    Cert(#[from] CertError),
}

/// An activation frame `(f, ℓ, ν)`; `vals` follows `pvars(f)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StackElement {
    pub func: usize,
    pub label: Label,
    pub vals: Vec<BigInt>,
}

impl StackElement {
    /// Builds `(func, label, ν)` where `ν` is given by pairs and unlisted
    /// variables are 0.
    pub fn new(cfg: &Cfg, func: &str, label: Label, pairs: &[(String, BigInt)]) -> Result<Self, CfgError> {
        let fi = cfg.function_index(func)?;
        if label == 0 || label > cfg.functions[fi].l_out {
            return Err(CfgError::UnknownLabel { func: func.to_string(), label });
        }
        Ok(Self { func: fi, label, vals: cfg.valuation(fi, pairs)? })
    }

    /// The element at the initial label of `func`.
    pub fn entry(cfg: &Cfg, func: &str, pairs: &[(String, BigInt)]) -> Result<Self, CfgError> {
        let fi = cfg.function_index(func)?;
        Self::new(cfg, func, cfg.functions[fi].l_in, pairs)
    }

    pub fn is_terminal(&self, cfg: &Cfg) -> bool {
        self.label == cfg.functions[self.func].l_out
    }

    pub fn display<'a>(&'a self, cfg: &'a Cfg) -> impl fmt::Display + 'a {
        DisplayElement { cfg, e: self }
    }
}

struct DisplayElement<'a> {
    cfg: &'a Cfg,
    e: &'a StackElement,
}

impl fmt::Display for DisplayElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let func = &self.cfg.functions[self.e.func];
        let nu = Valuation::new(func.pvars.clone(), self.e.vals.clone()).map_err(|_| fmt::Error)?;
        write!(f, "({}, {}, {nu})", func.name, self.e.label)
    }
}

/// A word of nonterminal stack elements. Stored bottom first; the top is the
/// last element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Configuration {
    stack: Vec<StackElement>,
}

impl Configuration {
    pub fn single(e: StackElement) -> Self {
        Self { stack: vec![e] }
    }

    /// From elements listed top first, as configurations are written.
    pub fn from_top_first(mut elems: Vec<StackElement>) -> Self {
        elems.reverse();
        Self { stack: elems }
    }

    pub fn top(&self) -> Option<&StackElement> {
        self.stack.last()
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn top_first(&self) -> impl Iterator<Item = &StackElement> {
        self.stack.iter().rev()
    }

    pub fn display<'a>(&'a self, cfg: &'a Cfg) -> impl fmt::Display + 'a {
        DisplayConfig { cfg, c: self }
    }
}

struct DisplayConfig<'a> {
    cfg: &'a Cfg,
    c: &'a Configuration,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return f.write_str("ε");
        }
        for (i, e) in self.c.top_first().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{}", e.display(self.cfg))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MdpState {
    pub config: Configuration,
    /// The sample drawn with the step that led here, one value per sampling
    /// variable of the graph.
    pub mu: Vec<BigInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Tau,
    Then,
    Else,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Tau => "tau",
            Action::Then => "th",
            Action::Else => "el",
        })
    }
}

/// Memoryless schedulers: they look only at the top stack element.
#[derive(Clone, Debug)]
pub enum Scheduler {
    /// `th` when `h(f, ℓ₁, ν) ≥ h(f, ℓ₂, ν)`.
    GreedyMax(Arc<BoundCert>),
    /// `th` when `h(f, ℓ₁, ν) ≤ h(f, ℓ₂, ν)`.
    GreedyMin(Arc<BoundCert>),
    AlwaysThen,
    AlwaysElse,
    /// A fair coin from the run's random stream.
    Uniform,
}

impl Scheduler {
    pub const NAMES: [&'static str; 5] =
        ["greedy-max", "greedy-min", "always-then", "always-else", "uniform"];

    /// Builds a scheduler by name; greedy modes need `cert`.
    pub fn by_name(name: &str, cert: Option<Arc<BoundCert>>) -> Result<Self, SimError> {
        Ok(match name {
            "greedy-max" => Scheduler::GreedyMax(cert.ok_or(SimError::NeedsCertificate("greedy-max"))?),
            "greedy-min" => Scheduler::GreedyMin(cert.ok_or(SimError::NeedsCertificate("greedy-min"))?),
            "always-then" => Scheduler::AlwaysThen,
            "always-else" => Scheduler::AlwaysElse,
            "uniform" => Scheduler::Uniform,
            other => return Err(SimError::UnknownScheduler(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheduler::GreedyMax(_) => "greedy-max",
            Scheduler::GreedyMin(_) => "greedy-min",
            Scheduler::AlwaysThen => "always-then",
            Scheduler::AlwaysElse => "always-else",
            Scheduler::Uniform => "uniform",
        }
    }

    /// The action at `config`. Only nondeterministic tops offer a choice.
    pub fn choose<R: rand::Rng + ?Sized>(
        &self,
        cfg: &Cfg,
        config: &Configuration,
        rng: &mut R,
    ) -> Result<Action, SimError> {
        let Some(top) = config.top() else { return Ok(Action::Tau) };
        let Some(Node::Nondet { then, els }) = cfg.functions[top.func].node(top.label) else {
            return Ok(Action::Tau);
        };
        let greedy = |h: &BoundCert| -> Result<_, SimError> {
            Ok((h.eval_exact(top.func, *then, &top.vals)?, h.eval_exact(top.func, *els, &top.vals)?))
        };
        let pick = |b: bool| if b { Action::Then } else { Action::Else };
        Ok(match self {
            Scheduler::GreedyMax(h) => {
                let (a, b) = greedy(h)?;
                pick(a >= b)
            }
            Scheduler::GreedyMin(h) => {
                let (a, b) = greedy(h)?;
                pick(a <= b)
            }
            Scheduler::AlwaysThen => Action::Then,
            Scheduler::AlwaysElse => Action::Else,
            Scheduler::Uniform => pick(rng.gen::<bool>()),
        })
    }
}

/// Actions enabled at a configuration.
pub fn enabled(cfg: &Cfg, config: &Configuration) -> &'static [Action] {
    match config.top().and_then(|t| cfg.functions[t.func].class(t.label)) {
        Some(LabelClass::Nondeterministic) => &[Action::Then, Action::Else],
        _ => &[Action::Tau],
    }
}

/// One transition of the MDP with the sample `mu` drawn for this step.
pub fn step(state: &MdpState, action: Action, mu: &[BigInt], cfg: &Cfg) -> Result<MdpState, SimError> {
    let mut config = state.config.clone();
    step_in_place(&mut config, action, mu, cfg)?;
    Ok(MdpState { config, mu: mu.to_vec() })
}

/// [`step`] on a configuration, mutating it.
pub fn step_in_place(
    config: &mut Configuration,
    action: Action,
    mu: &[BigInt],
    cfg: &Cfg,
) -> Result<(), SimError> {
    if !enabled(cfg, config).contains(&action) {
        return Err(SimError::Disabled { action, state: config.display(cfg).to_string() });
    }
    let Some(top) = config.stack.last_mut() else { return Ok(()) };
    let f = &cfg.functions[top.func];
    let node = f.node(top.label).expect("configurations hold nonterminal elements");
    let l_out = f.l_out;
    let next = match node {
        Node::Assign { update, next } => {
            Cfg::apply_update(update, &mut top.vals, mu)?;
            *next
        }
        Node::Call { callee, args, next } => {
            let inner = cfg.value_passing(*callee, args, &top.vals)?;
            let g = &cfg.functions[*callee];
            let frame = StackElement { func: *callee, label: g.l_in, vals: inner };
            if *next == l_out {
                config.stack.pop();
            } else {
                top.label = *next;
            }
            config.stack.push(frame);
            return Ok(());
        }
        Node::Branch { cond, then, els } => {
            if Cfg::eval_cond(cond, &top.vals)? {
                *then
            } else {
                *els
            }
        }
        Node::Nondet { then, els } => {
            if action == Action::Then {
                *then
            } else {
                *els
            }
        }
    };
    if next == l_out {
        config.stack.pop();
    } else {
        top.label = next;
    }
    Ok(())
}
