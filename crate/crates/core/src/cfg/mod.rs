//! Control-flow graphs lowered from labelled programs.
//!
//! Labels are the frontend's labels. Each nonterminal label owns one
//! [`Node`]; the terminal label of a function has none.

mod build;
mod dump;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::lang::{EvalError, Expr, Label, Pred};
use crate::prob::{DistError, SamplingFunction, Valuation};

pub use build::build_cfg;
pub use dump::dump;

#[derive(Debug, Error)]
pub enum CfgError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{func}` has no label {label}")]
    UnknownLabel { func: String, label: Label },
    #[error("`{func}` has no variable `{var}`")]
    UnknownVariable { func: String, var: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Where a variable lives: the current frame, or the step's sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Prog(usize),
    Samp(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LabelClass {
    Branching,
    Assignment,
    Call,
    Nondeterministic,
    Terminal,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// `update` is `None` for `skip`.
    Assign {
        update: Option<(usize, Expr<Slot>)>,
        next: Label,
    },
    /// `args` has one expression per callee parameter.
    Call {
        callee: usize,
        args: Vec<Expr<Slot>>,
        next: Label,
    },
    Branch {
        cond: Pred<Slot>,
        then: Label,
        els: Label,
    },
    Nondet {
        then: Label,
        els: Label,
    },
}

impl Node {
    pub fn class(&self) -> LabelClass {
        match self {
            Node::Assign { .. } => LabelClass::Assignment,
            Node::Call { .. } => LabelClass::Call,
            Node::Branch { .. } => LabelClass::Branching,
            Node::Nondet { .. } => LabelClass::Nondeterministic,
        }
    }

    pub fn successors(&self) -> Vec<Label> {
        match self {
            Node::Assign { next, .. } | Node::Call { next, .. } => vec![*next],
            Node::Branch { then, els, .. } | Node::Nondet { then, els } => vec![*then, *els],
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionCfg {
    pub name: String,
    pub n_params: usize,
    /// Parameters first, then locals.
    pub pvars: Arc<[String]>,
    pub l_in: Label,
    pub l_out: Label,
    /// `nodes[ℓ - 1]` for `ℓ < l_out`.
    nodes: Vec<Node>,
}

impl FunctionCfg {
    pub fn node(&self, label: Label) -> Option<&Node> {
        match label {
            0 => None,
            l => self.nodes.get(l as usize - 1),
        }
    }

    pub fn class(&self, label: Label) -> Option<LabelClass> {
        if label == self.l_out {
            Some(LabelClass::Terminal)
        } else {
            self.node(label).map(Node::class)
        }
    }

    /// All labels in ascending order, terminal last.
    pub fn labels(&self) -> impl Iterator<Item = Label> {
        1..=self.l_out
    }

    pub fn var_index(&self, var: &str) -> Option<usize> {
        self.pvars.iter().position(|v| v == var)
    }

    pub fn params(&self) -> &[String] {
        &self.pvars[..self.n_params]
    }
}

#[derive(Clone, Debug)]
pub struct Cfg {
    pub functions: Vec<FunctionCfg>,
    /// Declared sampling variables followed by inline ones.
    pub sampling: Arc<[String]>,
    index: HashMap<String, usize>,
}

impl Cfg {
    pub fn function(&self, name: &str) -> Option<&FunctionCfg> {
        self.index.get(name).map(|&i| &self.functions[i])
    }

    pub fn function_index(&self, name: &str) -> Result<usize, CfgError> {
        self.index.get(name).copied().ok_or_else(|| CfgError::UnknownFunction(name.to_string()))
    }

    pub fn total_labels(&self) -> usize {
        self.functions.iter().map(|f| f.l_out as usize).sum()
    }

    /// Builds a valuation over `pvars(func)` from `name=value` pairs;
    /// unlisted variables are 0.
    pub fn valuation(&self, func: usize, pairs: &[(String, BigInt)]) -> Result<Vec<BigInt>, CfgError> {
        let f = &self.functions[func];
        let mut vals = vec![BigInt::from(0); f.pvars.len()];
        for (k, v) in pairs {
            let i = f
                .var_index(k)
                .ok_or_else(|| CfgError::UnknownVariable { func: f.name.clone(), var: k.clone() })?;
            vals[i] = v.clone();
        }
        Ok(vals)
    }

    /// Callee valuation for a call node: parameter `yⱼ ↦ eⱼ(ν)`, every other
    /// callee variable `↦ 0`.
    pub fn value_passing(
        &self,
        callee: usize,
        args: &[Expr<Slot>],
        nu: &[BigInt],
    ) -> Result<Vec<BigInt>, CfgError> {
        let g = &self.functions[callee];
        let mut out = Vec::with_capacity(g.pvars.len());
        for a in args {
            out.push(a.eval_int(&|s: &Slot| match s {
                Slot::Prog(i) => nu[*i].clone(),
                Slot::Samp(_) => unreachable!("call arguments range over program variables"),
            })?);
        }
        out.resize(g.pvars.len(), BigInt::from(0));
        Ok(out)
    }

    /// `v(ν)` for the call at `(func, label)`, as a [`Valuation`].
    pub fn value_passing_at(&self, func: &str, label: Label, nu: &Valuation) -> Result<Valuation, CfgError> {
        let fi = self.function_index(func)?;
        let f = &self.functions[fi];
        let Some(Node::Call { callee, args, .. }) = f.node(label) else {
            return Err(CfgError::UnknownLabel { func: func.to_string(), label });
        };
        let vals = self.ordered(f, nu)?;
        let out = self.value_passing(*callee, args, &vals)?;
        Ok(Valuation::new(self.functions[*callee].pvars.clone(), out).expect("arity matches"))
    }

    fn ordered(&self, f: &FunctionCfg, nu: &Valuation) -> Result<Vec<BigInt>, CfgError> {
        f.pvars
            .iter()
            .map(|v| {
                nu.get(v)
                    .cloned()
                    .map_err(|_| CfgError::UnknownVariable { func: f.name.clone(), var: v.clone() })
            })
            .collect()
    }

    /// `u(ν, μ)` for an assignment node, writing into `nu`.
    pub fn apply_update(
        update: &Option<(usize, Expr<Slot>)>,
        nu: &mut [BigInt],
        mu: &[BigInt],
    ) -> Result<(), EvalError> {
        if let Some((slot, e)) = update {
            let v = e.eval_int(&|s: &Slot| match s {
                Slot::Prog(i) => nu[*i].clone(),
                Slot::Samp(i) => mu[*i].clone(),
            })?;
            nu[*slot] = v;
        }
        Ok(())
    }

    pub fn eval_cond(cond: &Pred<Slot>, nu: &[BigInt]) -> Result<bool, EvalError> {
        cond.eval_int(&|s: &Slot| match s {
            Slot::Prog(i) => nu[*i].clone(),
            Slot::Samp(_) => unreachable!("predicates range over program variables"),
        })
    }

    /// The sampling function restricted and ordered to this graph's
    /// sampling variables.
    pub fn select_sampling(&self, sf: &SamplingFunction) -> Result<SamplingFunction, CfgError> {
        Ok(sf.select(&self.sampling)?)
    }
}

/// Renders a slot-resolved expression with the names of `func`.
pub struct Named<'a, T> {
    pub cfg: &'a Cfg,
    pub func: &'a FunctionCfg,
    pub item: &'a T,
}

impl fmt::Display for Named<'_, Expr<Slot>> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let named: Expr<String> =
            self.item.try_map_vars(&mut |s| Ok::<_, ()>(slot_name(self.cfg, self.func, s))).unwrap();
        write!(f, "{named}")
    }
}

impl fmt::Display for Named<'_, Pred<Slot>> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let named: Pred<String> =
            self.item.try_map_vars(&mut |s| Ok::<_, ()>(slot_name(self.cfg, self.func, s))).unwrap();
        write!(f, "{named}")
    }
}

fn slot_name(cfg: &Cfg, func: &FunctionCfg, s: &Slot) -> String {
    match s {
        Slot::Prog(i) => func.pvars[*i].clone(),
        Slot::Samp(i) => cfg.sampling[*i].clone(),
    }
}
