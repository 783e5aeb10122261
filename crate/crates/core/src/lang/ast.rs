use num_bigint::BigInt;

use crate::prob::{DiscreteDist, DistError, SamplingFunction};
use crate::Rational;

pub type Label = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<V = String> {
    Const(Rational),
    Var(V),
    Add(Box<Expr<V>>, Box<Expr<V>>),
    Sub(Box<Expr<V>>, Box<Expr<V>>),
    Mul(Box<Expr<V>>, Box<Expr<V>>),
    /// Floor division by a positive integer constant.
    Div(Box<Expr<V>>, BigInt),
    /// Integer power; the exponent must evaluate to a nonnegative integer.
    Pow(Box<Expr<V>>, Box<Expr<V>>),
    Neg(Box<Expr<V>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pred<V = String> {
    Cmp(Expr<V>, CmpOp, Expr<V>),
    And(Box<Pred<V>>, Box<Pred<V>>),
    Or(Box<Pred<V>>, Box<Pred<V>>),
    Not(Box<Pred<V>>),
}

impl<V> Expr<V> {
    pub fn int(v: impl Into<BigInt>) -> Self {
        Expr::Const(Rational::from_integer(v.into()))
    }

    pub fn try_map_vars<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<Expr<W>, E> {
        let b = |e: &Expr<V>, f: &mut _| e.try_map_vars(f).map(Box::new);
        Ok(match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(v) => Expr::Var(f(v)?),
            Expr::Add(a, c) => Expr::Add(b(a, f)?, b(c, f)?),
            Expr::Sub(a, c) => Expr::Sub(b(a, f)?, b(c, f)?),
            Expr::Mul(a, c) => Expr::Mul(b(a, f)?, b(c, f)?),
            Expr::Div(a, d) => Expr::Div(b(a, f)?, d.clone()),
            Expr::Pow(a, c) => Expr::Pow(b(a, f)?, b(c, f)?),
            Expr::Neg(a) => Expr::Neg(b(a, f)?),
        })
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Pow(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Div(a, _) | Expr::Neg(a) => a.visit_vars(f),
        }
    }
}

impl<V> Pred<V> {
    pub fn try_map_vars<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<Pred<W>, E> {
        Ok(match self {
            Pred::Cmp(a, op, b) => Pred::Cmp(a.try_map_vars(f)?, *op, b.try_map_vars(f)?),
            Pred::And(a, b) => Pred::And(Box::new(a.try_map_vars(f)?), Box::new(b.try_map_vars(f)?)),
            Pred::Or(a, b) => Pred::Or(Box::new(a.try_map_vars(f)?), Box::new(b.try_map_vars(f)?)),
            Pred::Not(a) => Pred::Not(Box::new(a.try_map_vars(f)?)),
        })
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            Pred::Cmp(a, _, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Pred::And(a, b) | Pred::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Pred::Not(a) => a.visit_vars(f),
        }
    }
}

/// Statements. Atomic statements carry a label slot filled by
/// [`label`](super::label); sequences are kept flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Skip { label: Option<Label> },
    Assign { label: Option<Label>, var: String, expr: Expr },
    If { label: Option<Label>, cond: Pred, then: Box<Stmt>, els: Box<Stmt> },
    IfStar { label: Option<Label>, then: Box<Stmt>, els: Box<Stmt> },
    While { label: Option<Label>, cond: Pred, body: Box<Stmt> },
    Call { label: Option<Label>, callee: String, args: Vec<Expr> },
    Seq(Vec<Stmt>),
}

impl Stmt {
    /// Label of the first statement executed.
    pub fn entry_label(&self) -> Option<Label> {
        match self {
            Stmt::Skip { label }
            | Stmt::Assign { label, .. }
            | Stmt::If { label, .. }
            | Stmt::IfStar { label, .. }
            | Stmt::While { label, .. }
            | Stmt::Call { label, .. } => *label,
            Stmt::Seq(items) => items.first().and_then(Stmt::entry_label),
        }
    }

    /// Visits every statement in depth-first source order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match self {
            Stmt::If { then, els, .. } | Stmt::IfStar { then, els, .. } => {
                then.walk(f);
                els.walk(f);
            }
            Stmt::While { body, .. } => body.walk(f),
            Stmt::Seq(items) => items.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionEntity {
    pub name: String,
    pub params: Vec<String>,
    pub body: Stmt,
    pub terminal: Option<Label>,
}

impl FunctionEntity {
    /// Parameters first, then locals in order of first appearance.
    /// Sampling variables are excluded.
    pub fn pvars(&self, sampling: &[String]) -> Vec<String> {
        let mut out = self.params.clone();
        let mut add = |v: &String| {
            if !out.contains(v) && !sampling.contains(v) {
                out.push(v.clone());
            }
        };
        self.body.walk(&mut |s| match s {
            Stmt::Assign { var, expr, .. } => {
                add(var);
                expr.visit_vars(&mut add);
            }
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => cond.visit_vars(&mut add),
            Stmt::Call { args, .. } => args.iter().for_each(|a| a.visit_vars(&mut add)),
            _ => {}
        });
        out
    }
}

/// A sampling variable introduced by `x := bernoulli(p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InlineDist {
    pub var: String,
    pub p: Rational,
    pub dist: DiscreteDist,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    /// Sampling variables declared in the `sampling` header.
    pub sampling: Vec<String>,
    pub inline_dists: Vec<InlineDist>,
    pub functions: Vec<FunctionEntity>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionEntity> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Declared and inline sampling variables.
    pub fn sampling_vars(&self) -> Vec<String> {
        let mut out = self.sampling.clone();
        out.extend(self.inline_dists.iter().map(|d| d.var.clone()));
        out
    }

    pub fn inline_dist(&self, var: &str) -> Option<&InlineDist> {
        self.inline_dists.iter().find(|d| d.var == var)
    }

    /// The full sampling function: `declared` for header variables plus the
    /// inline Bernoulli distributions, ordered as [`Program::sampling_vars`].
    /// Extra entries of `declared` are dropped.
    pub fn sampling_function(&self, declared: &SamplingFunction) -> Result<SamplingFunction, DistError> {
        let inline = SamplingFunction::new(
            self.inline_dists.iter().map(|d| (d.var.clone(), d.dist.clone())).collect(),
        )?;
        declared.select(&self.sampling)?.merge(inline)
    }

    pub fn is_labelled(&self) -> bool {
        let mut ok = true;
        for f in &self.functions {
            ok &= f.terminal.is_some();
            f.body.walk(&mut |s| {
                if !matches!(s, Stmt::Seq(_)) {
                    ok &= s.entry_label().is_some();
                }
            });
        }
        ok
    }
}
