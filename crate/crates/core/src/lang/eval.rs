use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::ast::{Expr, Pred};
use crate::scalar::Scalar;

/// Exponents above this are rejected rather than allocating huge integers.
pub const MAX_EXPONENT: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("exponent {0} is negative or not an integer")]
    BadExponent(String),
    #[error("exponent {0} exceeds the supported maximum")]
    ExponentTooLarge(String),
    #[error("constant {0} is not an integer")]
    NonInteger(String),
    #[error("unknown variable `{0}`")]
    Unknown(String),
}

fn exponent<T: std::fmt::Display>(e: &BigInt, shown: T) -> Result<u32, EvalError> {
    if e.is_negative() {
        return Err(EvalError::BadExponent(shown.to_string()));
    }
    match e.to_u32() {
        Some(x) if x <= MAX_EXPONENT => Ok(x),
        _ => Err(EvalError::ExponentTooLarge(shown.to_string())),
    }
}

impl<V> Expr<V> {
    /// Integer evaluation with floor division.
    pub fn eval_int(&self, env: &impl Fn(&V) -> BigInt) -> Result<BigInt, EvalError> {
        Ok(match self {
            Expr::Const(c) => {
                if !c.is_integer() {
                    return Err(EvalError::NonInteger(c.to_string()));
                }
                c.to_integer()
            }
            Expr::Var(v) => env(v),
            Expr::Add(a, b) => a.eval_int(env)? + b.eval_int(env)?,
            Expr::Sub(a, b) => a.eval_int(env)? - b.eval_int(env)?,
            Expr::Mul(a, b) => a.eval_int(env)? * b.eval_int(env)?,
            Expr::Div(a, d) => a.eval_int(env)?.div_floor(d),
            Expr::Pow(a, b) => {
                let e = b.eval_int(env)?;
                let e = exponent(&e, &e)?;
                num_traits::pow(a.eval_int(env)?, e as usize)
            }
            Expr::Neg(a) => -a.eval_int(env)?,
        })
    }

    /// Evaluation in an arbitrary scalar type. Floor division rounds toward
    /// negative infinity; exponents must be nonnegative integers.
    pub fn eval_scalar<S: Scalar>(&self, env: &impl Fn(&V) -> S) -> Result<S, EvalError> {
        Ok(match self {
            Expr::Const(c) => S::from_rational(c),
            Expr::Var(v) => env(v),
            Expr::Add(a, b) => a.eval_scalar(env)? + b.eval_scalar(env)?,
            Expr::Sub(a, b) => a.eval_scalar(env)? - b.eval_scalar(env)?,
            Expr::Mul(a, b) => a.eval_scalar(env)? * b.eval_scalar(env)?,
            Expr::Div(a, d) => (a.eval_scalar(env)? / S::from_integer(d)).floor(),
            Expr::Pow(a, b) => {
                let e = b.eval_scalar(env)?;
                let ei = e.to_integer().ok_or_else(|| EvalError::BadExponent(e.to_string()))?;
                let ei = exponent(&ei, &e)?;
                a.eval_scalar(env)?.pow_u32(ei)
            }
            Expr::Neg(a) => -a.eval_scalar(env)?,
        })
    }
}

impl<V> Pred<V> {
    pub fn eval_int(&self, env: &impl Fn(&V) -> BigInt) -> Result<bool, EvalError> {
        Ok(match self {
            Pred::Cmp(a, op, b) => op.holds(&a.eval_int(env)?, &b.eval_int(env)?),
            Pred::And(a, b) => a.eval_int(env)? && b.eval_int(env)?,
            Pred::Or(a, b) => a.eval_int(env)? || b.eval_int(env)?,
            Pred::Not(a) => !a.eval_int(env)?,
        })
    }
}
