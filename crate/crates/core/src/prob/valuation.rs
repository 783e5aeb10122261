use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValuationError {
    #[error("variable `{0}` is not declared")]
    Undeclared(String),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
}

/// A total map from a fixed, ordered variable set to integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    vars: Arc<[String]>,
    values: Vec<BigInt>,
}

impl Valuation {
    pub fn new(vars: Arc<[String]>, values: Vec<BigInt>) -> Result<Self, ValuationError> {
        if vars.len() != values.len() {
            return Err(ValuationError::Arity { expected: vars.len(), got: values.len() });
        }
        Ok(Self { vars, values })
    }

    /// All variables bound to zero.
    pub fn zero(vars: Arc<[String]>) -> Self {
        let values = vec![BigInt::from(0); vars.len()];
        Self { vars, values }
    }

    pub fn from_pairs<I, S, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, V)>,
        S: Into<String>,
        V: Into<BigInt>,
    {
        let (vars, values): (Vec<String>, Vec<BigInt>) =
            pairs.into_iter().map(|(s, v)| (s.into(), v.into())).unzip();
        Self { vars: vars.into(), values }
    }

    pub fn get(&self, var: &str) -> Result<&BigInt, ValuationError> {
        self.index_of(var).map(|i| &self.values[i]).ok_or_else(|| ValuationError::Undeclared(var.to_string()))
    }

    pub fn set(&mut self, var: &str, value: BigInt) -> Result<(), ValuationError> {
        let i = self.index_of(var).ok_or_else(|| ValuationError::Undeclared(var.to_string()))?;
        self.values[i] = value;
        Ok(())
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn into_values(self) -> Vec<BigInt> {
        self.values
    }

    fn index_of(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.vars.iter().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_equality() {
        let a = Valuation::from_pairs([("n", 5), ("x", 0)]);
        assert_eq!(a.get("n").unwrap(), &BigInt::from(5));
        assert_eq!(a.get("y"), Err(ValuationError::Undeclared("y".into())));
        let mut b = Valuation::zero(a.vars.clone());
        assert_ne!(a, b);
        b.set("n", 5.into()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "{n=5, x=0}");
    }

    #[test]
    fn arity_is_checked() {
        let vars: Arc<[String]> = vec!["n".to_string()].into();
        assert!(Valuation::new(vars, vec![]).is_err());
    }
}
