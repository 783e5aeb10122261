//! Piecewise certificates over stack elements and their condition checks.
//!
//! Certificate files hold an optional parameter line and one stanza per
//! `(function, label)`:
//!
//! ```text
//! eps=1 delta=13 zeta=13
//! f@1: [n >= 1] 12*n - 4 ; [n <= 0] 2
//! f@2: [n >= 1] 12*n - 5 ; [n <= 0] inf
//! f@7: 0
//! ```
//!
//! The first piece whose guard holds gives the value; a piece without a guard
//! always matches, and an implicit `inf` piece ends every stanza. Lines
//! starting with whitespace continue the previous stanza.

mod check;
mod theta;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::cfg::Cfg;
use crate::lang::{EvalError, Expr, Label, ParseError, Parser, Pred, Tok};
use crate::prob::{parse_rational, ExtReal, Valuation};
use crate::scalar::Scalar;
use crate::Rational;

pub use check::{
    check_cdb, check_db, check_ranking, check_super, CheckReport, ConditionRow, Counterexample, Family,
    VerifyBox,
};
pub use theta::{theta_fixpoint, ThetaIndex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("certificate line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("no stanza for {func}@{label}")]
    MissingStanza { func: String, label: Label },
    #[error("stanza for {func}@{label}, which is not a label of the program")]
    UnknownLabel { func: String, label: Label },
    #[error("stanza {func}@{label} uses `{var}`, which is not a variable of `{func}`")]
    UnknownVariable { func: String, label: Label, var: String },
    #[error("certificate is negative at ({func}, {label}, {valuation}): {value}")]
    Negative { func: String, label: Label, valuation: String, value: String },
    #[error("evaluating {func}@{label} at {valuation}: {source}")]
    Eval { func: String, label: Label, valuation: String, source: EvalError },
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("parameter `{0}` must be positive")]
    NonPositiveParam(&'static str),
    #[error("verification box: {0}")]
    Box(String),
    #[error("{0}")]
    Cfg(String),
}

impl From<crate::cfg::CfgError> for CertError {
    fn from(e: crate::cfg::CfgError) -> Self {
        CertError::Cfg(e.to_string())
    }
}

/// Parameters named on the certificate's header line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CertParams {
    pub eps: Option<Rational>,
    pub delta: Option<Rational>,
    pub zeta: Option<Rational>,
}

impl fmt::Display for CertParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in [("eps", &self.eps), ("delta", &self.delta), ("zeta", &self.zeta)] {
            if let Some(v) = v {
                parts.push(format!("{k}={}", crate::lang::fmt_rational(v)));
            }
        }
        f.write_str(&parts.join(" "))
    }
}

/// One guarded piece; `value == None` is `∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece<V = String> {
    pub guard: Option<Pred<V>>,
    pub value: Option<Expr<V>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Certificate {
    pub params: CertParams,
    pub stanzas: BTreeMap<(String, Label), Vec<Piece>>,
}

impl Certificate {
    pub fn parse(text: &str) -> Result<Self, CertError> {
        let mut cert = Certificate::default();
        for (line, body) in logical_lines(text) {
            let syntax = |msg: String| CertError::Syntax { line, msg };
            if is_param_line(&body) {
                for item in body.split_whitespace() {
                    let (k, v) =
                        item.split_once('=').ok_or_else(|| syntax(format!("bad parameter `{item}`")))?;
                    let v = parse_rational(v).ok_or_else(|| syntax(format!("bad value in `{item}`")))?;
                    let slot = match k {
                        "eps" | "epsilon" => &mut cert.params.eps,
                        "delta" => &mut cert.params.delta,
                        "zeta" => &mut cert.params.zeta,
                        _ => return Err(syntax(format!("unknown parameter `{k}`"))),
                    };
                    *slot = Some(v);
                }
                continue;
            }
            let located = |e: ParseError| syntax(format!("column {}: {}", e.col, e.msg));
            let mut p = Parser::new(&body, true).map_err(located)?;
            let func = p.ident().map_err(located)?;
            p.expect(&Tok::At).map_err(located)?;
            let label = match p.bump() {
                Tok::Int(l) => l.try_into().map_err(|_| syntax("label out of range".into()))?,
                _ => return Err(syntax("expected a label after `@`".into())),
            };
            p.expect(&Tok::Colon).map_err(located)?;
            let mut pieces = Vec::new();
            while !p.at_eof() {
                let guard = if p.eat(&Tok::LBracket) {
                    let g = p.parse_pred().map_err(located)?;
                    p.expect(&Tok::RBracket).map_err(located)?;
                    Some(g)
                } else {
                    None
                };
                let value = if p.eat_keyword("inf") { None } else { Some(p.parse_expr().map_err(located)?) };
                pieces.push(Piece { guard, value });
                if !p.eat(&Tok::Semi) && !p.at_eof() {
                    return Err(located(p.error(format!("expected `;`, found {}", p.peek()))));
                }
            }
            if pieces.is_empty() {
                return Err(syntax(format!("stanza {func}@{label} has no pieces")));
            }
            if cert.stanzas.insert((func.clone(), label), pieces).is_some() {
                return Err(syntax(format!("stanza {func}@{label} given twice")));
            }
        }
        Ok(cert)
    }

    pub fn require_eps(&self) -> Result<Rational, CertError> {
        positive(self.params.eps.clone(), "eps")
    }

    pub fn require_delta(&self) -> Result<Rational, CertError> {
        positive(self.params.delta.clone(), "delta")
    }

    pub fn require_zeta(&self) -> Result<Rational, CertError> {
        positive(self.params.zeta.clone(), "zeta")
    }
}

pub(crate) fn positive(v: Option<Rational>, name: &'static str) -> Result<Rational, CertError> {
    let v = v.ok_or(CertError::MissingParam(name))?;
    if v <= Rational::from_integer(0.into()) {
        return Err(CertError::NonPositiveParam(name));
    }
    Ok(v)
}

fn is_param_line(body: &str) -> bool {
    !body.contains('@') && body.contains('=')
}

fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let continued = line.starts_with(char::is_whitespace);
        match out.last_mut() {
            Some((_, prev)) if continued => {
                prev.push(' ');
                prev.push_str(line.trim());
            }
            _ => out.push((i + 1, line.trim().to_string())),
        }
    }
    out
}

/// A certificate resolved against a control-flow graph: every label of every
/// function has a stanza and variables are frame slots.
#[derive(Clone, Debug)]
pub struct BoundCert {
    /// `pieces[f][ℓ - 1]`.
    pieces: Vec<Vec<Vec<Piece<usize>>>>,
    names: Vec<String>,
    pvars: Vec<std::sync::Arc<[String]>>,
    pub params: CertParams,
}

impl BoundCert {
    pub fn bind(cert: &Certificate, cfg: &Cfg) -> Result<Self, CertError> {
        for (func, label) in cert.stanzas.keys() {
            let known = cfg.function(func).is_some_and(|f| *label >= 1 && *label <= f.l_out);
            if !known {
                return Err(CertError::UnknownLabel { func: func.clone(), label: *label });
            }
        }
        let mut pieces = Vec::with_capacity(cfg.functions.len());
        for f in &cfg.functions {
            let mut per_label = Vec::with_capacity(f.l_out as usize);
            for label in f.labels() {
                let stanza = cert
                    .stanzas
                    .get(&(f.name.clone(), label))
                    .ok_or_else(|| CertError::MissingStanza { func: f.name.clone(), label })?;
                let mut resolve = |v: &String| {
                    f.var_index(v).ok_or_else(|| CertError::UnknownVariable {
                        func: f.name.clone(),
                        label,
                        var: v.clone(),
                    })
                };
                let bound = stanza
                    .iter()
                    .map(|p| {
                        Ok(Piece {
                            guard: p.guard.as_ref().map(|g| g.try_map_vars(&mut resolve)).transpose()?,
                            value: p.value.as_ref().map(|e| e.try_map_vars(&mut resolve)).transpose()?,
                        })
                    })
                    .collect::<Result<Vec<_>, CertError>>()?;
                per_label.push(bound);
            }
            pieces.push(per_label);
        }
        Ok(Self {
            pieces,
            names: cfg.functions.iter().map(|f| f.name.clone()).collect(),
            pvars: cfg.functions.iter().map(|f| f.pvars.clone()).collect(),
            params: cert.params.clone(),
        })
    }

    fn describe(&self, func: usize, vals: &[BigInt]) -> String {
        Valuation::new(self.pvars[func].clone(), vals.to_vec()).map(|v| v.to_string()).unwrap_or_default()
    }

    /// `h(f, ℓ, ν)` in scalar type `S`.
    pub fn eval<S: Scalar>(
        &self,
        func: usize,
        label: Label,
        vals: &[BigInt],
    ) -> Result<ExtReal<S>, CertError> {
        let err = |source| CertError::Eval {
            func: self.names[func].clone(),
            label,
            valuation: self.describe(func, vals),
            source,
        };
        let pieces = &self.pieces[func][label as usize - 1];
        for p in pieces {
            let hit = match &p.guard {
                None => true,
                Some(g) => g.eval_int(&|i: &usize| vals[*i].clone()).map_err(err)?,
            };
            if !hit {
                continue;
            }
            let Some(value) = &p.value else { return Ok(ExtReal::Infinite) };
            let x: S = value.eval_scalar(&|i: &usize| S::from_integer(&vals[*i])).map_err(err)?;
            return ExtReal::finite(x.clone()).ok_or_else(|| CertError::Negative {
                func: self.names[func].clone(),
                label,
                valuation: self.describe(func, vals),
                value: x.show(),
            });
        }
        Ok(ExtReal::Infinite)
    }

    pub fn eval_exact(
        &self,
        func: usize,
        label: Label,
        vals: &[BigInt],
    ) -> Result<ExtReal<Rational>, CertError> {
        self.eval(func, label, vals)
    }
}

/// `h(c)` for a stack element given by names, as in `eval_cert(h, c)`.
pub fn eval_cert(
    h: &BoundCert,
    cfg: &Cfg,
    func: &str,
    label: Label,
    nu: &Valuation,
) -> Result<ExtReal<Rational>, CertError> {
    let fi = cfg.function_index(func)?;
    let f = &cfg.functions[fi];
    if label == 0 || label > f.l_out {
        return Err(CertError::UnknownLabel { func: func.to_string(), label });
    }
    let vals: Vec<BigInt> = f
        .pvars
        .iter()
        .map(|v| nu.get(v).cloned().map_err(|_| CertError::Box(format!("valuation lacks `{v}`"))))
        .collect::<Result<_, _>>()?;
    h.eval_exact(fi, label, &vals)
}
