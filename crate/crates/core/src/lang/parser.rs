use std::collections::{HashMap, HashSet};

use num_traits::{Signed, Zero};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::prob::DiscreteDist;
use crate::Rational;

const KEYWORDS: &[&str] = &[
    "if",
    "then",
    "else",
    "fi",
    "while",
    "do",
    "od",
    "skip",
    "star",
    "sampling",
    "and",
    "or",
    "not",
    "bernoulli",
    "inf",
];

/// Recursive descent parser over a token stream. Expression and predicate
/// parsing is shared with the certificate format.
pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    allow_decimal: bool,
}

impl Parser {
    pub fn new(src: &str, allow_decimal: bool) -> Result<Self, ParseError> {
        Ok(Self { toks: tokenize(src)?, pos: 0, allow_decimal })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn position(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.position();
        ParseError::new(line, col, msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // expressions

    pub fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&Tok::Slash) {
                let d = match self.peek() {
                    Tok::Int(d) if d.is_positive() => d.clone(),
                    _ => return Err(self.unexpected("a positive integer divisor")),
                };
                self.bump();
                lhs = Expr::Div(Box::new(lhs), d);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::int(i))
            }
            Tok::Decimal(r) if self.allow_decimal => {
                self.bump();
                Ok(Expr::Const(r))
            }
            Tok::Decimal(_) => Err(self.error("decimal constants are not allowed in programs")),
            Tok::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            _ => Err(self.unexpected("an expression")),
        }
    }

    // predicates

    pub fn parse_pred(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.conj()?;
        while self.eat_keyword("or") {
            lhs = Pred::Or(Box::new(lhs), Box::new(self.conj()?));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat_keyword("and") {
            lhs = Pred::And(Box::new(lhs), Box::new(self.negation()?));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Pred, ParseError> {
        if self.eat_keyword("not") {
            return Ok(Pred::Not(Box::new(self.negation()?)));
        }
        if self.peek() == &Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(p) = self.parse_pred() {
                if self.eat(&Tok::RParen) && !self.at_comparison() && !self.at_arith_op() {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        self.comparison()
    }

    fn at_comparison(&self) -> bool {
        matches!(self.peek(), Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Eq)
    }

    fn at_arith_op(&self) -> bool {
        matches!(self.peek(), Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret)
    }

    fn comparison(&mut self) -> Result<Pred, ParseError> {
        let lhs = self.parse_expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => return Err(self.error("`=` is not a comparison; use `<=` and `>=`")),
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.parse_expr()?;
        Ok(Pred::Cmp(lhs, op, rhs))
    }
}

struct CallSite {
    callee: String,
    argc: usize,
    at: (usize, usize),
}

struct ProgramParser {
    p: Parser,
    sampling: Vec<String>,
    inline_dists: Vec<InlineDist>,
    calls: Vec<CallSite>,
    /// First use of each sampling variable.
    sampling_uses: HashMap<String, (usize, usize)>,
    idents: HashSet<String>,
}

/// Parses program source into an unlabelled [`Program`].
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let mut pp = ProgramParser {
        p: Parser::new(src, false)?,
        sampling: Vec::new(),
        inline_dists: Vec::new(),
        calls: Vec::new(),
        sampling_uses: HashMap::new(),
        idents: HashSet::new(),
    };
    pp.program()
}

impl ProgramParser {
    fn program(&mut self) -> Result<Program, ParseError> {
        if self.p.eat_keyword("sampling") {
            loop {
                let at = self.p.position();
                let v = self.p.ident()?;
                if self.sampling.contains(&v) {
                    return Err(ParseError::new(
                        at.0,
                        at.1,
                        format!("sampling variable `{v}` declared twice"),
                    ));
                }
                self.sampling.push(v);
                if !self.p.eat(&Tok::Comma) {
                    break;
                }
            }
            self.p.expect(&Tok::Semi)?;
        }
        let mut functions: Vec<FunctionEntity> = Vec::new();
        let mut arity = HashMap::new();
        while !self.p.at_eof() {
            let at = self.p.position();
            let f = self.function()?;
            if arity.insert(f.name.clone(), f.params.len()).is_some() {
                return Err(ParseError::new(at.0, at.1, format!("function `{}` defined twice", f.name)));
            }
            functions.push(f);
        }
        if functions.is_empty() {
            return Err(self.p.error("expected at least one function"));
        }
        for c in &self.calls {
            match arity.get(&c.callee) {
                None => {
                    return Err(ParseError::new(
                        c.at.0,
                        c.at.1,
                        format!("call to undeclared function `{}`", c.callee),
                    ))
                }
                Some(&n) if n != c.argc => {
                    return Err(ParseError::new(
                        c.at.0,
                        c.at.1,
                        format!("`{}` takes {n} arguments, {} given", c.callee, c.argc),
                    ))
                }
                _ => {}
            }
        }
        for d in &self.inline_dists {
            if self.idents.contains(&d.var) {
                return Err(ParseError::new(1, 1, format!("identifier `{}` is reserved", d.var)));
            }
        }
        Ok(Program {
            sampling: std::mem::take(&mut self.sampling),
            inline_dists: std::mem::take(&mut self.inline_dists),
            functions,
        })
    }

    fn function(&mut self) -> Result<FunctionEntity, ParseError> {
        let name = self.p.ident()?;
        self.p.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if self.p.peek() != &Tok::RParen {
            loop {
                let at = self.p.position();
                let v = self.p.ident()?;
                if params.contains(&v) {
                    return Err(ParseError::new(at.0, at.1, format!("duplicate parameter `{v}`")));
                }
                if self.sampling.contains(&v) {
                    return Err(ParseError::new(at.0, at.1, format!("`{v}` is a sampling variable")));
                }
                self.idents.insert(v.clone());
                params.push(v);
                if !self.p.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.p.expect(&Tok::RParen)?;
        self.p.expect(&Tok::LBrace)?;
        let body = self.seq()?;
        self.p.expect(&Tok::RBrace)?;
        Ok(FunctionEntity { name, params, body, terminal: None })
    }

    fn at_seq_end(&self) -> bool {
        matches!(self.p.peek(), Tok::RBrace | Tok::Eof)
            || ["else", "fi", "od"].iter().any(|k| self.p.is_keyword(k))
    }

    fn seq(&mut self) -> Result<Stmt, ParseError> {
        let mut items = vec![self.stmt()?];
        loop {
            if self.p.eat(&Tok::Semi) {
                if self.at_seq_end() {
                    break;
                }
                items.push(self.stmt()?);
            } else if self.at_seq_end() {
                break;
            } else {
                return Err(self.p.unexpected("`;`"));
            }
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Stmt::Seq(items) })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.p.eat_keyword("skip") {
            return Ok(Stmt::Skip { label: None });
        }
        if self.p.eat_keyword("if") {
            if self.p.eat_keyword("star") || self.p.eat(&Tok::Star) {
                self.p.expect_keyword("then")?;
                let then = Box::new(self.seq()?);
                self.p.expect_keyword("else")?;
                let els = Box::new(self.seq()?);
                self.p.expect_keyword("fi")?;
                return Ok(Stmt::IfStar { label: None, then, els });
            }
            let cond = self.pred()?;
            self.p.expect_keyword("then")?;
            let then = Box::new(self.seq()?);
            self.p.expect_keyword("else")?;
            let els = Box::new(self.seq()?);
            self.p.expect_keyword("fi")?;
            return Ok(Stmt::If { label: None, cond, then, els });
        }
        if self.p.eat_keyword("while") {
            let cond = self.pred()?;
            self.p.expect_keyword("do")?;
            let body = Box::new(self.seq()?);
            self.p.expect_keyword("od")?;
            return Ok(Stmt::While { label: None, cond, body });
        }
        let at = self.p.position();
        let name = self.p.ident()?;
        if self.p.eat(&Tok::Assign) {
            if self.sampling.contains(&name) {
                return Err(ParseError::new(
                    at.0,
                    at.1,
                    format!("cannot assign to sampling variable `{name}`"),
                ));
            }
            self.idents.insert(name.clone());
            if self.p.eat_keyword("bernoulli") {
                let var = self.bernoulli()?;
                return Ok(Stmt::Assign { label: None, var: name, expr: Expr::Var(var) });
            }
            let at = self.p.position();
            let expr = self.p.parse_expr()?;
            self.record_sampling_uses(&expr, at)?;
            return Ok(Stmt::Assign { label: None, var: name, expr });
        }
        if self.p.eat(&Tok::LParen) {
            let mut args = Vec::new();
            if self.p.peek() != &Tok::RParen {
                loop {
                    args.push(self.pexpr()?);
                    if !self.p.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.p.expect(&Tok::RParen)?;
            self.calls.push(CallSite { callee: name.clone(), argc: args.len(), at });
            return Ok(Stmt::Call { label: None, callee: name, args });
        }
        Err(self.p.unexpected("`:=` or `(`"))
    }

    fn bernoulli(&mut self) -> Result<String, ParseError> {
        self.p.expect(&Tok::LParen)?;
        let at = self.p.position();
        let prob = match self.p.bump() {
            Tok::Decimal(r) => r,
            Tok::Int(n) => {
                if self.p.eat(&Tok::Slash) {
                    match self.p.bump() {
                        Tok::Int(d) if !d.is_zero() => Rational::new(n, d),
                        _ => return Err(ParseError::new(at.0, at.1, "bad probability")),
                    }
                } else {
                    Rational::from_integer(n)
                }
            }
            _ => return Err(ParseError::new(at.0, at.1, "expected a probability")),
        };
        self.p.expect(&Tok::RParen)?;
        let dist = DiscreteDist::bernoulli(&prob).map_err(|e| ParseError::new(at.0, at.1, e.to_string()))?;
        let var = format!("_bern{}", self.inline_dists.len() + 1);
        self.inline_dists.push(InlineDist { var: var.clone(), p: prob, dist });
        Ok(var)
    }

    /// An expression over program variables only.
    fn pexpr(&mut self) -> Result<Expr, ParseError> {
        let at = self.p.position();
        let e = self.p.parse_expr()?;
        self.reject_sampling(&e_vars(&e), at)?;
        self.note_idents(&e_vars(&e));
        Ok(e)
    }

    fn pred(&mut self) -> Result<Pred, ParseError> {
        let at = self.p.position();
        let p = self.p.parse_pred()?;
        let mut vars = Vec::new();
        p.visit_vars(&mut |v: &String| vars.push(v.clone()));
        self.reject_sampling(&vars, at)?;
        self.note_idents(&vars);
        Ok(p)
    }

    fn reject_sampling(&self, vars: &[String], at: (usize, usize)) -> Result<(), ParseError> {
        match vars.iter().find(|v| self.sampling.contains(v)) {
            Some(v) => Err(ParseError::new(
                at.0,
                at.1,
                format!("sampling variable `{v}` may only appear on the right of `:=`"),
            )),
            None => Ok(()),
        }
    }

    fn note_idents(&mut self, vars: &[String]) {
        self.idents.extend(vars.iter().cloned());
    }

    fn record_sampling_uses(&mut self, e: &Expr, at: (usize, usize)) -> Result<(), ParseError> {
        let vars = e_vars(e);
        for v in &vars {
            if self.sampling.contains(v) {
                if self.sampling_uses.insert(v.clone(), at).is_some() {
                    return Err(ParseError::new(
                        at.0,
                        at.1,
                        format!("sampling variable `{v}` is used more than once"),
                    ));
                }
            } else {
                self.idents.insert(v.clone());
            }
        }
        Ok(())
    }
}

fn e_vars(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    e.visit_vars(&mut |v: &String| out.push(v.clone()));
    out
}

/// Parses a single expression, allowing decimal constants.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src, true)?;
    let e = p.parse_expr()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

/// Parses a single predicate, allowing decimal constants.
pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    let mut p = Parser::new(src, true)?;
    let e = p.parse_pred()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of predicate"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Box<Expr> {
        Box::new(Expr::Var(s.into()))
    }

    fn int(i: i64) -> Box<Expr> {
        Box::new(Expr::int(i))
    }

    #[test]
    fn minimal_program() {
        let p = parse("f(n){ skip }").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.functions[0].body, Stmt::Skip { label: None });
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_expr("1 + 2 * n - -x^2^y").unwrap(),
            Expr::Sub(
                Box::new(Expr::Add(int(1), Box::new(Expr::Mul(int(2), var("n"))))),
                Box::new(Expr::Neg(Box::new(Expr::Pow(var("x"), Box::new(Expr::Pow(int(2), var("y")))))))
            )
        );
        assert_eq!(
            parse_expr("n / 2 * 3").unwrap(),
            Expr::Mul(Box::new(Expr::Div(var("n"), 2.into())), int(3))
        );
        assert!(parse_expr("n / x").is_err());
        assert!(parse_expr("n / 0").is_err());
    }

    #[test]
    fn predicate_parentheses() {
        let p = parse_pred("(n + 1) >= 2 and not (n < 0 or m > 1)").unwrap();
        let Pred::And(a, b) = p else { panic!() };
        assert!(matches!(*a, Pred::Cmp(Expr::Add(..), CmpOp::Ge, _)));
        assert!(matches!(*b, Pred::Not(inner) if matches!(*inner, Pred::Or(..))));
        let p = parse_pred("((n)) <= 1").unwrap();
        assert!(matches!(p, Pred::Cmp(Expr::Var(_), CmpOp::Le, _)));
        assert!(parse_pred("n = 0").is_err());
    }

    #[test]
    fn structural_errors() {
        let e = parse("f(n){ skip } f(m){ skip }").unwrap_err();
        assert!(e.msg.contains("defined twice"), "{e}");
        let e = parse("f(n){ g(n) }").unwrap_err();
        assert!(e.msg.contains("undeclared"), "{e}");
        let e = parse("f(n, n){ skip }").unwrap_err();
        assert!(e.msg.contains("duplicate parameter"), "{e}");
        let e = parse("sampling r; f(n){ n := n + r; n := n + r }").unwrap_err();
        assert!(e.msg.contains("more than once"), "{e}");
        assert_eq!((e.line, e.col), (1, 36));
        let e = parse("sampling r; f(n){ if r >= 0 then skip else skip fi }").unwrap_err();
        assert!(e.msg.contains("right of"), "{e}");
        let e = parse("sampling r; f(n){ f(r) }").unwrap_err();
        assert!(e.msg.contains("right of"), "{e}");
        let e = parse("f(n){ f(n, n) }").unwrap_err();
        assert!(e.msg.contains("takes 1"), "{e}");
        let e = parse("f(n){ skip skip }").unwrap_err();
        assert_eq!((e.line, e.col), (1, 12));
        assert!(parse("f(n){ n := 1.5 }").is_err());
    }

    #[test]
    fn bernoulli_desugars() {
        let p = parse("g() { c := bernoulli(0.5); d := bernoulli(1/4) }").unwrap();
        assert_eq!(p.inline_dists.len(), 2);
        assert_eq!(p.inline_dists[1].p, Rational::new(1.into(), 4.into()));
        let Stmt::Seq(items) = &p.functions[0].body else { panic!() };
        assert_eq!(items[0], Stmt::Assign { label: None, var: "c".into(), expr: Expr::Var("_bern1".into()) });
        assert_eq!(p.sampling_vars(), ["_bern1", "_bern2"]);
    }

    #[test]
    fn trailing_semicolons_and_star_forms() {
        let p = parse("f() { if * then skip; else skip; fi; }").unwrap();
        assert!(matches!(p.functions[0].body, Stmt::IfStar { .. }));
        let p = parse("f() { if star then skip else skip fi }").unwrap();
        assert!(matches!(p.functions[0].body, Stmt::IfStar { .. }));
    }
}
