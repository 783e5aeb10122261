use std::fmt::{self, Display, Write};

use num_traits::{One, Signed, Zero};

use super::ast::*;
use crate::Rational;

fn prec<V>(e: &Expr<V>) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Const(c) if c.is_negative() => 0,
        Expr::Const(_) | Expr::Var(_) => 5,
    }
}

/// Writes a rational as an integer, a terminating decimal, or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = r.denom().clone();
    let mut digits = 0usize;
    for p in [2u32, 5] {
        while (&den % p).is_zero() {
            den /= p;
        }
    }
    if den.is_one() {
        let mut scaled = r.clone();
        while !scaled.is_integer() {
            scaled *= Rational::from_integer(10.into());
            digits += 1;
        }
        let n = scaled.to_integer();
        let neg = n.is_negative();
        let s = n.abs().to_string();
        let s = format!("{:0>width$}", s, width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        return format!("{}{int}.{frac}", if neg { "-" } else { "" });
    }
    format!("{}/{}", r.numer(), r.denom())
}

fn write_expr<V: Display>(out: &mut String, e: &Expr<V>, min: u8) {
    let p = prec(e);
    let paren = p < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => out.push_str(&fmt_rational(c)),
        Expr::Var(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Add(a, b) => bin(out, a, " + ", b, 1, 2),
        Expr::Sub(a, b) => bin(out, a, " - ", b, 1, 2),
        Expr::Mul(a, b) => bin(out, a, " * ", b, 2, 3),
        Expr::Div(a, d) => {
            write_expr(out, a, 2);
            let _ = write!(out, " / {d}");
        }
        Expr::Pow(a, b) => bin(out, a, "^", b, 5, 3),
        Expr::Neg(a) => {
            out.push('-');
            write_expr(out, a, 3);
        }
    }
    if paren {
        out.push(')');
    }
}

fn bin<V: Display>(out: &mut String, a: &Expr<V>, op: &str, b: &Expr<V>, lmin: u8, rmin: u8) {
    write_expr(out, a, lmin);
    out.push_str(op);
    write_expr(out, b, rmin);
}

fn write_pred<V: Display>(out: &mut String, p: &Pred<V>, min: u8) {
    let level = match p {
        Pred::Or(..) => 1,
        Pred::And(..) => 2,
        Pred::Not(_) | Pred::Cmp(..) => 3,
    };
    let paren = level < min;
    if paren {
        out.push('(');
    }
    match p {
        Pred::Cmp(a, op, b) => {
            write_expr(out, a, 0);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, 0);
        }
        Pred::Or(a, b) => {
            write_pred(out, a, 1);
            out.push_str(" or ");
            write_pred(out, b, 2);
        }
        Pred::And(a, b) => {
            write_pred(out, a, 2);
            out.push_str(" and ");
            write_pred(out, b, 3);
        }
        Pred::Not(a) => {
            out.push_str("not (");
            write_pred(out, a, 0);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

impl<V: Display> Display for Expr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl<V: Display> Display for Pred<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_pred(&mut s, self, 0);
        f.write_str(&s)
    }
}

struct Printer<'a> {
    prog: &'a Program,
    out: String,
    labels: bool,
}

impl Printer<'_> {
    fn line(&mut self, depth: usize, label: Option<Label>, text: &str) {
        if self.labels {
            match label {
                Some(l) => {
                    let _ = write!(self.out, "{:>4}: ", l);
                }
                None => self.out.push_str("      "),
            }
        }
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn stmt(&mut self, s: &Stmt, depth: usize, last: bool) {
        let semi = if last { "" } else { ";" };
        match s {
            Stmt::Skip { label } => self.line(depth, *label, &format!("skip{semi}")),
            Stmt::Assign { label, var, expr } => {
                let rhs = match expr {
                    Expr::Var(v) => match self.prog.inline_dist(v) {
                        Some(d) => format!("bernoulli({})", fmt_prob(&d.p)),
                        None => v.clone(),
                    },
                    e => e.to_string(),
                };
                self.line(depth, *label, &format!("{var} := {rhs}{semi}"));
            }
            Stmt::Call { label, callee, args } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                self.line(depth, *label, &format!("{callee}({}){semi}", args.join(", ")));
            }
            Stmt::If { label, cond, then, els } => {
                self.line(depth, *label, &format!("if {cond} then"));
                self.stmt(then, depth + 1, true);
                self.line(depth, None, "else");
                self.stmt(els, depth + 1, true);
                self.line(depth, None, &format!("fi{semi}"));
            }
            Stmt::IfStar { label, then, els } => {
                self.line(depth, *label, "if star then");
                self.stmt(then, depth + 1, true);
                self.line(depth, None, "else");
                self.stmt(els, depth + 1, true);
                self.line(depth, None, &format!("fi{semi}"));
            }
            Stmt::While { label, cond, body } => {
                self.line(depth, *label, &format!("while {cond} do"));
                self.stmt(body, depth + 1, true);
                self.line(depth, None, &format!("od{semi}"));
            }
            Stmt::Seq(items) => {
                for (i, s) in items.iter().enumerate() {
                    self.stmt(s, depth, last && i + 1 == items.len());
                }
            }
        }
    }
}

fn fmt_prob(p: &Rational) -> String {
    if p.is_integer() {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

fn render(prog: &Program, labels: bool) -> String {
    let mut pr = Printer { prog, out: String::new(), labels };
    if !prog.sampling.is_empty() {
        let _ = writeln!(pr.out, "sampling {};", prog.sampling.join(", "));
        pr.out.push('\n');
    }
    for (i, f) in prog.functions.iter().enumerate() {
        if i > 0 {
            pr.out.push('\n');
        }
        let _ = writeln!(pr.out, "{}({}) {{", f.name, f.params.join(", "));
        pr.stmt(&f.body, 1, true);
        match (labels, f.terminal) {
            (true, Some(t)) => {
                let _ = writeln!(pr.out, "{t:>4}: }}");
            }
            _ => pr.out.push_str("}\n"),
        }
    }
    pr.out
}

/// Source text that parses back to the same AST.
pub fn pretty_print(prog: &Program) -> String {
    render(prog, false)
}

/// Source-like listing with labels in the margin; not meant to be reparsed.
pub fn listing(prog: &Program) -> String {
    render(prog, true)
}
