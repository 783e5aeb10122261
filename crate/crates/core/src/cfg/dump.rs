use std::fmt::Write;

use super::{Cfg, Named, Node};

/// Deterministic edge list: functions sorted by name, labels ascending,
/// one triple per line.
///
/// ```text
/// function f(n) pvars [n] in 1 out 7
///   1 --[n >= 1]--> 2
///   1 --[not (n >= 1)]--> 6
///   2 --[star/then]--> 3
/// ```
pub fn dump(cfg: &Cfg) -> String {
    let mut out = String::new();
    let mut order: Vec<_> = cfg.functions.iter().collect();
    order.sort_by(|a, b| a.name.cmp(&b.name));
    for f in order {
        let _ = writeln!(
            out,
            "function {}({}) pvars [{}] in {} out {}",
            f.name,
            f.params().join(", "),
            f.pvars.join(", "),
            f.l_in,
            f.l_out
        );
        for l in f.labels() {
            let Some(node) = f.node(l) else { continue };
            match node {
                Node::Assign { update: None, next } => {
                    let _ = writeln!(out, "  {l} --[id]--> {next}");
                }
                Node::Assign { update: Some((slot, e)), next } => {
                    let e = Named { cfg, func: f, item: e };
                    let _ = writeln!(out, "  {l} --[{} := {e}]--> {next}", f.pvars[*slot]);
                }
                Node::Call { callee, args, next } => {
                    let g = &cfg.functions[*callee];
                    let binds: Vec<String> = g
                        .params()
                        .iter()
                        .zip(args)
                        .map(|(p, a)| format!("{p} <- {}", Named { cfg, func: f, item: a }))
                        .collect();
                    let sep = if binds.is_empty() { "" } else { ": " };
                    let _ = writeln!(out, "  {l} --[call {}{sep}{}]--> {next}", g.name, binds.join(", "));
                }
                Node::Branch { cond, then, els } => {
                    let c = Named { cfg, func: f, item: cond };
                    let _ = writeln!(out, "  {l} --[{c}]--> {then}");
                    let _ = writeln!(out, "  {l} --[not ({c})]--> {els}");
                }
                Node::Nondet { then, els } => {
                    let _ = writeln!(out, "  {l} --[star/then]--> {then}");
                    let _ = writeln!(out, "  {l} --[star/else]--> {els}");
                }
            }
        }
    }
    out
}
