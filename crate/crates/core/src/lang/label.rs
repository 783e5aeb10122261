use super::ast::{Label, Program, Stmt};

/// Numbers every atomic statement depth-first in source order, starting at 1
/// in each function body; the terminal label comes last.
pub fn label(mut prog: Program) -> Program {
    for f in &mut prog.functions {
        let mut next = 1;
        assign(&mut f.body, &mut next);
        f.terminal = Some(next);
    }
    prog
}

fn assign(s: &mut Stmt, next: &mut Label) {
    let mut take = |slot: &mut Option<Label>| {
        *slot = Some(*next);
        *next += 1;
    };
    match s {
        Stmt::Skip { label } | Stmt::Assign { label, .. } | Stmt::Call { label, .. } => take(label),
        Stmt::If { label, then, els, .. } | Stmt::IfStar { label, then, els } => {
            take(label);
            assign(then, next);
            assign(els, next);
        }
        Stmt::While { label, body, .. } => {
            take(label);
            assign(body, next);
        }
        Stmt::Seq(items) => items.iter_mut().for_each(|s| assign(s, next)),
    }
}
