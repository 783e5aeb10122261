use std::collections::HashMap;
use std::sync::Arc;

use super::{Cfg, CfgError, FunctionCfg, Node, Slot};
use crate::lang::{label, Expr, FunctionEntity, Label, Pred, Program, Stmt};

/// Lowers a program to its control-flow graph. Unlabelled programs are
/// labelled first.
pub fn build_cfg(prog: &Program) -> Result<Cfg, CfgError> {
    let labelled;
    let prog = if prog.is_labelled() {
        prog
    } else {
        labelled = label(prog.clone());
        &labelled
    };
    let sampling: Arc<[String]> = prog.sampling_vars().into();
    let index: HashMap<String, usize> =
        prog.functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect();
    let functions =
        prog.functions.iter().map(|f| lower_function(f, &sampling, &index)).collect::<Result<Vec<_>, _>>()?;
    Ok(Cfg { functions, sampling, index })
}

struct Lowering<'a> {
    func: &'a str,
    pvars: &'a [String],
    sampling: &'a [String],
    index: &'a HashMap<String, usize>,
    nodes: Vec<Option<Node>>,
}

fn lower_function(
    f: &FunctionEntity,
    sampling: &Arc<[String]>,
    index: &HashMap<String, usize>,
) -> Result<FunctionCfg, CfgError> {
    let pvars = f.pvars(sampling);
    let l_out = f.terminal.expect("labelled");
    let mut lw =
        Lowering { func: &f.name, pvars: &pvars, sampling, index, nodes: vec![None; l_out as usize - 1] };
    lw.stmt(&f.body, l_out)?;
    let nodes = lw.nodes.into_iter().map(|n| n.expect("every label lowered")).collect();
    Ok(FunctionCfg {
        name: f.name.clone(),
        n_params: f.params.len(),
        l_in: f.body.entry_label().expect("labelled"),
        l_out,
        pvars: pvars.into(),
        nodes,
    })
}

impl Lowering<'_> {
    fn slot(&self, v: &String) -> Result<Slot, CfgError> {
        if let Some(i) = self.pvars.iter().position(|p| p == v) {
            Ok(Slot::Prog(i))
        } else if let Some(i) = self.sampling.iter().position(|p| p == v) {
            Ok(Slot::Samp(i))
        } else {
            Err(CfgError::UnknownVariable { func: self.func.to_string(), var: v.clone() })
        }
    }

    fn expr(&self, e: &Expr) -> Result<Expr<Slot>, CfgError> {
        e.try_map_vars(&mut |v| self.slot(v))
    }

    fn pred(&self, p: &Pred) -> Result<Pred<Slot>, CfgError> {
        p.try_map_vars(&mut |v| self.slot(v))
    }

    fn put(&mut self, label: &Option<Label>, node: Node) {
        let l = label.expect("labelled");
        self.nodes[l as usize - 1] = Some(node);
    }

    /// Lowers `s` so that control continues at `next` afterwards.
    fn stmt(&mut self, s: &Stmt, next: Label) -> Result<(), CfgError> {
        match s {
            Stmt::Skip { label } => self.put(label, Node::Assign { update: None, next }),
            Stmt::Assign { label, var, expr } => {
                let Ok(Slot::Prog(slot)) = self.slot(var) else {
                    return Err(CfgError::UnknownVariable { func: self.func.to_string(), var: var.clone() });
                };
                let update = Some((slot, self.expr(expr)?));
                self.put(label, Node::Assign { update, next });
            }
            Stmt::Call { label, callee, args } => {
                let callee =
                    *self.index.get(callee).ok_or_else(|| CfgError::UnknownFunction(callee.clone()))?;
                let args = args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?;
                self.put(label, Node::Call { callee, args, next });
            }
            Stmt::If { label, cond, then, els } => {
                let node = Node::Branch {
                    cond: self.pred(cond)?,
                    then: then.entry_label().expect("labelled"),
                    els: els.entry_label().expect("labelled"),
                };
                self.put(label, node);
                self.stmt(then, next)?;
                self.stmt(els, next)?;
            }
            Stmt::IfStar { label, then, els } => {
                let node = Node::Nondet {
                    then: then.entry_label().expect("labelled"),
                    els: els.entry_label().expect("labelled"),
                };
                self.put(label, node);
                self.stmt(then, next)?;
                self.stmt(els, next)?;
            }
            Stmt::While { label, cond, body } => {
                let head = label.expect("labelled");
                let node = Node::Branch {
                    cond: self.pred(cond)?,
                    then: body.entry_label().expect("labelled"),
                    els: next,
                };
                self.put(label, node);
                self.stmt(body, head)?;
            }
            Stmt::Seq(items) => {
                for (i, s) in items.iter().enumerate() {
                    let cont = items.get(i + 1).map(|n| n.entry_label().expect("labelled")).unwrap_or(next);
                    self.stmt(s, cont)?;
                }
            }
        }
        Ok(())
    }
}
