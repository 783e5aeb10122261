use crate::cfg::{Cfg, LabelClass, Node};
use crate::lang::Label;

/// Least fixpoint of the label closure together with the constants `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaIndex {
    names: Vec<String>,
    /// `k[f][ℓ - 1]`, `None` outside the fixpoint.
    k: Vec<Vec<Option<u64>>>,
    /// Iterations until `Θ_{m+1} = Θ_m`.
    pub m_star: usize,
    /// `|Θ_n|` for `n = 0..=m*`.
    pub sizes: Vec<usize>,
}

impl ThetaIndex {
    pub fn contains(&self, func: usize, label: Label) -> bool {
        self.k(func, label).is_some()
    }

    pub fn k(&self, func: usize, label: Label) -> Option<u64> {
        self.k.get(func)?.get(label.checked_sub(1)? as usize).copied().flatten()
    }

    pub fn k_named(&self, func: &str, label: Label) -> Option<u64> {
        self.k(self.names.iter().position(|n| n == func)?, label)
    }

    pub fn all_covered(&self) -> bool {
        self.k.iter().flatten().all(Option::is_some)
    }

    /// Labels outside the fixpoint, as `(function, label)`.
    pub fn uncovered(&self) -> Vec<(String, Label)> {
        let mut out = Vec::new();
        for (f, ks) in self.k.iter().enumerate() {
            for (i, k) in ks.iter().enumerate() {
                if k.is_none() {
                    out.push((self.names[f].clone(), i as Label + 1));
                }
            }
        }
        out
    }

    pub fn k_max_of(&self, func: usize) -> u64 {
        self.k[func].iter().flatten().copied().max().unwrap_or(0)
    }

    /// Maximum `K` over the fixpoint.
    pub fn k_max(&self) -> u64 {
        self.k.iter().flatten().flatten().copied().max().unwrap_or(0)
    }
}

pub fn theta_fixpoint(cfg: &Cfg) -> ThetaIndex {
    let mut k: Vec<Vec<Option<u64>>> = cfg
        .functions
        .iter()
        .map(|f| {
            f.labels()
                .map(|l| {
                    matches!(f.class(l), Some(LabelClass::Assignment | LabelClass::Terminal)).then_some(0)
                })
                .collect()
        })
        .collect();
    let count = |k: &Vec<Vec<Option<u64>>>| k.iter().flatten().filter(|x| x.is_some()).count();
    let mut sizes = vec![count(&k)];
    loop {
        let prev = k.clone();
        let get = |f: usize, l: Label| prev[f][l as usize - 1];
        for (fi, f) in cfg.functions.iter().enumerate() {
            for l in f.labels() {
                if prev[fi][l as usize - 1].is_some() {
                    continue;
                }
                let new = match f.node(l) {
                    Some(Node::Call { callee, next, .. }) => {
                        match (get(fi, *next), get(*callee, cfg.functions[*callee].l_in)) {
                            (Some(a), Some(b)) => Some(a.saturating_add(b).saturating_add(1)),
                            _ => None,
                        }
                    }
                    Some(Node::Branch { then, els, .. }) | Some(Node::Nondet { then, els }) => {
                        match (get(fi, *then), get(fi, *els)) {
                            (Some(a), Some(b)) => Some(a.max(b).saturating_add(1)),
                            _ => None,
                        }
                    }
                    _ => None,
                };
                k[fi][l as usize - 1] = new;
            }
        }
        let n = count(&k);
        if n == *sizes.last().expect("nonempty") {
            break;
        }
        sizes.push(n);
    }
    ThetaIndex {
        names: cfg.functions.iter().map(|f| f.name.clone()).collect(),
        k,
        m_star: sizes.len() - 1,
        sizes,
    }
}
